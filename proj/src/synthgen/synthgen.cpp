#include "mmf/synthgen/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>

#include "mmf/common/error.hpp"
#include "mmf/common/random.hpp"
#include "mmf/imgio/codec.hpp"
#include "mmf/imgio/signal.hpp"

namespace mmf::synthgen {

namespace fs = std::filesystem;
using imgio::ImageTensor;

bool Severity::is_zero() const {
  return blur_sigma == 0.0 && noise_sigma == 0.0 && color_shift == 0.0 && contrast == 0.0 && dropout == 0.0;
}

std::vector<SynthModel> default_models(std::size_t n_models) {
  if (n_models == 0) throw InvalidArgument("at least one synthetic model is required");
  std::vector<SynthModel> out;
  out.push_back({"m0", {}});
  for (std::size_t m = 1; m < n_models; ++m) {
    const double t = static_cast<double>(m) / static_cast<double>(n_models - 1);
    double w[5] = {0.3, 0.3, 0.3, 0.3, 0.3};
    w[(m - 1) % 5] = 1.0;
    Severity s;
    s.blur_sigma = 3.0 * t * w[0];
    s.noise_sigma = 0.08 * t * w[1];
    s.color_shift = 0.15 * t * w[2];
    s.contrast = 0.8 * t * w[3];
    s.dropout = 0.3 * t * w[4];
    out.push_back({"m" + std::to_string(m), s});
  }
  return out;
}

std::vector<SynthModel> SynthSpec::resolved_models() const { return models.empty() ? default_models(n_models) : models; }

void SynthSpec::validate() const {
  if (n_sources == 0) throw InvalidArgument("n_sources must be positive");
  if (size < 32) throw InvalidArgument("synthetic image size must be at least 32");
  const auto ms = resolved_models();
  bool perfect = false;
  for (const auto& m : ms) {
    const auto& s = m.severity;
    for (double v : {s.blur_sigma, s.noise_sigma, s.color_shift, s.contrast, s.dropout})
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("severities must be finite and >= 0");
    if (s.dropout > 1.0) throw InvalidArgument("dropout fraction must be <= 1");
    if (m.id.empty() || m.id == kGroundTruthModelId) throw InvalidArgument("invalid synthetic model id '" + m.id + "'");
    perfect = perfect || s.is_zero();
  }
  if (!perfect) throw InvalidArgument("at least one synthetic model must have all-zero severity");
}

SourceImages make_source(int size, std::uint64_t seed) {
  Rng rng(seed);
  const int h = size, w = size;
  std::vector<int> label(static_cast<std::size_t>(h) * w, 0);
  std::vector<std::array<double, 3>> albedo;

  // background gradient between two colours
  std::array<double, 3> c0, c1;
  for (auto& v : c0) v = uniform(rng, 0.2, 0.8);
  for (auto& v : c1) v = uniform(rng, 0.2, 0.8);
  const double ang = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double gx = std::cos(ang), gy = std::sin(ang);
  ImageTensor base(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double t = 0.5 + 0.5 * ((x / double(w) - 0.5) * gx + (y / double(h) - 0.5) * gy) * std::numbers::sqrt2;
      for (int c = 0; c < 3; ++c) base.at(y, x, c) = c0[c] + (c1[c] - c0[c]) * std::clamp(t, 0.0, 1.0);
    }

  struct Shape {
    int kind;
    double cx, cy, rx, ry, rot;
    std::array<double, 3> color;
    double freq, tex_angle, tex_amp;
  };
  const int n_shapes = static_cast<int>(uniform_int(rng, 3, 7));
  std::vector<Shape> shapes;
  for (int i = 0; i < n_shapes; ++i) {
    Shape s;
    s.kind = static_cast<int>(uniform_int(rng, 0, 2));
    s.cx = uniform(rng, 0.15, 0.85) * w;
    s.cy = uniform(rng, 0.15, 0.85) * h;
    s.rx = uniform(rng, 0.08, 0.25) * size;
    s.ry = s.kind == 0 ? s.rx : uniform(rng, 0.08, 0.25) * size;
    s.rot = uniform(rng, 0.0, std::numbers::pi);
    for (auto& v : s.color) v = uniform(rng, 0.05, 0.95);
    s.freq = uniform(rng, 0.08, 0.4);
    s.tex_angle = uniform(rng, 0.0, std::numbers::pi);
    s.tex_amp = uniform(rng, 0.03, 0.09);
    shapes.push_back(s);
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int i = 0; i < n_shapes; ++i) {
        const auto& s = shapes[i];
        const double dx = x + 0.5 - s.cx, dy = y + 0.5 - s.cy;
        const double u = dx * std::cos(s.rot) + dy * std::sin(s.rot);
        const double v = -dx * std::sin(s.rot) + dy * std::cos(s.rot);
        const bool inside = s.kind == 1 ? (std::abs(u) <= s.rx && std::abs(v) <= s.ry)
                                        : (u * u) / (s.rx * s.rx) + (v * v) / (s.ry * s.ry) <= 1.0;
        if (inside) label[static_cast<std::size_t>(y) * w + x] = i + 1;
      }

  // shading: linear light falloff plus a soft spot
  const double la = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double sx = uniform(rng, 0.2, 0.8) * w, sy = uniform(rng, 0.2, 0.8) * h;
  const double spot_r = uniform(rng, 0.25, 0.5) * size;
  ImageTensor src(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int l = label[static_cast<std::size_t>(y) * w + x];
      const double fall = 0.85 + 0.25 * ((x / double(w) - 0.5) * std::cos(la) + (y / double(h) - 0.5) * std::sin(la));
      const double d2 = ((x - sx) * (x - sx) + (y - sy) * (y - sy)) / (spot_r * spot_r);
      const double light = fall + 0.2 * std::exp(-d2);
      double tex = 0.0;
      if (l > 0) {
        const auto& s = shapes[l - 1];
        tex = s.tex_amp * std::sin(s.freq * (x * std::cos(s.tex_angle) + y * std::sin(s.tex_angle)));
      }
      for (int c = 0; c < 3; ++c) {
        const double a = l > 0 ? shapes[l - 1].color[c] : base.at(y, x, c);
        const double grain = 0.02 * normal(rng);
        src.at(y, x, c) = std::clamp(a * light + tex + grain, 0.0, 1.0);
      }
    }

  // ground truth: per-region mean colour (quantized like the stored source)
  const int n_regions = n_shapes + 1;
  std::vector<std::array<double, 3>> sum(n_regions, {0.0, 0.0, 0.0});
  std::vector<double> count(n_regions, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int l = label[static_cast<std::size_t>(y) * w + x];
      count[l] += 1.0;
      for (int c = 0; c < 3; ++c) sum[l][c] += imgio::quantize8(src.at(y, x, c)) / 255.0;
    }
  ImageTensor gt(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int l = label[static_cast<std::size_t>(y) * w + x];
      for (int c = 0; c < 3; ++c) gt.at(y, x, c) = sum[l][c] / count[l];
    }
  return {std::move(src), std::move(gt)};
}

ImageTensor degrade(const ImageTensor& gt, const ImageTensor& source, const Severity& sev, std::uint64_t seed) {
  imgio::require_same_shape(gt, source, "degrade");
  if (sev.is_zero()) return gt;
  Rng rng(seed);
  ImageTensor out = gt;
  const int h = out.height(), w = out.width(), ch = out.channels();
  if (sev.contrast > 0.0)
    for (double& v : out.values()) v = 0.5 + (v - 0.5) / (1.0 + sev.contrast);
  if (sev.color_shift > 0.0) {
    std::vector<double> shift(static_cast<std::size_t>(ch));
    for (auto& s : shift) s = sev.color_shift * uniform(rng, -1.0, 1.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < ch; ++c) out.at(y, x, c) = std::clamp(out.at(y, x, c) + shift[c], 0.0, 1.0);
  }
  if (sev.blur_sigma > 0.0) {
    int size = 2 * static_cast<int>(std::ceil(3.0 * sev.blur_sigma)) + 1;
    const int limit = std::min(h, w) % 2 ? std::min(h, w) : std::min(h, w) - 1;
    size = std::min(size, limit);
    out = imgio::convolve_same(out, imgio::gaussian_kernel(size, sev.blur_sigma));
  }
  if (sev.dropout > 0.0) {
    constexpr int kPatch = 16;
    for (int py = 0; py < h; py += kPatch)
      for (int px = 0; px < w; px += kPatch) {
        if (uniform01(rng) >= sev.dropout) continue;
        for (int y = py; y < std::min(h, py + kPatch); ++y)
          for (int x = px; x < std::min(w, px + kPatch); ++x)
            for (int c = 0; c < ch; ++c) out.at(y, x, c) = source.at(y, x, c);
      }
  }
  if (sev.noise_sigma > 0.0)
    for (double& v : out.values()) v += sev.noise_sigma * normal(rng);
  for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

features::TripletManifest generate(const SynthSpec& spec, const fs::path& out_dir) {
  spec.validate();
  const auto models = spec.resolved_models();
  const fs::path root = fs::absolute(out_dir);
  std::error_code ec;
  fs::create_directories(root / "sources", ec);
  fs::create_directories(root / "gt", ec);
  for (const auto& m : models) fs::create_directories(root / "translated" / m.id, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());

  auto sample_id = [](std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%04zu", i);
    return std::string(buf);
  };

  const auto n = static_cast<std::ptrdiff_t>(spec.n_sources);
  std::vector<std::exception_ptr> errors(spec.n_sources);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const std::uint64_t src_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
      const auto sid = sample_id(static_cast<std::size_t>(i));
      const auto imgs = make_source(spec.size, src_seed);
      imgio::encode_png(imgs.source, root / "sources" / (sid + ".png"));
      imgio::encode_png(imgs.ground_truth, root / "gt" / (sid + ".png"));
      for (std::size_t m = 0; m < models.size(); ++m) {
        const auto out = degrade(imgs.ground_truth, imgs.source, models[m].severity, derive_seed(src_seed, m + 1));
        imgio::encode_png(out, root / "translated" / models[m].id / (sid + ".png"));
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  features::TripletManifest manifest;
  for (std::size_t i = 0; i < spec.n_sources; ++i) {
    const auto sid = sample_id(i);
    const fs::path src = root / "sources" / (sid + ".png");
    const fs::path gt = root / "gt" / (sid + ".png");
    for (const auto& m : models)
      manifest.records.push_back({sid, m.id, src, root / "translated" / m.id / (sid + ".png"), gt});
    manifest.records.push_back({sid, kGroundTruthModelId, src, gt, gt});
  }
  features::write_manifest(manifest, root / "manifest.jsonl");
  return manifest;
}

}  // namespace mmf::synthgen
