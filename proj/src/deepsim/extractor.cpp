#include "mmf/deepsim/extractor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "mmf/common/error.hpp"
#include "mmf/common/random.hpp"

namespace mmf::deepsim {
namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'M', 'M', 'F', 'X'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[offset + i]) << (8 * i);
  return value;
}

std::size_t stage_float_count(const ConvStage& s) {
  return static_cast<std::size_t>(s.out_channels) * s.in_channels * s.kernel * s.kernel +
         static_cast<std::size_t>(s.out_channels);
}

// Replicate-padded copy of one plane, (h+2r) x (w+2r).
void pad_plane(const float* src, int h, int w, int r, std::vector<float>& out) {
  const int pw = w + 2 * r;
  out.resize(static_cast<std::size_t>(h + 2 * r) * pw);
  for (int y = 0; y < h + 2 * r; ++y) {
    const float* row = src + static_cast<std::size_t>(std::clamp(y - r, 0, h - 1)) * w;
    float* dst = out.data() + static_cast<std::size_t>(y) * pw;
    for (int x = 0; x < pw; ++x) dst[x] = row[std::clamp(x - r, 0, w - 1)];
  }
}

FeatureMap run_stage(const ConvStage& s, const FeatureMap& in) {
  const int h = in.height;
  const int w = in.width;
  const int r = s.kernel / 2;
  const int pw = w + 2 * r;
  std::vector<std::vector<float>> padded(in.channels);
  for (int c = 0; c < in.channels; ++c)
    pad_plane(in.data.data() + static_cast<std::size_t>(c) * h * w, h, w, r, padded[c]);

  FeatureMap out{s.out_channels, h, w, std::vector<float>(static_cast<std::size_t>(s.out_channels) * h * w)};
  const int kk = s.kernel * s.kernel;
#pragma omp parallel for schedule(static)
  for (int o = 0; o < s.out_channels; ++o) {
    float* dst = out.data.data() + static_cast<std::size_t>(o) * h * w;
    std::fill(dst, dst + static_cast<std::size_t>(h) * w, s.bias[o]);
    for (int c = 0; c < s.in_channels; ++c) {
      const float* wt = s.weights.data() + (static_cast<std::size_t>(o) * s.in_channels + c) * kk;
      const float* src = padded[c].data();
      for (int ky = 0; ky < s.kernel; ++ky)
        for (int kx = 0; kx < s.kernel; ++kx) {
          const float t = wt[ky * s.kernel + kx];
          for (int y = 0; y < h; ++y) {
            const float* row = src + static_cast<std::size_t>(y + ky) * pw + kx;
            float* orow = dst + static_cast<std::size_t>(y) * w;
            for (int x = 0; x < w; ++x) orow[x] += t * row[x];
          }
        }
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i) dst[i] = std::max(dst[i], 0.0f);
  }
  return out;
}

FeatureMap pool2(const FeatureMap& in) {
  const int h = in.height / 2;
  const int w = in.width / 2;
  FeatureMap out{in.channels, h, w, std::vector<float>(static_cast<std::size_t>(in.channels) * h * w)};
  for (int c = 0; c < in.channels; ++c) {
    const float* src = in.data.data() + static_cast<std::size_t>(c) * in.height * in.width;
    float* dst = out.data.data() + static_cast<std::size_t>(c) * h * w;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const float* p = src + static_cast<std::size_t>(2 * y) * in.width + 2 * x;
        dst[static_cast<std::size_t>(y) * w + x] = 0.25f * (p[0] + p[1] + p[in.width] + p[in.width + 1]);
      }
  }
  return out;
}

std::vector<float> orthogonal_rows(int rows, int cols, Rng& rng) {
  std::vector<double> m(static_cast<std::size_t>(rows) * cols);
  for (double& v : m) v = normal(rng);
  // Modified Gram-Schmidt; rows <= cols for every tiny-v1 stage.
  for (int i = 0; i < rows; ++i) {
    double* ri = m.data() + static_cast<std::size_t>(i) * cols;
    for (int j = 0; j < i; ++j) {
      const double* rj = m.data() + static_cast<std::size_t>(j) * cols;
      double dot = 0.0;
      for (int k = 0; k < cols; ++k) dot += ri[k] * rj[k];
      for (int k = 0; k < cols; ++k) ri[k] -= dot * rj[k];
    }
    double norm = 0.0;
    for (int k = 0; k < cols; ++k) norm += ri[k] * ri[k];
    norm = std::sqrt(norm);
    for (int k = 0; k < cols; ++k) ri[k] /= norm;
  }
  return {m.begin(), m.end()};
}

}  // namespace

int FeatureExtractor::total_channels() const {
  int total = input_channels;
  for (const auto& s : stages) total += s.out_channels;
  return total;
}

void FeatureExtractor::validate() const {
  if (stages.size() < 2) throw InvalidArgument("extractor: at least 2 stages required");
  if (input_channels < 1) throw InvalidArgument("extractor: input_channels must be positive");
  if (input_mean.size() != static_cast<std::size_t>(input_channels) ||
      input_std.size() != static_cast<std::size_t>(input_channels))
    throw InvalidArgument("extractor: normalization size does not match input_channels");
  for (float s : input_std)
    if (!(s > 0.0f) || !std::isfinite(s)) throw InvalidArgument("extractor: normalization std must be positive");
  int prev = input_channels;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    if (s.in_channels != prev)
      throw InvalidArgument("extractor: stage " + std::to_string(i) + " input channels do not chain");
    if (s.out_channels < 1 || s.kernel < 1 || s.kernel % 2 == 0)
      throw InvalidArgument("extractor: stage " + std::to_string(i) + " has an invalid shape");
    if (s.weights.size() + s.bias.size() != stage_float_count(s))
      throw InvalidArgument("extractor: stage " + std::to_string(i) + " tensor size mismatch");
    for (float v : s.weights)
      if (!std::isfinite(v)) throw InvalidArgument("extractor: non-finite weight");
    for (float v : s.bias)
      if (!std::isfinite(v)) throw InvalidArgument("extractor: non-finite bias");
    prev = s.out_channels;
  }
  if (channel_weights) {
    const auto n = static_cast<std::size_t>(total_channels());
    if (channel_weights->alpha.size() != n || channel_weights->beta.size() != n)
      throw InvalidArgument("extractor: channel weight block size mismatch");
  }
}

std::vector<FeatureMap> extract(const FeatureExtractor& fx, const imgio::ImageTensor& img) {
  if (img.channels() != fx.input_channels) {
    throw InvalidArgument("extractor '" + fx.provenance + "' expects " +
                          std::to_string(fx.input_channels) + " channels, image has " +
                          std::to_string(img.channels()));
  }
  const int h = img.height();
  const int w = img.width();
  const std::size_t n = static_cast<std::size_t>(h) * w;
  FeatureMap raw{img.channels(), h, w, std::vector<float>(n * img.channels())};
  FeatureMap normalized = raw;
  auto src = img.values();
  for (int c = 0; c < img.channels(); ++c)
    for (std::size_t i = 0; i < n; ++i) {
      const double v = src[i * img.channels() + c];
      raw.data[c * n + i] = static_cast<float>(v);
      normalized.data[c * n + i] = static_cast<float>((v - fx.input_mean[c]) / fx.input_std[c]);
    }

  std::vector<FeatureMap> maps;
  maps.reserve(fx.stages.size() + 1);
  maps.push_back(std::move(raw));
  FeatureMap current = std::move(normalized);
  for (const auto& stage : fx.stages) {
    FeatureMap out = run_stage(stage, current);
    if (stage.pool && out.height >= 2 && out.width >= 2)
      current = pool2(out);
    else
      current = out;
    maps.push_back(std::move(out));
  }
  return maps;
}

FeatureExtractor parse_extractor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw InvalidArgument("extractor: bad magic (expected MMFX)");
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kExtractorVersion)
    throw InvalidArgument("extractor: unsupported version " + std::to_string(version));
  const auto header_len = get_le<std::uint32_t>(bytes, 6);
  if (10 + static_cast<std::size_t>(header_len) > bytes.size())
    throw InvalidArgument("extractor: header length exceeds file size");

  json header;
  try {
    header = json::parse(bytes.begin() + 10, bytes.begin() + 10 + header_len);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("extractor: malformed header: ") + e.what());
  }

  FeatureExtractor fx;
  std::size_t declared = 0;
  try {
    fx.provenance = header.at("provenance").get<std::string>();
    fx.input_channels = header.at("input_channels").get<int>();
    fx.input_mean = header.at("normalization").at("mean").get<std::vector<float>>();
    fx.input_std = header.at("normalization").at("std").get<std::vector<float>>();
    for (const auto& s : header.at("stages")) {
      ConvStage stage;
      stage.in_channels = s.at("in_channels").get<int>();
      stage.out_channels = s.at("out_channels").get<int>();
      stage.kernel = s.at("kernel").get<int>();
      stage.pool = s.value("pool", false);
      fx.stages.push_back(std::move(stage));
    }
    declared = header.at("payload_floats").get<std::size_t>();
    if (header.value("channel_weights", false)) fx.channel_weights.emplace();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("extractor: malformed header: ") + e.what());
  }

  const std::size_t payload_bytes = bytes.size() - 10 - header_len;
  if (payload_bytes != declared * 4) {
    throw InvalidArgument("extractor: header declares " + std::to_string(declared) +
                          " floats but payload holds " + std::to_string(payload_bytes / 4) +
                          (payload_bytes % 4 ? " (plus trailing bytes)" : ""));
  }
  std::size_t expected = 0;
  for (const auto& s : fx.stages) expected += stage_float_count(s);
  if (fx.channel_weights) expected += 2 * static_cast<std::size_t>(fx.total_channels());
  if (expected != declared) {
    throw InvalidArgument("extractor: stage shapes imply " + std::to_string(expected) +
                          " floats, header declares " + std::to_string(declared));
  }

  std::size_t offset = 10 + header_len;
  auto next_float = [&]() {
    const float v = std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset));
    offset += 4;
    return v;
  };
  for (auto& s : fx.stages) {
    s.weights.resize(static_cast<std::size_t>(s.out_channels) * s.in_channels * s.kernel * s.kernel);
    for (float& v : s.weights) v = next_float();
    s.bias.resize(s.out_channels);
    for (float& v : s.bias) v = next_float();
  }
  if (fx.channel_weights) {
    const auto n = static_cast<std::size_t>(fx.total_channels());
    fx.channel_weights->alpha.resize(n);
    fx.channel_weights->beta.resize(n);
    for (float& v : fx.channel_weights->alpha) v = next_float();
    for (float& v : fx.channel_weights->beta) v = next_float();
  }
  fx.validate();
  return fx;
}

std::vector<std::uint8_t> serialize_extractor(const FeatureExtractor& fx) {
  fx.validate();
  json header;
  header["format"] = "mmfx";
  header["provenance"] = fx.provenance;
  header["input_channels"] = fx.input_channels;
  header["normalization"] = {{"mean", fx.input_mean}, {"std", fx.input_std}};
  header["stages"] = json::array();
  std::size_t floats = 0;
  for (const auto& s : fx.stages) {
    header["stages"].push_back({{"in_channels", s.in_channels},
                                {"out_channels", s.out_channels},
                                {"kernel", s.kernel},
                                {"pool", s.pool}});
    floats += stage_float_count(s);
  }
  if (fx.channel_weights) {
    header["channel_weights"] = true;
    floats += 2 * static_cast<std::size_t>(fx.total_channels());
  }
  header["payload_floats"] = floats;
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_le<std::uint16_t>(out, kExtractorVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  auto put_float = [&](float v) { put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v)); };
  for (const auto& s : fx.stages) {
    for (float v : s.weights) put_float(v);
    for (float v : s.bias) put_float(v);
  }
  if (fx.channel_weights) {
    for (float v : fx.channel_weights->alpha) put_float(v);
    for (float v : fx.channel_weights->beta) put_float(v);
  }
  return out;
}

FeatureExtractor load_extractor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open extractor file: " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return parse_extractor(bytes);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void save_extractor(const FeatureExtractor& fx, const std::filesystem::path& path) {
  const auto bytes = serialize_extractor(fx);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

FeatureExtractor make_tiny_v1() {
  FeatureExtractor fx;
  fx.provenance = "tiny-v1";
  fx.input_channels = 3;
  fx.input_mean = {0.485f, 0.456f, 0.406f};
  fx.input_std = {0.229f, 0.224f, 0.225f};
  Rng rng(42);
  const int widths[] = {3, 8, 16, 32};
  for (int i = 0; i < 3; ++i) {
    ConvStage s;
    s.in_channels = widths[i];
    s.out_channels = widths[i + 1];
    s.kernel = 3;
    s.pool = i < 2;
    s.weights = orthogonal_rows(s.out_channels, s.in_channels * 9, rng);
    s.bias.assign(s.out_channels, 0.0f);
    fx.stages.push_back(std::move(s));
  }
  return fx;
}

}  // namespace mmf::deepsim
