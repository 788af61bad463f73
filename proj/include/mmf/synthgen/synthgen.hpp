#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmf/features/manifest.hpp"
#include "mmf/imgio/image.hpp"

namespace mmf::synthgen {

struct Severity {
  double blur_sigma = 0.0;   // gaussian blur, pixels
  double noise_sigma = 0.0;  // additive gaussian noise, unit scale
  double color_shift = 0.0;  // max per-channel offset
  double contrast = 0.0;     // v -> 0.5 + (v - 0.5) / (1 + contrast)
  double dropout = 0.0;      // fraction of 16x16 patches left untranslated

  bool is_zero() const;
  bool operator==(const Severity&) const = default;
};

struct SynthModel {
  std::string id;
  Severity severity;
};

// Model 0 is the perfect (all-zero) model; the rest ramp from mild to the
// strongest setting, each emphasising one distortion family.
std::vector<SynthModel> default_models(std::size_t n_models);

// The id used for the per-source record whose translated image is the ground
// truth file itself.
inline constexpr const char* kGroundTruthModelId = "gt";

struct SynthSpec {
  std::size_t n_sources = 120;
  std::size_t n_models = 8;
  std::uint64_t seed = 42;
  int size = 256;
  std::vector<SynthModel> models;  // empty: default_models(n_models)

  std::vector<SynthModel> resolved_models() const;
  void validate() const;
};

struct SourceImages {
  imgio::ImageTensor source;
  imgio::ImageTensor ground_truth;  // per-region mean colour of the source
};

// Coloured shapes with texture and shading on a gradient background.
SourceImages make_source(int size, std::uint64_t seed);

// Applies contrast, colour shift, blur, patch dropout (patches revert to the
// source) and noise, in that order. Zero severity returns `gt` unchanged.
imgio::ImageTensor degrade(const imgio::ImageTensor& gt, const imgio::ImageTensor& source, const Severity& sev,
                           std::uint64_t seed);

// Writes sources/, gt/, translated/<model>/ PNGs and manifest.jsonl under
// out_dir; returns the manifest (absolute paths).
features::TripletManifest generate(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace mmf::synthgen
