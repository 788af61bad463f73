#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmf/imgio/image.hpp"

namespace mmf::deepsim {

// One convolution + ReLU stage. Weights are laid out [out][in][ky][kx].
// When `pool` is set, the stage output is 2x2 average-pooled before it feeds
// the next stage (statistics are taken on the unpooled map).
struct ConvStage {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  bool pool = false;
  std::vector<float> weights;
  std::vector<float> bias;
};

// Optional learned per-channel weights (alpha for texture, beta for
// structure), one entry per stage channel including the raw input stage.
struct ChannelWeights {
  std::vector<float> alpha;
  std::vector<float> beta;
};

class FeatureExtractor {
 public:
  std::string provenance;
  int input_channels = 3;
  std::vector<float> input_mean;
  std::vector<float> input_std;
  std::vector<ConvStage> stages;
  std::optional<ChannelWeights> channel_weights;

  // Channels summed over the raw input and every conv stage.
  int total_channels() const;

  // Throws InvalidArgument on any structural problem.
  void validate() const;
};

// A feature map stack in planar layout: data[c * h * w + y * w + x].
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  std::span<const float> plane(int c) const {
    const auto n = static_cast<std::size_t>(height) * width;
    return {data.data() + c * n, n};
  }
};

// Stage 0 is the raw input (un-normalized); stages 1..N are conv outputs.
std::vector<FeatureMap> extract(const FeatureExtractor& fx, const imgio::ImageTensor& img);

// On-disk format: "MMFX", u16 version, u32 header length, UTF-8 JSON header,
// little-endian f32 payload.
FeatureExtractor parse_extractor(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_extractor(const FeatureExtractor& fx);
FeatureExtractor load_extractor(const std::filesystem::path& path);
void save_extractor(const FeatureExtractor& fx, const std::filesystem::path& path);

// The bundled reference extractor: 3 stages (8, 16, 32 channels, 3x3 kernels),
// orthogonal rows drawn from seed 42, zero bias. Bit-identical to
// data/tiny-v1.mmfx.
FeatureExtractor make_tiny_v1();

inline constexpr std::uint16_t kExtractorVersion = 1;

}  // namespace mmf::deepsim
