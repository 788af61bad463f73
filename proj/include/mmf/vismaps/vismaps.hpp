#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mmf/imgio/image.hpp"

namespace mmf::vismaps {

// Local TV ratio regularizer.
inline constexpr double kLocalTvEps = 1e-4;

// H x W x 1 values in [0,1]; 0 = no error.
struct ErrorMap {
  imgio::ImageTensor values;
  std::string metric;
  std::string pair_id;
};

// clamp(1 - SSIM index, 0, 1) on luma.
ErrorMap ssim_map(const imgio::ImageTensor& a, const imgio::ImageTensor& b);
// Channel mean of |a - b|.
ErrorMap mae_map(const imgio::ImageTensor& a, const imgio::ImageTensor& b);
// clamp(1 - (g_b + eps) / (g_a + eps), 0, 1) with g the channel-summed
// forward-difference gradient magnitude; marks areas where b is smoother.
ErrorMap tv_ratio_map(const imgio::ImageTensor& a, const imgio::ImageTensor& b);

const std::vector<std::string>& map_names();
ErrorMap compute_map(std::string_view metric, const imgio::ImageTensor& a, const imgio::ImageTensor& b);

// 8-bit grayscale PNG, pixel = round(255 * (1 - error)): darker = more error.
void write_map(const ErrorMap& map, const std::filesystem::path& path);

}  // namespace mmf::vismaps
