#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mmf/imgio/image.hpp"

namespace mmf::imgio {

// Decodes a PNG or JPEG file (detected by signature). 8-bit samples map to
// v/255, 16-bit to v/65535. Alpha channels are dropped; palette and
// gray+alpha images are expanded.
ImageTensor decode(const std::filesystem::path& path);
ImageTensor decode_memory(std::span<const std::uint8_t> bytes);

// 8-bit PNG, gray or RGB per the tensor's channel count. Values are clamped to
// [0,1] and quantized as round(255*v).
void encode_png(const ImageTensor& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png_memory(const ImageTensor& img);

// Baseline JPEG; only used for fixtures and tests.
void encode_jpeg(const ImageTensor& img, const std::filesystem::path& path, int quality = 95);

std::uint8_t quantize8(double v);

}  // namespace mmf::imgio
