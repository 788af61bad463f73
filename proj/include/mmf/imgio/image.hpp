#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mmf::imgio {

// Decoded image: height x width x channels reals in [0,1], row-major with
// interleaved channels.
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(int height, int width, int channels, double fill = 0.0);
  ImageTensor(int height, int width, int channels, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int y, int x, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  double at(int y, int x, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const ImageTensor& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  // Single-channel copy of channel c.
  ImageTensor channel(int c) const;

  // Elementwise affine transform v -> v*scale + offset (no clamping).
  ImageTensor scaled(double scale, double offset = 0.0) const;

  bool operator==(const ImageTensor& other) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Rec.601 luma. One-channel input is returned unchanged.
ImageTensor to_grayscale(const ImageTensor& img);

// Replicates a one-channel image into three identical channels.
ImageTensor gray_to_rgb(const ImageTensor& img);

// Elementwise product of two same-shape images.
ImageTensor multiply(const ImageTensor& a, const ImageTensor& b);

// Throws InvalidArgument naming `what` unless a and b have identical shape.
void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what);

}  // namespace mmf::imgio
