#include "mmf/imgio/image.hpp"

#include <string>

#include "mmf/common/error.hpp"

namespace mmf::imgio {

ImageTensor::ImageTensor(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 1)
    throw InvalidArgument("ImageTensor: invalid dimensions");
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

ImageTensor::ImageTensor(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height < 0 || width < 0 || channels < 1)
    throw InvalidArgument("ImageTensor: invalid dimensions");
  if (data_.size() != static_cast<std::size_t>(height) * width * channels)
    throw InvalidArgument("ImageTensor: data size does not match dimensions");
}

ImageTensor ImageTensor::channel(int c) const {
  if (c < 0 || c >= channels_) throw InvalidArgument("ImageTensor::channel: index out of range");
  ImageTensor out(height_, width_, 1);
  auto dst = out.values();
  for (std::size_t i = 0; i < pixel_count(); ++i) dst[i] = data_[i * channels_ + c];
  return out;
}

ImageTensor ImageTensor::scaled(double scale, double offset) const {
  ImageTensor out = *this;
  for (double& v : out.data_) v = v * scale + offset;
  return out;
}

ImageTensor to_grayscale(const ImageTensor& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3) throw InvalidArgument("to_grayscale: expected 1 or 3 channels");
  ImageTensor out(img.height(), img.width(), 1);
  auto src = img.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < img.pixel_count(); ++i)
    dst[i] = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
  return out;
}

ImageTensor gray_to_rgb(const ImageTensor& img) {
  if (img.channels() == 3) return img;
  if (img.channels() != 1) throw InvalidArgument("gray_to_rgb: expected 1 or 3 channels");
  ImageTensor out(img.height(), img.width(), 3);
  auto src = img.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < img.pixel_count(); ++i)
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  return out;
}

ImageTensor multiply(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "multiply");
  ImageTensor out = a;
  auto dst = out.values();
  auto rhs = b.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= rhs[i];
  return out;
}

void require_same_shape(const ImageTensor& a, const ImageTensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": shape mismatch (" + std::to_string(a.height()) +
                          "x" + std::to_string(a.width()) + "x" + std::to_string(a.channels()) +
                          " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()) +
                          "x" + std::to_string(b.channels()) + ")");
  }
}

}  // namespace mmf::imgio
