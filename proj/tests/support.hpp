#pragma once

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "mmf/common/random.hpp"
#include "mmf/imgio/image.hpp"

namespace mmf::test {

inline imgio::ImageTensor noise_image(int h, int w, int c, std::uint64_t seed) {
  Rng rng(seed);
  imgio::ImageTensor img(h, w, c);
  for (double& v : img.values()) v = uniform01(rng);
  return img;
}

// Smooth blobs plus mild noise; closer to natural images than white noise.
inline imgio::ImageTensor textured_image(int h, int w, int c, std::uint64_t seed) {
  Rng rng(seed);
  const double fx = uniform(rng, 0.02, 0.2), fy = uniform(rng, 0.02, 0.2);
  imgio::ImageTensor img(h, w, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        const double v = 0.5 + 0.3 * std::sin(fx * x + ch) * std::cos(fy * y - ch) + 0.05 * normal(rng);
        img.at(y, x, ch) = std::clamp(v, 0.0, 1.0);
      }
  return img;
}

inline imgio::ImageTensor constant_image(int h, int w, int c, double v) { return imgio::ImageTensor(h, w, c, v); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("mmf_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

// Runs the CLI; returns its exit code.
inline int run_cli(const std::string& args) {
  const std::string cmd = std::string(MMF_CLI) + " " + args;
  const int st = std::system(cmd.c_str());
  if (st == -1) return -1;
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace mmf::test
