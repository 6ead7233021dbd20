#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace spoofbench {

/// 8-bit single-channel raster, row-major, origin top-left, y down.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  bool contains(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x < width_ && y < height_;
  }

  std::span<const std::uint8_t> pixels() const { return data_; }
  std::span<std::uint8_t> pixels() { return data_; }

  double mean() const;

  bool operator==(const GrayImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Quarter turn: pixel (x, y) moves to (height-1-y, x). A direction at
/// angle a (image coordinates) maps to a + pi/2.
GrayImage rotate90(const GrayImage& img);

/// Binary PGM (P5, maxval 255). The canonical, bit-exact on-disk format.
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_png(const std::filesystem::path& path);

/// Dispatch on extension (.pgm or .png).
void write_image(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_image(const std::filesystem::path& path);

}  // namespace spoofbench
