#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace marisim {

// Row-major, interleaved 32-bit float image.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f)
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<std::size_t>(width) * height * channels, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  float& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  float at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool sameShape(const Image& o) const { return width_ == o.width_ && height_ == o.height_; }
  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// 8-bit PNG encode/decode. Values are clamped to [0,1] and rounded.
// Images with 1 channel become grayscale PNGs, 3 channels RGB.
std::vector<std::uint8_t> encodePng(const Image& image);
void writePng(const std::filesystem::path& path, const Image& image);
Image readPng(const std::filesystem::path& path);
Image decodePng(std::span<const std::uint8_t> bytes);

// Raw float depth: 8-byte magic "MSDEPTH1", uint32 width, uint32 height
// (little endian), then width*height little-endian float32 values, row-major.
void writeDepthRaw(const std::filesystem::path& path, const Image& depth);
Image readDepthRaw(const std::filesystem::path& path);

// FNV-1a over the raw float bytes plus shape.
std::uint64_t imageHash(const Image& image);

void writeBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace marisim
