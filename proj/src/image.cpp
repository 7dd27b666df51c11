#include "marisim/image.hpp"

#include "marisim/common.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace marisim {

namespace {

constexpr char kDepthMagic[8] = {'M', 'S', 'D', 'E', 'P', 'T', 'H', '1'};

std::uint8_t toByte(float v) {
  if (!(v > 0.0f)) return 0;
  if (v >= 1.0f) return 255;
  return static_cast<std::uint8_t>(std::lround(v * 255.0f));
}

void appendU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t loadU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<std::uint8_t> readAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

std::vector<std::uint8_t> encodePng(const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) throw ContractViolation("encodePng: expects 1 or 3 channels");
  std::vector<std::uint8_t> pixels(image.data().size());
  std::transform(image.data().begin(), image.data().end(), pixels.begin(), toByte);

  png_image desc{};
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(image.width());
  desc.height = static_cast<png_uint_32>(image.height());
  desc.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&desc, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encoding failed: ") + desc.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&desc, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encoding failed: ") + desc.message);
  }
  out.resize(size);
  return out;
}

void writeBytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void writePng(const std::filesystem::path& path, const Image& image) { writeBytes(path, encodePng(image)); }

Image decodePng(std::span<const std::uint8_t> bytes) {
  png_image desc{};
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size())) {
    throw LoadError(std::string("not a readable PNG image: ") + desc.message);
  }
  desc.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(desc));
  if (!png_image_finish_read(&desc, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&desc);
    throw LoadError(std::string("corrupt PNG image: ") + desc.message);
  }
  Image image(static_cast<int>(desc.width), static_cast<int>(desc.height), 3);
  std::transform(pixels.begin(), pixels.end(), image.data().begin(), [](std::uint8_t v) { return v / 255.0f; });
  return image;
}

Image readPng(const std::filesystem::path& path) {
  const auto bytes = readAll(path);
  try {
    return decodePng(bytes);
  } catch (const LoadError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void writeDepthRaw(const std::filesystem::path& path, const Image& depth) {
  if (depth.channels() != 1) throw ContractViolation("writeDepthRaw: expects a single-channel image");
  std::vector<std::uint8_t> out(kDepthMagic, kDepthMagic + 8);
  appendU32(out, static_cast<std::uint32_t>(depth.width()));
  appendU32(out, static_cast<std::uint32_t>(depth.height()));
  out.reserve(out.size() + depth.data().size() * 4);
  for (float v : depth.data()) appendU32(out, std::bit_cast<std::uint32_t>(v));
  writeBytes(path, out);
}

Image readDepthRaw(const std::filesystem::path& path) {
  const auto bytes = readAll(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kDepthMagic, 8) != 0) {
    throw LoadError(path.string() + ": not a raw depth file");
  }
  const auto width = static_cast<int>(loadU32(bytes.data() + 8));
  const auto height = static_cast<int>(loadU32(bytes.data() + 12));
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() != 16 + 4 * count) throw LoadError(path.string() + ": depth payload size mismatch");
  Image depth(width, height, 1);
  auto data = depth.data();
  for (std::size_t i = 0; i < count; ++i) data[i] = std::bit_cast<float>(loadU32(bytes.data() + 16 + 4 * i));
  return depth;
}

std::uint64_t imageHash(const Image& image) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  feed(static_cast<std::uint32_t>(image.width()));
  feed(static_cast<std::uint32_t>(image.height()));
  feed(static_cast<std::uint32_t>(image.channels()));
  for (float v : image.data()) feed(std::bit_cast<std::uint32_t>(v));
  return h;
}

} // namespace marisim
