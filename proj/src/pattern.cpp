#include "ieg/pattern.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "ieg/error.hpp"

namespace ieg {

Pattern::Pattern(int width, int height, std::vector<double> pixels, double edge_threshold)
    : width_(width), height_(height), edge_threshold_(edge_threshold),
      intensity_(std::move(pixels)) {
  if (width_ < 2 || height_ < 2) throw InvalidArgument("pattern must be at least 2x2 pixels");
  if (intensity_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
    throw InvalidArgument("pattern intensity size does not match its dimensions");
  if (!(edge_threshold_ > 0.0)) throw InvalidArgument("edge threshold must be positive");

  grad_x_.assign(intensity_.size(), 0.0);
  grad_y_.assign(intensity_.size(), 0.0);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      // Central differences inside, one-sided at the border.
      double gx;
      if (x == 0) {
        gx = intensity(1, y) - intensity(0, y);
      } else if (x == width_ - 1) {
        gx = intensity(x, y) - intensity(x - 1, y);
      } else {
        gx = 0.5 * (intensity(x + 1, y) - intensity(x - 1, y));
      }
      double gy;
      if (y == 0) {
        gy = intensity(x, 1) - intensity(x, 0);
      } else if (y == height_ - 1) {
        gy = intensity(x, y) - intensity(x, y - 1);
      } else {
        gy = 0.5 * (intensity(x, y + 1) - intensity(x, y - 1));
      }
      grad_x_[index(x, y)] = gx;
      grad_y_[index(x, y)] = gy;
      if (std::hypot(gx, gy) >= edge_threshold_) {
        edges_.push_back({static_cast<double>(x), static_cast<double>(y), gx, gy});
      }
    }
  }
}

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Pattern parse_pgm(const std::vector<unsigned char>& bytes, const std::string& name,
                  double edge_threshold) {
  std::size_t pos = 2;
  auto next_token = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    long value = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      ++pos;
      ++digits;
      if (value > 1'000'000) break;
    }
    if (digits == 0) throw IoError(name + ": malformed PGM header at byte " + std::to_string(pos));
    return value;
  };
  const long width = next_token();
  const long height = next_token();
  const long maxval = next_token();
  if (width <= 0 || height <= 0 || width > 65535 || height > 65535)
    throw IoError(name + ": invalid PGM dimensions");
  if (maxval <= 0 || maxval > 255) throw IoError(name + ": only 8-bit PGM is supported");
  ++pos;  // single whitespace after maxval
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < pos + count)
    throw IoError(name + ": truncated PGM pixel data (expected " + std::to_string(count) +
                  " bytes at offset " + std::to_string(pos) + ")");
  std::vector<double> intensity(count);
  for (std::size_t i = 0; i < count; ++i) {
    intensity[i] = static_cast<double>(bytes[pos + i]) / static_cast<double>(maxval);
  }
  return Pattern(static_cast<int>(width), static_cast<int>(height), std::move(intensity),
                 edge_threshold);
}

Pattern parse_png(const std::filesystem::path& path, double edge_threshold) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError(path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw IoError(path.string() + ": " + message);
  }
  std::vector<double> intensity(buffer.size());
  std::transform(buffer.begin(), buffer.end(), intensity.begin(),
                 [](unsigned char v) { return v / 255.0; });
  return Pattern(static_cast<int>(image.width), static_cast<int>(image.height),
                 std::move(intensity), edge_threshold);
}

}  // namespace

Pattern load_pattern(const std::filesystem::path& path, double edge_threshold) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    return parse_pgm(bytes, path.string(), edge_threshold);
  }
  static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, bytes.begin())) {
    return parse_png(path, edge_threshold);
  }
  throw IoError(path.string() + ": not a binary PGM (P5) or PNG image");
}

void write_pgm(const Pattern& pattern, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "P5\n" << pattern.width() << ' ' << pattern.height() << "\n255\n";
  for (double v : pattern.intensity()) {
    out.put(static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Pattern make_marker_pattern(int size) {
  if (size < 16) throw InvalidArgument("marker pattern needs at least 16 pixels");
  std::vector<double> intensity(static_cast<std::size_t>(size) * static_cast<std::size_t>(size),
                                1.0);
  // Scaled from a 64 px layout: ring [8, 56), window [24, 40).
  auto s = [size](int v) { return v * size / 64; };
  auto fill = [&](int x0, int x1, int y0, int y1, double value) {
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        intensity[static_cast<std::size_t>(y) * size + x] = value;
  };
  fill(s(8), s(56), s(8), s(56), 0.0);
  fill(s(24), s(40), s(24), s(40), 1.0);
  return Pattern(size, size, std::move(intensity));
}

}  // namespace ieg
