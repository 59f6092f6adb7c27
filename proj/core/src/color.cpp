#include "ddasr/color.hpp"

#include <algorithm>
#include <string>

#include "ddasr/errors.hpp"

namespace ddasr {

namespace {

template <typename T>
Image luma(std::span<const T> px, int rows, int cols, int channels, float scale) {
  if (channels != 3) {
    throw ShapeError("rgb_to_y: expected 3 channels, got " + std::to_string(channels));
  }
  if (rows < 0 || cols < 0 ||
      px.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 3) {
    throw ShapeError("rgb_to_y: buffer of " + std::to_string(px.size()) +
                     " samples does not match " + std::to_string(rows) + "x" +
                     std::to_string(cols) + "x3");
  }
  Image y(rows, cols);
  auto out = y.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = px[3 * i] * scale;
    const double g = px[3 * i + 1] * scale;
    const double b = px[3 * i + 2] * scale;
    out[i] = static_cast<float>(std::clamp(kLumaR * r + kLumaG * g + kLumaB * b, 0.0, 1.0));
  }
  return y;
}

}  // namespace

Image rgb_to_y(std::span<const float> interleaved, int rows, int cols, int channels) {
  return luma(interleaved, rows, cols, channels, 1.0f);
}

Image rgb_to_y(std::span<const std::uint8_t> interleaved, int rows, int cols, int channels) {
  return luma(interleaved, rows, cols, channels, 1.0f / 255.0f);
}

YCbCr to_ycbcr(Rgb c) {
  const double y = kLumaR * c.r + kLumaG * c.g + kLumaB * c.b;
  return {static_cast<float>(y), static_cast<float>(0.5 + (c.b - y) / 1.772),
          static_cast<float>(0.5 + (c.r - y) / 1.402)};
}

Rgb to_rgb(YCbCr c) {
  const double cb = c.cb - 0.5;
  const double cr = c.cr - 0.5;
  const double r = c.y + 1.402 * cr;
  const double b = c.y + 1.772 * cb;
  const double g = (c.y - kLumaR * r - kLumaB * b) / kLumaG;
  return {static_cast<float>(r), static_cast<float>(g), static_cast<float>(b)};
}

}  // namespace ddasr
