#pragma once

#include <cstdint>
#include <span>

#include "ddasr/light_field.hpp"

namespace ddasr {

/// BT.601 full-range luma coefficients.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// Y = 0.299 R + 0.587 G + 0.114 B from interleaved unit-range samples.
/// Throws ShapeError unless channels == 3 and the span holds rows*cols*3 values.
Image rgb_to_y(std::span<const float> interleaved, int rows, int cols, int channels);
Image rgb_to_y(std::span<const std::uint8_t> interleaved, int rows, int cols, int channels);

struct YCbCr {
  float y, cb, cr;
};
struct Rgb {
  float r, g, b;
};

/// Full-range (JPEG) BT.601 conversion with chroma centered at 0.5.
YCbCr to_ycbcr(Rgb c);
Rgb to_rgb(YCbCr c);

}  // namespace ddasr
