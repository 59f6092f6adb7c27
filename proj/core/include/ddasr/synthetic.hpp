#pragma once

#include <cstdint>

#include "ddasr/light_field.hpp"

namespace ddasr {

/// A periodic texture defined by a grid of samples. Integer coordinates hit
/// the grid exactly; fractional coordinates are bilinearly interpolated, and
/// every coordinate wraps toroidally, so the texture is defined everywhere.
class Texture {
 public:
  explicit Texture(Image grid);

  /// Smooth value noise in [0, 1]: a coarse random lattice, bilinearly
  /// upsampled to the period. cell controls the feature size in pixels.
  static Texture value_noise(int rows, int cols, std::uint64_t seed, int cell = 4);
  /// Independent uniform samples per grid point.
  static Texture white_noise(int rows, int cols, std::uint64_t seed);
  /// 0 for columns < edge_col, 1 from edge_col onward (per period).
  static Texture vertical_edge(int rows, int cols, int edge_col);
  /// Raised-cosine ridge along rows centered at center_col, nonzero over
  /// |col - center_col| < half_width.
  static Texture column_bump(int rows, int cols, double center_col, double half_width);

  int rows() const { return grid_.rows(); }
  int cols() const { return grid_.cols(); }
  const Image& grid() const { return grid_; }

  float sample(double row, double col) const;

 private:
  Image grid_;
};

struct SyntheticSceneSpec {
  Texture texture;
  double disparity = 0.0;  ///< pixels of shift per angular step
  int A = 3;
  int H = 16;
  int W = 16;
};

/// lf[u, v, h, w] = texture(h + d*(u - uc), w + d*(v - vc)) with the
/// center view (uc, vc) = ((A-1)/2, (A-1)/2). A scene point seen at (h0, w0)
/// in the center view appears at (h0 + d*(uc-u), w0 + d*(vc-v)) in view (u, v).
LightField generate_constant_disparity_lf(const SyntheticSceneSpec& spec);

}  // namespace ddasr
