#include "ddasr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "ddasr/errors.hpp"

namespace ddasr {

namespace {

int wrap(long long i, int n) {
  const long long m = i % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

}  // namespace

Texture::Texture(Image grid) : grid_(std::move(grid)) {
  if (grid_.rows() < 1 || grid_.cols() < 1) {
    throw ShapeError("Texture: empty grid");
  }
}

Texture Texture::value_noise(int rows, int cols, std::uint64_t seed, int cell) {
  if (cell < 1) {
    throw std::invalid_argument("Texture::value_noise: cell must be positive");
  }
  const int lr = std::max(1, rows / cell);
  const int lc = std::max(1, cols / cell);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  Image lattice(lr, lc);
  for (float& x : lattice.data()) {
    x = uni(rng);
  }
  const Texture coarse(std::move(lattice));
  Image grid(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      grid(r, c) = coarse.sample(static_cast<double>(r) * lr / rows,
                                 static_cast<double>(c) * lc / cols);
    }
  }
  return Texture(std::move(grid));
}

Texture Texture::white_noise(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  Image grid(rows, cols);
  for (float& x : grid.data()) {
    x = uni(rng);
  }
  return Texture(std::move(grid));
}

Texture Texture::vertical_edge(int rows, int cols, int edge_col) {
  Image grid(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      grid(r, c) = c < edge_col ? 0.0f : 1.0f;
    }
  }
  return Texture(std::move(grid));
}

Texture Texture::column_bump(int rows, int cols, double center_col, double half_width) {
  Image grid(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double x = (c - center_col) / half_width;
      grid(r, c) = std::abs(x) < 1.0
                       ? static_cast<float>(0.5 * (1.0 + std::cos(std::numbers::pi * x)))
                       : 0.0f;
    }
  }
  return Texture(std::move(grid));
}

float Texture::sample(double row, double col) const {
  const double fr = std::floor(row);
  const double fc = std::floor(col);
  const double tr = row - fr;
  const double tc = col - fc;
  const long long r0 = static_cast<long long>(fr);
  const long long c0 = static_cast<long long>(fc);
  const int ra = wrap(r0, rows());
  const int ca = wrap(c0, cols());
  if (tr == 0.0 && tc == 0.0) {
    return grid_(ra, ca);
  }
  const int rb = wrap(r0 + 1, rows());
  const int cb = wrap(c0 + 1, cols());
  const double top = (1.0 - tc) * grid_(ra, ca) + tc * grid_(ra, cb);
  const double bottom = (1.0 - tc) * grid_(rb, ca) + tc * grid_(rb, cb);
  return static_cast<float>((1.0 - tr) * top + tr * bottom);
}

LightField generate_constant_disparity_lf(const SyntheticSceneSpec& spec) {
  if (spec.A < 1 || spec.H < 1 || spec.W < 1) {
    throw ShapeError("generate_constant_disparity_lf: sizes must be positive");
  }
  const double center = (spec.A - 1) / 2.0;
  LightField lf(spec.A, spec.A, spec.H, spec.W);
  for (int u = 0; u < spec.A; ++u) {
    for (int v = 0; v < spec.A; ++v) {
      const double dh = spec.disparity * (u - center);
      const double dw = spec.disparity * (v - center);
      for (int h = 0; h < spec.H; ++h) {
        for (int w = 0; w < spec.W; ++w) {
          lf(u, v, h, w) = spec.texture.sample(h + dh, w + dw);
        }
      }
    }
  }
  return lf;
}

}  // namespace ddasr
