#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ddasr {

/// Row-major single-channel float image.
class Image {
 public:
  Image() = default;
  Image(int rows, int cols, float fill = 0.0f);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  float& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  float operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool operator==(const Image&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<float> data_;
};

/// 4D luminance light field in sub-aperture layout, indexed (u, v, h, w):
/// u = angular row, v = angular column, h/w = spatial row/column.
/// Storage is row-major in that order, so each view is a contiguous H*W run.
class LightField {
 public:
  LightField() = default;
  LightField(int U, int V, int H, int W, float fill = 0.0f);

  int U() const { return U_; }
  int V() const { return V_; }
  int H() const { return H_; }
  int W() const { return W_; }
  bool square() const { return U_ == V_; }
  std::size_t size() const { return data_.size(); }

  float& operator()(int u, int v, int h, int w) { return data_[offset(u, v, h, w)]; }
  float operator()(int u, int v, int h, int w) const { return data_[offset(u, v, h, w)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  std::span<float> view(int u, int v);
  std::span<const float> view(int u, int v) const;
  Image view_image(int u, int v) const;
  void set_view(int u, int v, const Image& img);

  /// True when every sample lies in [0, 1].
  bool in_unit_range() const;

  bool operator==(const LightField&) const = default;

 private:
  std::size_t offset(int u, int v, int h, int w) const {
    return ((static_cast<std::size_t>(u) * V_ + v) * H_ + h) * W_ + w;
  }

  int U_ = 0;
  int V_ = 0;
  int H_ = 0;
  int W_ = 0;
  std::vector<float> data_;
};

/// Macro-pixel image: an (A*H) x (A*W) interleaving of an A x A light field.
/// Pixel (h*A + u, w*A + v) carries view (u, v) at spatial position (h, w).
class MacPI {
 public:
  MacPI() = default;
  MacPI(int A, Image pixels);

  int A() const { return A_; }
  int H() const { return pixels_.rows() / A_; }
  int W() const { return pixels_.cols() / A_; }
  const Image& pixels() const { return pixels_; }
  Image& pixels() { return pixels_; }

  float operator()(int r, int c) const { return pixels_(r, c); }

  bool operator==(const MacPI&) const = default;

 private:
  int A_ = 1;
  Image pixels_;
};

enum class EpiOrientation { kHorizontal, kVertical };

/// Epipolar-plane image. A horizontal strip is (V x W) taken at fixed (u, h);
/// a vertical strip is (U x H) taken at fixed (v, w).
struct Epi {
  Image strip;
  EpiOrientation orientation = EpiOrientation::kHorizontal;
  int fixed_angular = 0;
  int fixed_spatial = 0;
};

MacPI macpi_from_sai(const LightField& lf);
LightField sai_from_macpi(const MacPI& m);

Epi extract_epi(const LightField& lf, EpiOrientation orientation, int fixed_angular,
                int fixed_spatial);

/// n evenly spaced indices over [0, size-1], both endpoints included.
std::vector<int> evenly_spaced_indices(int size, int n);

/// The n x n views at evenly spaced angular positions; for n = 2 these are
/// the four corners.
LightField sparse_sample_corners(const LightField& lf, int n);

/// Central target x target angular block; the offset is floor((U - target)/2).
LightField center_crop_angular(const LightField& lf, int target);

/// Views [u0, u0+rows) x [v0, v0+cols) of the angular grid.
LightField angular_window(const LightField& lf, int u0, int v0, int rows, int cols);

/// Spatial crop [h0, h0+height) x [w0, w0+width) applied to every view.
LightField spatial_crop(const LightField& lf, int h0, int w0, int height, int width);

}  // namespace ddasr
