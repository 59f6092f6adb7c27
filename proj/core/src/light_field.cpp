#include "ddasr/light_field.hpp"

#include <algorithm>
#include <string>

#include "ddasr/errors.hpp"

namespace ddasr {

namespace {

std::string dims(const LightField& lf) {
  return std::to_string(lf.U()) + "x" + std::to_string(lf.V()) + "x" + std::to_string(lf.H()) +
         "x" + std::to_string(lf.W());
}

}  // namespace

Image::Image(int rows, int cols, float fill) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    throw ShapeError("Image: negative dimension");
  }
  data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

LightField::LightField(int U, int V, int H, int W, float fill) : U_(U), V_(V), H_(H), W_(W) {
  if (U < 1 || V < 1 || H < 1 || W < 1) {
    throw ShapeError("LightField: all of U, V, H, W must be positive, got " +
                     std::to_string(U) + "x" + std::to_string(V) + "x" + std::to_string(H) +
                     "x" + std::to_string(W));
  }
  data_.assign(static_cast<std::size_t>(U) * V * H * W, fill);
}

std::span<float> LightField::view(int u, int v) {
  const std::size_t n = static_cast<std::size_t>(H_) * W_;
  return std::span<float>(data_).subspan(offset(u, v, 0, 0), n);
}

std::span<const float> LightField::view(int u, int v) const {
  const std::size_t n = static_cast<std::size_t>(H_) * W_;
  return std::span<const float>(data_).subspan(offset(u, v, 0, 0), n);
}

Image LightField::view_image(int u, int v) const {
  Image img(H_, W_);
  std::ranges::copy(view(u, v), img.data().begin());
  return img;
}

void LightField::set_view(int u, int v, const Image& img) {
  if (img.rows() != H_ || img.cols() != W_) {
    throw ShapeError("LightField::set_view: image is " + std::to_string(img.rows()) + "x" +
                     std::to_string(img.cols()) + ", expected " + std::to_string(H_) + "x" +
                     std::to_string(W_));
  }
  std::ranges::copy(img.data(), view(u, v).begin());
}

bool LightField::in_unit_range() const {
  return std::ranges::all_of(data_, [](float x) { return x >= 0.0f && x <= 1.0f; });
}

MacPI::MacPI(int A, Image pixels) : A_(A), pixels_(std::move(pixels)) {
  if (A < 1) {
    throw ShapeError("MacPI: angular size must be positive");
  }
  if (pixels_.rows() % A != 0 || pixels_.cols() % A != 0 || pixels_.rows() == 0 ||
      pixels_.cols() == 0) {
    throw ShapeError("MacPI: " + std::to_string(pixels_.rows()) + "x" +
                     std::to_string(pixels_.cols()) + " is not a nonempty multiple of A=" +
                     std::to_string(A));
  }
}

MacPI macpi_from_sai(const LightField& lf) {
  if (!lf.square()) {
    throw ShapeError("macpi_from_sai: angular grid must be square, got " + dims(lf));
  }
  const int A = lf.U();
  Image px(A * lf.H(), A * lf.W());
  for (int u = 0; u < A; ++u) {
    for (int v = 0; v < A; ++v) {
      for (int h = 0; h < lf.H(); ++h) {
        for (int w = 0; w < lf.W(); ++w) {
          px(h * A + u, w * A + v) = lf(u, v, h, w);
        }
      }
    }
  }
  return MacPI(A, std::move(px));
}

LightField sai_from_macpi(const MacPI& m) {
  const int A = m.A();
  LightField lf(A, A, m.H(), m.W());
  const Image& px = m.pixels();
  for (int u = 0; u < A; ++u) {
    for (int v = 0; v < A; ++v) {
      for (int h = 0; h < lf.H(); ++h) {
        for (int w = 0; w < lf.W(); ++w) {
          lf(u, v, h, w) = px(h * A + u, w * A + v);
        }
      }
    }
  }
  return lf;
}

Epi extract_epi(const LightField& lf, EpiOrientation orientation, int fixed_angular,
                int fixed_spatial) {
  Epi epi;
  epi.orientation = orientation;
  epi.fixed_angular = fixed_angular;
  epi.fixed_spatial = fixed_spatial;
  if (orientation == EpiOrientation::kHorizontal) {
    if (fixed_angular < 0 || fixed_angular >= lf.U() || fixed_spatial < 0 ||
        fixed_spatial >= lf.H()) {
      throw IndexError("extract_epi: (u=" + std::to_string(fixed_angular) +
                       ", h=" + std::to_string(fixed_spatial) + ") outside " + dims(lf));
    }
    epi.strip = Image(lf.V(), lf.W());
    for (int v = 0; v < lf.V(); ++v) {
      for (int w = 0; w < lf.W(); ++w) {
        epi.strip(v, w) = lf(fixed_angular, v, fixed_spatial, w);
      }
    }
  } else {
    if (fixed_angular < 0 || fixed_angular >= lf.V() || fixed_spatial < 0 ||
        fixed_spatial >= lf.W()) {
      throw IndexError("extract_epi: (v=" + std::to_string(fixed_angular) +
                       ", w=" + std::to_string(fixed_spatial) + ") outside " + dims(lf));
    }
    epi.strip = Image(lf.U(), lf.H());
    for (int u = 0; u < lf.U(); ++u) {
      for (int h = 0; h < lf.H(); ++h) {
        epi.strip(u, h) = lf(u, fixed_angular, h, fixed_spatial);
      }
    }
  }
  return epi;
}

std::vector<int> evenly_spaced_indices(int size, int n) {
  if (n < 1 || n > size) {
    throw ShapeError("evenly_spaced_indices: cannot pick " + std::to_string(n) + " of " +
                     std::to_string(size));
  }
  std::vector<int> idx(n);
  if (n == 1) {
    idx[0] = (size - 1) / 2;
    return idx;
  }
  for (int i = 0; i < n; ++i) {
    // Exact integer rounding of i*(size-1)/(n-1).
    idx[i] = (2 * i * (size - 1) + (n - 1)) / (2 * (n - 1));
  }
  return idx;
}

LightField sparse_sample_corners(const LightField& lf, int n) {
  if (n < 1 || n > lf.U() || n > lf.V()) {
    throw ShapeError("sparse_sample_corners: n=" + std::to_string(n) +
                     " exceeds angular grid " + dims(lf));
  }
  const auto rows = evenly_spaced_indices(lf.U(), n);
  const auto cols = evenly_spaced_indices(lf.V(), n);
  LightField out(n, n, lf.H(), lf.W());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::ranges::copy(lf.view(rows[i], cols[j]), out.view(i, j).begin());
    }
  }
  return out;
}

LightField center_crop_angular(const LightField& lf, int target) {
  if (target < 1 || target > lf.U() || target > lf.V()) {
    throw ShapeError("center_crop_angular: target " + std::to_string(target) +
                     " exceeds angular grid " + dims(lf));
  }
  return angular_window(lf, (lf.U() - target) / 2, (lf.V() - target) / 2, target, target);
}

LightField angular_window(const LightField& lf, int u0, int v0, int rows, int cols) {
  if (u0 < 0 || v0 < 0 || rows < 1 || cols < 1 || u0 + rows > lf.U() || v0 + cols > lf.V()) {
    throw IndexError("angular_window: window outside " + dims(lf));
  }
  LightField out(rows, cols, lf.H(), lf.W());
  for (int u = 0; u < rows; ++u) {
    for (int v = 0; v < cols; ++v) {
      std::ranges::copy(lf.view(u0 + u, v0 + v), out.view(u, v).begin());
    }
  }
  return out;
}

LightField spatial_crop(const LightField& lf, int h0, int w0, int height, int width) {
  if (h0 < 0 || w0 < 0 || height < 1 || width < 1 || h0 + height > lf.H() ||
      w0 + width > lf.W()) {
    throw IndexError("spatial_crop: window outside " + dims(lf));
  }
  LightField out(lf.U(), lf.V(), height, width);
  for (int u = 0; u < lf.U(); ++u) {
    for (int v = 0; v < lf.V(); ++v) {
      for (int h = 0; h < height; ++h) {
        for (int w = 0; w < width; ++w) {
          out(u, v, h, w) = lf(u, v, h0 + h, w0 + w);
        }
      }
    }
  }
  return out;
}

}  // namespace ddasr
