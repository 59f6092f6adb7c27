#pragma once

#include <filesystem>

#include "ddasr/light_field.hpp"

namespace ddasr {

/// Per-pixel |pred - gt|.
Image error_map(const Image& pred, const Image& gt);

struct VisualOptions {
  int scanline_h = -1;        ///< row for the horizontal EPI; -1 = center
  int scanline_w = -1;        ///< column for the vertical EPI; -1 = center
  double error_full_scale = 0.1;  ///< error mapped to the top of the colormap
};

/// Writes `csai.png` (predicted center view), `errmap.png` (colormapped
/// center-view error), `epi_h.png` and `epi_v.png` (predicted EPIs through
/// the center view at the chosen scanlines) into out_dir.
void emit_visuals(const LightField& pred, const LightField& gt,
                  const std::filesystem::path& out_dir, const VisualOptions& options = {});

}  // namespace ddasr
