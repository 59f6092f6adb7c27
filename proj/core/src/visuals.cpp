#include "ddasr/visuals.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ddasr/errors.hpp"
#include "ddasr/scene_io.hpp"

namespace ddasr {

namespace fs = std::filesystem;

Image error_map(const Image& pred, const Image& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw ShapeError("error_map: image sizes differ");
  }
  Image out(pred.rows(), pred.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = std::abs(pred.data()[i] - gt.data()[i]);
  }
  return out;
}

void emit_visuals(const LightField& pred, const LightField& gt, const fs::path& out_dir,
                  const VisualOptions& options) {
  if (pred.U() != gt.U() || pred.V() != gt.V() || pred.H() != gt.H() || pred.W() != gt.W()) {
    throw ShapeError("emit_visuals: prediction and ground truth differ in shape");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  }
  const int uc = pred.U() / 2;
  const int vc = pred.V() / 2;
  const int h = options.scanline_h < 0 ? pred.H() / 2 : options.scanline_h;
  const int w = options.scanline_w < 0 ? pred.W() / 2 : options.scanline_w;

  write_png(out_dir / "csai.png", pred.view_image(uc, vc));

  const Image err = error_map(pred.view_image(uc, vc), gt.view_image(uc, vc));
  cv::Mat gray(err.rows(), err.cols(), CV_8UC1);
  for (int r = 0; r < err.rows(); ++r) {
    for (int c = 0; c < err.cols(); ++c) {
      const double x = std::clamp(err(r, c) / options.error_full_scale, 0.0, 1.0);
      gray.at<std::uint8_t>(r, c) = static_cast<std::uint8_t>(std::lround(x * 255.0));
    }
  }
  cv::Mat color;
  cv::applyColorMap(gray, color, cv::COLORMAP_JET);
  const fs::path err_path = out_dir / "errmap.png";
  if (!cv::imwrite(err_path.string(), color)) {
    throw std::runtime_error("cannot write " + err_path.string());
  }

  write_png(out_dir / "epi_h.png", extract_epi(pred, EpiOrientation::kHorizontal, uc, h).strip);
  write_png(out_dir / "epi_v.png", extract_epi(pred, EpiOrientation::kVertical, vc, w).strip);
}

}  // namespace ddasr
