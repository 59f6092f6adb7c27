#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ddasr/light_field.hpp"

namespace ddasr {

/// Reported for identical images.
inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

double mse(const Image& a, const Image& b);
/// 10 log10(1 / MSE) for unit-range images; +inf when MSE is zero.
double psnr(const Image& a, const Image& b);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM over all positions where the Gaussian window fits entirely
/// inside the image. Throws ShapeError if either side is below the window.
double ssim(const Image& a, const Image& b, const SsimOptions& options = {});

/// Center-view disparity in pixels per view step. An empty mask means every
/// pixel is valid.
struct DisparityMap {
  Image values;
  std::vector<std::uint8_t> mask;

  bool valid(int r, int c) const {
    return mask.empty() || mask[static_cast<std::size_t>(r) * values.cols() + c] != 0;
  }
};

inline constexpr double kBp1Tau = 0.1;
inline constexpr double kBp7Tau = 0.07;

/// Percentage of pixels valid in both maps with |d - gt| > tau. Throws
/// ShapeError on a size mismatch, std::invalid_argument on an empty mask.
double badpix(const DisparityMap& d, const DisparityMap& gt, double tau);
/// 100 x mean squared disparity error over the shared mask.
double mse100(const DisparityMap& d, const DisparityMap& gt);

/// Sparse-to-dense task: the a_in x a_in inputs sit at the evenly spaced
/// positions of the a_out x a_out output grid.
struct TaskSpec {
  int a_in = 2;
  int a_out = 7;
  bool operator==(const TaskSpec&) const = default;
};

/// Output positions supplied as inputs, row-major.
std::vector<std::pair<int, int>> input_views(const TaskSpec& task);
/// Output positions not supplied as inputs, row-major.
std::vector<std::pair<int, int>> novel_views(const TaskSpec& task);

struct ViewScore {
  int u = 0;
  int v = 0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct SceneReport {
  std::string scene;
  std::vector<ViewScore> views;  ///< novel views only
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

/// Scores the novel views of a predicted light field against ground truth.
SceneReport evaluate_scene(const LightField& pred, const LightField& gt, const TaskSpec& task,
                           const std::string& scene = "");

struct MetricReport {
  TaskSpec task;
  std::string model_id;
  std::vector<SceneReport> scenes;

  /// Mean over scenes of the per-scene means.
  double mean_psnr() const;
  double mean_ssim() const;

  /// One JSON record per scene, then a dataset summary record. Infinite
  /// PSNR is written as the string "inf".
  std::string to_jsonl() const;
};

/// Baseline: every output view copies its angularly nearest input view
/// (ties broken toward the lower index).
LightField nearest_view_upsample(const LightField& sparse, int a_out);

}  // namespace ddasr
