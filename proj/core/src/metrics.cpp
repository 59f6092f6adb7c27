#include "ddasr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "ddasr/errors.hpp"

namespace ddasr {

namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

std::vector<double> gaussian_taps(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    k[i] = std::exp(-((i - c) * (i - c)) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& x : k) {
    x /= sum;
  }
  return k;
}

// Separable "valid" filtering of a row-major plane.
std::vector<double> filter_valid(const std::vector<double>& src, int rows, int cols,
                                 const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int oc = cols - n + 1;
  const int orows = rows - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(rows) * oc, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < oc; ++c) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        s += k[i] * src[static_cast<std::size_t>(r) * cols + c + i];
      }
      tmp[static_cast<std::size_t>(r) * oc + c] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(orows) * oc, 0.0);
  for (int r = 0; r < orows; ++r) {
    for (int c = 0; c < oc; ++c) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        s += k[i] * tmp[static_cast<std::size_t>(r + i) * oc + c];
      }
      out[static_cast<std::size_t>(r) * oc + c] = s;
    }
  }
  return out;
}

int nearest_index(const std::vector<int>& positions, int target) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(positions.size()); ++i) {
    if (std::abs(positions[i] - target) < std::abs(positions[best] - target)) {
      best = i;
    }
  }
  return best;
}

nlohmann::json number_or_inf(double x) {
  if (std::isinf(x)) {
    return x > 0 ? "inf" : "-inf";
  }
  return x;
}

}  // namespace

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  if (a.size() == 0) {
    throw ShapeError("mse: empty images");
  }
  double s = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    s += d * d;
  }
  return s / static_cast<double>(da.size());
}

double psnr(const Image& a, const Image& b) {
  const double m = mse(a, b);
  if (m == 0.0) {
    return kPsnrInfinity;
  }
  return 10.0 * std::log10(1.0 / m);
}

double ssim(const Image& a, const Image& b, const SsimOptions& o) {
  require_same_shape(a, b, "ssim");
  if (a.rows() < o.window || a.cols() < o.window) {
    throw ShapeError("ssim: image " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " smaller than the " + std::to_string(o.window) + "x" +
                     std::to_string(o.window) + " window");
  }
  const int rows = a.rows();
  const int cols = a.cols();
  const std::size_t n = a.size();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = a.data()[i];
    y[i] = b.data()[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto k = gaussian_taps(o.window, o.sigma);
  const auto mx = filter_valid(x, rows, cols, k);
  const auto my = filter_valid(y, rows, cols, k);
  const auto sxx = filter_valid(xx, rows, cols, k);
  const auto syy = filter_valid(yy, rows, cols, k);
  const auto sxy = filter_valid(xy, rows, cols, k);
  const double c1 = (o.k1 * o.dynamic_range) * (o.k1 * o.dynamic_range);
  const double c2 = (o.k2 * o.dynamic_range) * (o.k2 * o.dynamic_range);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = sxx[i] - mx[i] * mx[i];
    const double vy = syy[i] - my[i] * my[i];
    const double cov = sxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

namespace {

template <typename F>
double masked_mean(const DisparityMap& d, const DisparityMap& gt, const char* what, F&& term) {
  require_same_shape(d.values, gt.values, what);
  double s = 0.0;
  long long count = 0;
  for (int r = 0; r < gt.values.rows(); ++r) {
    for (int c = 0; c < gt.values.cols(); ++c) {
      if (d.valid(r, c) && gt.valid(r, c)) {
        s += term(static_cast<double>(d.values(r, c)) - gt.values(r, c));
        ++count;
      }
    }
  }
  if (count == 0) {
    throw std::invalid_argument(std::string(what) + ": empty mask");
  }
  return s / static_cast<double>(count);
}

}  // namespace

double badpix(const DisparityMap& d, const DisparityMap& gt, double tau) {
  return 100.0 * masked_mean(d, gt, "badpix", [tau](double e) { return std::abs(e) > tau; });
}

double mse100(const DisparityMap& d, const DisparityMap& gt) {
  return 100.0 * masked_mean(d, gt, "mse100", [](double e) { return e * e; });
}

std::vector<std::pair<int, int>> input_views(const TaskSpec& task) {
  std::vector<std::pair<int, int>> out;
  for (int u : evenly_spaced_indices(task.a_out, task.a_in)) {
    for (int v : evenly_spaced_indices(task.a_out, task.a_in)) {
      out.emplace_back(u, v);
    }
  }
  return out;
}

std::vector<std::pair<int, int>> novel_views(const TaskSpec& task) {
  const auto pos = evenly_spaced_indices(task.a_out, task.a_in);
  auto is_input = [&](int i) { return std::find(pos.begin(), pos.end(), i) != pos.end(); };
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < task.a_out; ++u) {
    for (int v = 0; v < task.a_out; ++v) {
      if (!(is_input(u) && is_input(v))) {
        out.emplace_back(u, v);
      }
    }
  }
  return out;
}

SceneReport evaluate_scene(const LightField& pred, const LightField& gt, const TaskSpec& task,
                           const std::string& scene) {
  if (pred.U() != gt.U() || pred.V() != gt.V() || pred.H() != gt.H() || pred.W() != gt.W()) {
    throw ShapeError("evaluate_scene: prediction and ground truth differ in shape");
  }
  if (gt.U() != task.a_out || gt.V() != task.a_out) {
    throw ShapeError("evaluate_scene: light field has " + std::to_string(gt.U()) + "x" +
                     std::to_string(gt.V()) + " views, task expects " +
                     std::to_string(task.a_out) + "x" + std::to_string(task.a_out));
  }
  SceneReport rep;
  rep.scene = scene;
  for (const auto& [u, v] : novel_views(task)) {
    const Image p = pred.view_image(u, v);
    const Image g = gt.view_image(u, v);
    rep.views.push_back({u, v, psnr(p, g), ssim(p, g)});
  }
  for (const auto& s : rep.views) {
    rep.mean_psnr += s.psnr;
    rep.mean_ssim += s.ssim;
  }
  rep.mean_psnr /= static_cast<double>(rep.views.size());
  rep.mean_ssim /= static_cast<double>(rep.views.size());
  return rep;
}

double MetricReport::mean_psnr() const {
  if (scenes.empty()) {
    throw std::invalid_argument("MetricReport: no scenes");
  }
  double s = 0.0;
  for (const auto& r : scenes) {
    s += r.mean_psnr;
  }
  return s / static_cast<double>(scenes.size());
}

double MetricReport::mean_ssim() const {
  if (scenes.empty()) {
    throw std::invalid_argument("MetricReport: no scenes");
  }
  double s = 0.0;
  for (const auto& r : scenes) {
    s += r.mean_ssim;
  }
  return s / static_cast<double>(scenes.size());
}

std::string MetricReport::to_jsonl() const {
  const std::string task_str = std::to_string(task.a_in) + "x" + std::to_string(task.a_in) +
                               "->" + std::to_string(task.a_out) + "x" +
                               std::to_string(task.a_out);
  std::string out;
  for (const auto& s : scenes) {
    nlohmann::json views = nlohmann::json::array();
    for (const auto& v : s.views) {
      views.push_back({{"u", v.u}, {"v", v.v}, {"psnr", number_or_inf(v.psnr)}, {"ssim", v.ssim}});
    }
    nlohmann::json j{{"record", "scene"},
                     {"scene", s.scene},
                     {"task", task_str},
                     {"model", model_id},
                     {"psnr", number_or_inf(s.mean_psnr)},
                     {"ssim", s.mean_ssim},
                     {"views", views}};
    out += j.dump() + '\n';
  }
  if (!scenes.empty()) {
    nlohmann::json j{{"record", "dataset"},
                     {"task", task_str},
                     {"model", model_id},
                     {"scenes", scenes.size()},
                     {"psnr", number_or_inf(mean_psnr())},
                     {"ssim", mean_ssim()}};
    out += j.dump() + '\n';
  }
  return out;
}

LightField nearest_view_upsample(const LightField& sparse, int a_out) {
  if (!sparse.square()) {
    throw ShapeError("nearest_view_upsample: angular grid must be square");
  }
  const auto pos = evenly_spaced_indices(a_out, sparse.U());
  LightField out(a_out, a_out, sparse.H(), sparse.W());
  for (int u = 0; u < a_out; ++u) {
    for (int v = 0; v < a_out; ++v) {
      const auto src = sparse.view(nearest_index(pos, u), nearest_index(pos, v));
      std::copy(src.begin(), src.end(), out.view(u, v).begin());
    }
  }
  return out;
}

}  // namespace ddasr
