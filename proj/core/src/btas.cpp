#include "ddasr/btas.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "ddasr/errors.hpp"

namespace ddasr {

int CoverageGrid::min() const { return *std::ranges::min_element(counts); }
int CoverageGrid::max() const { return *std::ranges::max_element(counts); }
long long CoverageGrid::sum() const { return std::accumulate(counts.begin(), counts.end(), 0LL); }

BlockSchedule make_schedule(int M, int n, int m, int T) {
  if (n != 2 || m != 3) {
    throw std::invalid_argument("make_schedule: only 2x2 -> 3x3 local blocks are supported, got " +
                                std::to_string(n) + "x" + std::to_string(n) + " -> " +
                                std::to_string(m) + "x" + std::to_string(m));
  }
  if (M < 2 || T != 2 * M - 1) {
    throw std::invalid_argument("make_schedule: output grid must be 2M-1 for M >= 2, got M=" +
                                std::to_string(M) + ", T=" + std::to_string(T));
  }
  BlockSchedule s;
  s.lvn_in = n;
  s.lvn_out = m;
  s.grid = M;
  s.target = T;
  s.stride = m - 1;
  for (int p = 0; p + m <= T; p += s.stride) {
    for (int q = 0; q + m <= T; q += s.stride) {
      s.blocks.push_back({p / s.stride, q / s.stride, p, q});
    }
  }
  s.coverage = coverage_map(s);
  return s;
}

CoverageGrid coverage_map(const BlockSchedule& schedule) {
  CoverageGrid g;
  g.size = schedule.target;
  g.counts.assign(static_cast<std::size_t>(g.size) * g.size, 0);
  for (const Block& b : schedule.blocks) {
    for (int a = 0; a < schedule.lvn_out; ++a) {
      for (int c = 0; c < schedule.lvn_out; ++c) {
        ++g(b.out_u + a, b.out_v + c);
      }
    }
  }
  return g;
}

LvnAdapter shift_oracle_lvn(int disparity, int lvn_out) {
  return [disparity, lvn_out](const LightField& block) {
    const int n = block.U();
    const int H = block.H();
    const int W = block.W();
    // Corner view i sits at output-view index corner_pos[i].
    const auto corner_pos = evenly_spaced_indices(lvn_out, n);
    LightField out(lvn_out, lvn_out, H, W);
    for (int a = 0; a < lvn_out; ++a) {
      for (int b = 0; b < lvn_out; ++b) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            const int sh = disparity * (a - corner_pos[i]);
            const int sw = disparity * (b - corner_pos[j]);
            for (int h = 0; h < H; ++h) {
              const int hs = ((h + sh) % H + H) % H;
              for (int w = 0; w < W; ++w) {
                const int ws = ((w + sw) % W + W) % W;
                out(a, b, h, w) += block(i, j, hs, ws);
              }
            }
          }
        }
        for (float& x : out.view(a, b)) {
          x /= static_cast<float>(n * n);
        }
      }
    }
    return out;
  };
}

LvnAdapter network_lvn(ModelState& model) {
  return [&model](const LightField& block) {
    torch::NoGradGuard no_grad;
    if (block.U() != model.config().a_in || block.V() != model.config().a_in) {
      throw ShapeError("network_lvn: block has " + std::to_string(block.U()) + "x" +
                       std::to_string(block.V()) + " views, LVN expects " +
                       std::to_string(model.config().a_in));
    }
    const auto out = model.net->forward(to_macpi_tensor(block));
    return from_macpi_tensor(out, model.config().a_out);
  };
}

LightField run_btas(const LightField& input, const LvnAdapter& lvn,
                    const BlockSchedule& schedule, const BtasOptions& options) {
  if (input.U() != schedule.grid || input.V() != schedule.grid) {
    throw ShapeError("run_btas: input has " + std::to_string(input.U()) + "x" +
                     std::to_string(input.V()) + " views, schedule expects " +
                     std::to_string(schedule.grid) + "x" + std::to_string(schedule.grid));
  }
  const std::size_t count = schedule.blocks.size();
  std::vector<std::size_t> order = options.processing_order;
  if (order.empty()) {
    order.resize(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  {
    auto sorted = order;
    std::ranges::sort(sorted);
    std::vector<std::size_t> expected(count);
    std::iota(expected.begin(), expected.end(), std::size_t{0});
    if (sorted != expected) {
      throw std::invalid_argument("run_btas: processing_order must be a permutation of the blocks");
    }
  }

  std::vector<LightField> outputs(count);
  auto run_block = [&](std::size_t idx) {
    const Block& b = schedule.blocks[idx];
    LightField in = angular_window(input, b.in_u, b.in_v, schedule.lvn_in, schedule.lvn_in);
    LightField out = lvn(in);
    if (out.U() != schedule.lvn_out || out.V() != schedule.lvn_out || out.H() != input.H() ||
        out.W() != input.W()) {
      throw ShapeError("run_btas: LVN returned " + std::to_string(out.U()) + "x" +
                       std::to_string(out.V()) + "x" + std::to_string(out.H()) + "x" +
                       std::to_string(out.W()) + " for block " + std::to_string(idx));
    }
    outputs[idx] = std::move(out);
  };

  if (options.execution == Execution::kSerial) {
    for (std::size_t idx : order) {
      run_block(idx);
    }
  } else {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers =
        std::min<std::size_t>(count, options.threads > 0 ? options.threads : hw);
    std::vector<std::future<void>> jobs;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&] {
        for (std::size_t k = next++; k < count; k = next++) {
          run_block(order[k]);
        }
      }));
    }
    for (auto& j : jobs) {
      j.get();
    }
  }

  // Reduce in schedule order so the sum is independent of evaluation order.
  const int T = schedule.target;
  const std::size_t plane = static_cast<std::size_t>(input.H()) * input.W();
  std::vector<double> acc(static_cast<std::size_t>(T) * T * plane, 0.0);
  for (std::size_t idx = 0; idx < count; ++idx) {
    const Block& b = schedule.blocks[idx];
    for (int a = 0; a < schedule.lvn_out; ++a) {
      for (int c = 0; c < schedule.lvn_out; ++c) {
        const auto src = outputs[idx].view(a, c);
        double* dst = acc.data() + (static_cast<std::size_t>(b.out_u + a) * T + b.out_v + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          dst[i] += src[i];
        }
      }
    }
  }
  const CoverageGrid cov = coverage_map(schedule);
  LightField result(T, T, input.H(), input.W());
  for (int u = 0; u < T; ++u) {
    for (int v = 0; v < T; ++v) {
      const double k = cov(u, v);
      if (k == 0) {
        throw std::logic_error("run_btas: output view not covered by any block");
      }
      const double* src = acc.data() + (static_cast<std::size_t>(u) * T + v) * plane;
      auto dst = result.view(u, v);
      for (std::size_t i = 0; i < plane; ++i) {
        double x = src[i] / k;
        if (options.clamp) {
          x = std::clamp(x, 0.0, 1.0);
        }
        dst[i] = static_cast<float>(x);
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Activation footprint model. Quantities are element counts; tensors that the
// caller still holds are accounted for by the caller.

namespace {

struct Footprint {
  double fmap;     ///< one C-channel MacPI feature map
  double reduced;  ///< one C-channel angular-reduced map
  int A;
  const NetworkConfig& cfg;
};

/// Peak of a chain given each stage's internal peak (excluding its input,
/// including its output).
double chain_peak(const Footprint& f, const std::vector<double>& stage_peaks, bool attention) {
  const bool dense = f.cfg.connection == Connection::kDense;
  double peak = 0.0;
  const auto n = static_cast<double>(stage_peaks.size());
  for (std::size_t i = 0; i < stage_peaks.size(); ++i) {
    const double stored = static_cast<double>(i) * f.fmap;
    const double reducer = dense && i > 0 ? (static_cast<double>(i) + 2.0) * f.fmap : 0.0;
    peak = std::max(peak, stored + reducer + stage_peaks[i]);
  }
  const double width = dense ? n + 1.0 : n;
  const double fusion = n * f.fmap + width * f.fmap + (attention ? width * f.fmap : 0.0) + f.fmap;
  return std::max(peak, fusion);
}

double ddb_peak(const Footprint& f) {
  const double afe_stage = f.reduced + 2.0 * f.fmap;
  const double afeb = chain_peak(f, std::vector<double>(f.cfg.afeb_layers, afe_stage), false);
  const double sfeb = chain_peak(f, std::vector<double>(f.cfg.sfeb_layers, 2.0 * f.fmap), false);
  const int stride = f.cfg.efe_stride == EpiStride::kAngular ? f.A : f.A * f.A;
  const double efe = f.fmap / stride + 2.0 * f.fmap;
  double peak = afeb;
  peak = std::max(peak, 1.0 * f.fmap + efe);
  peak = std::max(peak, 2.0 * f.fmap + efe);
  peak = std::max(peak, 3.0 * f.fmap + 3.0 * f.fmap + f.fmap);
  peak = std::max(peak, f.fmap + sfeb);
  peak = std::max(peak, 3.0 * f.fmap);
  return peak;
}

}  // namespace

std::int64_t peak_activation_estimate(const NetworkConfig& config, int H, int W) {
  config.validate();
  const double A = config.a_in;
  const double R = static_cast<double>(H) * W;
  const double C = config.channels;
  const Footprint f{C * A * A * R, C * R, config.a_in, config};

  const double input = A * A * R;
  const double ddb = ddb_peak(f);
  std::vector<double> group_peaks;
  for (int n : config.stage_counts) {
    group_peaks.push_back(chain_peak(f, std::vector<double>(n, ddb), config.channel_attention));
  }
  // f0 stays alive for the long skip while the top-level chain runs.
  const double body = f.fmap + chain_peak(f, group_peaks, config.channel_attention);
  const double out_views = static_cast<double>(config.a_out) * config.a_out * R;
  const double head = 2.0 * f.fmap + f.reduced + 2.0 * out_views;
  const double peak = input + std::max(body, head);
  return static_cast<std::int64_t>(peak * sizeof(float));
}

std::int64_t btas_peak_activation_estimate(const NetworkConfig& lvn_config,
                                           const BlockSchedule& schedule, int H, int W) {
  if (lvn_config.a_in != schedule.lvn_in || lvn_config.a_out != schedule.lvn_out) {
    throw ShapeError("btas_peak_activation_estimate: LVN config does not match the schedule");
  }
  return peak_activation_estimate(lvn_config, H, W);
}

}  // namespace ddasr
