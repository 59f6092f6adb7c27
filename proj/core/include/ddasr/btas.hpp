#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ddasr/light_field.hpp"
#include "ddasr/network.hpp"

namespace ddasr {

/// One traversal step: the block reads input views [in_u, in_u+n) x
/// [in_v, in_v+n) and produces output views [out_u, out_u+m) x [out_v, out_v+m).
struct Block {
  int in_u = 0;
  int in_v = 0;
  int out_u = 0;
  int out_v = 0;
  bool operator==(const Block&) const = default;
};

/// T x T multiplicity grid, row-major.
struct CoverageGrid {
  int size = 0;
  std::vector<int> counts;

  int operator()(int u, int v) const { return counts[static_cast<std::size_t>(u) * size + v]; }
  int& operator()(int u, int v) { return counts[static_cast<std::size_t>(u) * size + v]; }
  int min() const;
  int max() const;
  long long sum() const;
};

struct BlockSchedule {
  int lvn_in = 2;
  int lvn_out = 3;
  int grid = 5;    ///< M: input views per axis
  int target = 9;  ///< T: output views per axis
  int stride = 2;  ///< output-view step between blocks, m - 1
  std::vector<Block> blocks;
  CoverageGrid coverage;
};

/// Overlapping traversal from the top-left corner with output stride m - 1.
/// Only the n = 2, m = 3, T = 2M - 1 family is supported; anything else
/// throws std::invalid_argument.
BlockSchedule make_schedule(int M, int n, int m, int T);

/// Number of blocks covering each output view.
CoverageGrid coverage_map(const BlockSchedule& schedule);

/// Maps an n x n light field block to an m x m one with the same spatial size.
using LvnAdapter = std::function<LightField(const LightField&)>;

/// Analytic view synthesis for a constant integer disparity d (pixels per
/// output-view step) on spatially periodic content: each output view is
/// the mean of the n x n corner views shifted by d times their angular
/// distance, with toroidal wrap.
LvnAdapter shift_oracle_lvn(int disparity, int lvn_out = 3);

/// Wraps a trained local-view network. Outputs are left unclamped so the
/// blend is unbiased at seams.
LvnAdapter network_lvn(ModelState& model);

enum class Execution { kSerial, kParallel };

struct BtasOptions {
  Execution execution = Execution::kSerial;
  int threads = 0;  ///< 0 = hardware concurrency
  /// Order in which blocks are evaluated; empty = schedule order. The blend
  /// is reduced in schedule order regardless, so results are independent of it.
  std::vector<std::size_t> processing_order;
  bool clamp = true;  ///< single clamp to [0, 1] after blending
};

/// Runs the LVN on every block and averages overlapping views uniformly over
/// all covering blocks.
LightField run_btas(const LightField& input, const LvnAdapter& lvn,
                    const BlockSchedule& schedule, const BtasOptions& options = {});

/// Analytic peak of simultaneously live activation bytes (float32, batch 1,
/// inference) for one forward pass of `config` at H x W views per input.
std::int64_t peak_activation_estimate(const NetworkConfig& config, int H, int W);

/// Peak for BTAS inference: one LVN block at a time, independent of the
/// grid size.
std::int64_t btas_peak_activation_estimate(const NetworkConfig& lvn_config,
                                           const BlockSchedule& schedule, int H, int W);

}  // namespace ddasr
