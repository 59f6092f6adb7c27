#include <cstdint>

#include "ddasr/network.hpp"

namespace ddasr {

namespace {

using Count = std::int64_t;

Count conv(Count kh, Count kw, Count in, Count out) { return kh * kw * in * out + out; }

/// Extra 1x1 reducers a dense chain of n stages needs in front of stages 2..n.
Count dense_reducers(const NetworkConfig& cfg, Count n) {
  if (cfg.connection != Connection::kDense) {
    return 0;
  }
  const Count C = cfg.channels;
  Count total = 0;
  for (Count j = 2; j <= n; ++j) {
    total += conv(1, 1, j * C, C);
  }
  return total;
}

Count fusion_width(const NetworkConfig& cfg, Count n) {
  return (cfg.connection == Connection::kDense ? n + 1 : n) * cfg.channels;
}

Count fusion(const NetworkConfig& cfg, Count width, bool attention) {
  Count total = conv(1, 1, width, cfg.channels);
  if (attention) {
    const Count hidden = width / cfg.attention_reduction;
    total += width * hidden + hidden + hidden * width + width;
  }
  return total;
}

Count chain(const NetworkConfig& cfg, Count n, Count per_stage, bool attention) {
  return n * per_stage + dense_reducers(cfg, n) + fusion(cfg, fusion_width(cfg, n), attention);
}

}  // namespace

std::int64_t param_count(const NetworkConfig& cfg) {
  cfg.validate();
  const Count C = cfg.channels;
  const Count A = cfg.a_in;
  const Count afe_k = cfg.afe_kernel == 0 ? A : cfg.afe_kernel;
  const Count mix_k = cfg.afeb_mixer_kernel;

  const Count afe_stage = conv(afe_k, afe_k, C, C) + conv(mix_k, mix_k, C, C * A * A);
  const Count afeb = chain(cfg, cfg.afeb_layers, afe_stage, false);
  const Count sfeb = chain(cfg, cfg.sfeb_layers, conv(3, 3, C, C), false);
  const Count shuffle = cfg.efe_stride == EpiStride::kAngular ? A : A * A;
  const Count efe = conv(1, A * A, C, C) + conv(1, 1, C, C * shuffle);
  const Count ddb = afeb + sfeb + efe + conv(1, 1, 3 * C, C);

  Count groups = 0;
  for (int n : cfg.stage_counts) {
    groups += chain(cfg, n, ddb, cfg.channel_attention);
  }
  const Count G = static_cast<Count>(cfg.stage_counts.size());
  const Count top = groups + dense_reducers(cfg, G) +
                    fusion(cfg, fusion_width(cfg, G), cfg.channel_attention);

  const Count init = conv(3, 3, 1, C);
  const Count up = conv(A, A, C, C) + conv(1, 1, C, static_cast<Count>(cfg.a_out) * cfg.a_out);
  return init + top + up;
}

}  // namespace ddasr
