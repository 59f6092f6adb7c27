#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "ddasr/disentangle.hpp"
#include "ddasr/light_field.hpp"

namespace ddasr {

/// How a chain of serial stages feeds its fusion layer.
enum class Connection {
  kLayerwise,  ///< concat(f_n(...f_1(x)), ..., f_1(x)): stage outputs only
  kDense,      ///< each stage sees concat(x, earlier outputs) through a 1x1 reducer
};

/// Full hyperparameter record of a DDASR-family network.
struct NetworkConfig {
  int a_in = 2;
  int a_out = 7;
  int channels = 128;
  std::vector<int> stage_counts{2, 2, 6, 2};
  int attention_reduction = 4;
  int afeb_layers = 3;
  int sfeb_layers = 3;
  int afe_kernel = 0;         ///< 0 selects A x A
  int afeb_mixer_kernel = 3;  ///< 3x3 after each AFE; 1 reproduces the 1x1 ablation
  bool channel_attention = true;
  Connection connection = Connection::kLayerwise;
  EpiStride efe_stride = EpiStride::kAngular;
  bool long_skip = true;

  /// 2x2 -> 7x7 global-view network.
  static NetworkConfig ddasr();
  /// 2x2 -> 3x3 local-view network with stage counts 1,1,3,1.
  static NetworkConfig ddasr_s();
  /// Builds a config for up-sampling factor num/den; throws ShapeError unless
  /// a_in * num / den is an integer.
  static NetworkConfig with_factor(int a_in, int num, int den);

  double alpha() const { return static_cast<double>(a_out) / a_in; }
  int total_blocks() const;

  /// Throws std::invalid_argument on an inconsistent record.
  void validate() const;

  /// Canonical `key=value` text (sorted keys, one per line).
  std::string to_text() const;
  static NetworkConfig from_text(const std::string& text);

  bool operator==(const NetworkConfig&) const = default;
};

/// Closed-form count of learnable scalars, derived from the config alone.
std::int64_t param_count(const NetworkConfig& config);

/// Fuses k*C concatenated channels back to C: either channel attention
/// (pool -> linear -> ReLU -> linear -> sigmoid gate) followed by a 1x1
/// convolution, or the 1x1 convolution alone.
class FusionImpl : public torch::nn::Module {
 public:
  FusionImpl(int in_channels, int out_channels, bool attention, int reduction);
  torch::Tensor forward(const torch::Tensor& x);
  /// Per-channel gate in (0, 1), shape [B, C']. Requires attention.
  torch::Tensor gates(const torch::Tensor& x);
  bool has_attention() const { return !fc1_.is_empty(); }
  torch::nn::Conv2d& conv() { return conv_; }

 private:
  torch::nn::Linear fc1_{nullptr};
  torch::nn::Linear fc2_{nullptr};
  torch::nn::Conv2d conv_{nullptr};
};
TORCH_MODULE(Fusion);

/// Serial stages whose outputs are concatenated and fused.
class ChainImpl : public torch::nn::Module {
 public:
  ChainImpl(int channels, Connection connection, bool attention, int reduction);

  /// Registers a stage; stages map C -> C channels at a fixed size.
  void add(torch::nn::AnyModule stage);
  /// Creates the fusion layer; call after the last add().
  void finish();

  torch::Tensor forward(const torch::Tensor& x);
  /// Stage outputs in order, before fusion.
  std::vector<torch::Tensor> stage_outputs(const torch::Tensor& x);
  std::size_t size() const { return stages_.size(); }
  Fusion& fusion() { return fusion_; }

 private:
  int channels_;
  Connection connection_;
  bool attention_;
  int reduction_;
  std::vector<torch::nn::AnyModule> stages_;
  std::vector<torch::nn::Conv2d> reducers_;
  Fusion fusion_{nullptr};
};
TORCH_MODULE(Chain);

/// AFE -> LReLU -> mixer conv (C -> C*A^2) -> pixel shuffle(A) -> LReLU.
class AfeStageImpl : public torch::nn::Module {
 public:
  AfeStageImpl(const NetworkConfig& cfg, int A);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  int A_;
  torch::nn::Conv2d afe_{nullptr};
  torch::nn::Conv2d mixer_{nullptr};
};
TORCH_MODULE(AfeStage);

/// SFE -> LReLU.
class SfeStageImpl : public torch::nn::Module {
 public:
  SfeStageImpl(int channels, int A);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d sfe_{nullptr};
};
TORCH_MODULE(SfeStage);

/// Angular feature extraction block: each stage is AFE -> LReLU -> 3x3 conv
/// (C -> C*A^2) -> pixel shuffle(A) -> LReLU; stages chained and fused by 1x1.
class AfebImpl : public torch::nn::Module {
 public:
  AfebImpl(const NetworkConfig& cfg, int A);
  torch::Tensor forward(const torch::Tensor& x);
  Chain& chain() { return chain_; }

 private:
  Chain chain_{nullptr};
};
TORCH_MODULE(Afeb);

/// Spatial feature extraction block: SFE -> LReLU stages, 1x1 fusion.
class SfebImpl : public torch::nn::Module {
 public:
  SfebImpl(const NetworkConfig& cfg, int A);
  torch::Tensor forward(const torch::Tensor& x);
  Chain& chain() { return chain_; }

 private:
  Chain chain_{nullptr};
};
TORCH_MODULE(Sfeb);

/// Deep disentangling block: {AFEB, EFE-H, EFE-V} in parallel, 1x1 fusion
/// to F, then SFEB(F) + F.
class DdbImpl : public torch::nn::Module {
 public:
  DdbImpl(const NetworkConfig& cfg, int A);
  torch::Tensor forward(const torch::Tensor& x);
  /// F before the SFEB residual.
  torch::Tensor fusion_features(const torch::Tensor& x);

  Afeb& afeb() { return afeb_; }
  Sfeb& sfeb() { return sfeb_; }
  EpiExtractor& efe() { return efe_; }

 private:
  Afeb afeb_{nullptr};
  EpiExtractor efe_{nullptr};
  torch::nn::Conv2d fuse_{nullptr};
  Sfeb sfeb_{nullptr};
};
TORCH_MODULE(Ddb);

/// Block group: n serial DDBs, concatenated and fused by channel attention.
class DdbgImpl : public torch::nn::Module {
 public:
  DdbgImpl(const NetworkConfig& cfg, int A, int blocks);
  torch::Tensor forward(const torch::Tensor& x);
  Ddb& block(std::size_t i) { return blocks_.at(i); }
  std::size_t size() const { return blocks_.size(); }
  Chain& chain() { return chain_; }

 private:
  std::vector<Ddb> blocks_;
  Chain chain_{nullptr};
};
TORCH_MODULE(Ddbg);

/// AFE down-sampling to H x W, 1x1 expansion to A_out^2 channels and a
/// factor-A_out pixel shuffle to a single-channel output MacPI.
class AngularUpsampleImpl : public torch::nn::Module {
 public:
  AngularUpsampleImpl(int channels, int a_in, int a_out);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  int a_out_;
  torch::nn::Conv2d down_{nullptr};
  torch::nn::Conv2d expand_{nullptr};
};
TORCH_MODULE(AngularUpsample);

class DdasrImpl : public torch::nn::Module {
 public:
  explicit DdasrImpl(NetworkConfig cfg);

  /// [B, 1, A_in*H, A_in*W] MacPI -> [B, 1, A_out*H, A_out*W] MacPI, unclamped.
  torch::Tensor forward(const torch::Tensor& macpi);

  const NetworkConfig& config() const { return cfg_; }
  Ddbg& group(std::size_t i) { return groups_.at(i); }
  std::size_t group_count() const { return groups_.size(); }

 private:
  NetworkConfig cfg_;
  torch::nn::Conv2d init_{nullptr};
  std::vector<Ddbg> groups_;
  Chain top_{nullptr};
  AngularUpsample up_{nullptr};
};
TORCH_MODULE(Ddasr);

/// Trainable model plus its optimizer step counter.
struct ModelState {
  explicit ModelState(NetworkConfig cfg) : net(std::move(cfg)) {}

  const NetworkConfig& config() const { return net->config(); }

  Ddasr net;
  std::int64_t step = 0;
};

/// Number of learnable scalars actually registered on a module.
std::int64_t enumerated_param_count(const torch::nn::Module& module);

/// [N, 1, A*H, A*W] MacPI batch from square light fields of equal size.
torch::Tensor to_macpi_tensor(const std::vector<LightField>& batch);
torch::Tensor to_macpi_tensor(const LightField& lf);
/// Inverse of to_macpi_tensor for batch element `index`.
LightField from_macpi_tensor(const torch::Tensor& macpi, int A, std::int64_t index = 0);

/// Dense light field from sparse input: MacPI conversion, network, clamp to
/// [0, 1], conversion back to sub-aperture layout. Runs without autograd.
LightField ddasr_forward(const LightField& sparse, ModelState& model);

}  // namespace ddasr
