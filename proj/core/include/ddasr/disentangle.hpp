#pragma once

#include <compare>
#include <vector>

#include <torch/torch.h>

namespace ddasr {

struct Extent {
  int rows = 0;
  int cols = 0;
  auto operator<=>(const Extent&) const = default;
};

struct Position {
  int row = 0;
  int col = 0;
  auto operator<=>(const Position&) const = default;
};

/// Geometry of one 2D convolution. Output size per axis is
/// floor((in + 2p - d*(k-1) - 1) / s) + 1.
struct ConvSpec {
  Extent kernel{3, 3};
  Extent stride{1, 1};
  Extent dilation{1, 1};
  Extent padding{0, 0};
  int in_channels = 1;
  int out_channels = 1;

  Extent output_size(Extent input) const;
  int weight_count() const {
    return kernel.rows * kernel.cols * in_channels * out_channels + out_channels;
  }
  bool operator==(const ConvSpec&) const = default;
};

enum class FeatureLayout { kMacpiFull, kAngularReduced };

/// Spatial extractor: 3x3 kernel dilated by A, stride 1, padding A. Each tap
/// lands on the same view of a neighboring macro-pixel.
ConvSpec sfe_spec(int A, int in_channels, int out_channels);

/// Angular extractor: kernel x kernel window with stride A. With the default
/// kernel = A and no padding each output reads exactly one macro-pixel.
/// Other kernel sizes are padded by ceil((kernel - A) / 2) to keep H x W.
ConvSpec afe_spec(int A, int in_channels, int out_channels, int kernel = 0);

enum class EpiStride {
  kAngular,  ///< stride A, restore with a factor-A one-axis pixel shuffle
  kLiteral,  ///< stride A^2, restore with a factor-A^2 one-axis pixel shuffle
};

/// Horizontal EPI extractor: a 1 x A^2 window sliding along MacPI columns,
/// then a 1x1 channel expansion and a one-axis pixel shuffle that restores
/// the MacPI width.
struct EfeSpec {
  ConvSpec conv;
  ConvSpec expand;
  int shuffle = 1;
};
EfeSpec efe_spec(int A, int in_channels, int out_channels, EpiStride stride = EpiStride::kAngular);

/// Input positions read by output `out` of a convolution over an input of
/// size `input`, computed from kernel/stride/dilation/padding arithmetic.
/// Sorted, with positions falling into the zero padding removed.
std::vector<Position> receptive_field_mask(const ConvSpec& spec, Position out, Extent input);

/// Conv2d module carrying the geometry of `spec`, with bias.
torch::nn::Conv2d make_conv(const ConvSpec& spec);

/// [B, C*r, H, W] -> [B, C, H, W*r]; out[.., c, h, w*r + i] = in[.., c*r + i, h, w].
torch::Tensor pixel_shuffle_cols(const torch::Tensor& x, int factor);

/// Shared-weight EPI extractor. The vertical path is the horizontal path
/// applied to the spatially transposed input and transposed back.
class EpiExtractorImpl : public torch::nn::Module {
 public:
  EpiExtractorImpl(int A, int channels, EpiStride stride = EpiStride::kAngular);

  torch::Tensor horizontal(const torch::Tensor& x);
  torch::Tensor vertical(const torch::Tensor& x);
  /// Output of the 1 x A^2 convolution alone, before activation and restore.
  torch::Tensor pre_restore(const torch::Tensor& x);

  const EfeSpec& spec() const { return spec_; }

 private:
  EfeSpec spec_;
  torch::nn::Conv2d conv_{nullptr};
  torch::nn::Conv2d expand_{nullptr};
};
TORCH_MODULE(EpiExtractor);

}  // namespace ddasr
