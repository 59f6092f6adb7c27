#include "ddasr/disentangle.hpp"

#include <string>

#include "ddasr/errors.hpp"

namespace ddasr {

namespace {

int axis_output(int in, int k, int s, int d, int p) {
  const int span = in + 2 * p - d * (k - 1) - 1;
  if (span < 0) {
    return 0;
  }
  return span / s + 1;
}

void require_angular(int A, int min, const char* what) {
  if (A < min) {
    throw ShapeError(std::string(what) + ": angular size " + std::to_string(A) +
                     " below minimum " + std::to_string(min));
  }
}

}  // namespace

Extent ConvSpec::output_size(Extent input) const {
  return {axis_output(input.rows, kernel.rows, stride.rows, dilation.rows, padding.rows),
          axis_output(input.cols, kernel.cols, stride.cols, dilation.cols, padding.cols)};
}

ConvSpec sfe_spec(int A, int in_channels, int out_channels) {
  require_angular(A, 1, "sfe_spec");
  ConvSpec s;
  s.kernel = {3, 3};
  s.stride = {1, 1};
  s.dilation = {A, A};
  s.padding = {A, A};
  s.in_channels = in_channels;
  s.out_channels = out_channels;
  return s;
}

ConvSpec afe_spec(int A, int in_channels, int out_channels, int kernel) {
  require_angular(A, 1, "afe_spec");
  if (kernel == 0) {
    kernel = A;
  }
  ConvSpec s;
  s.kernel = {kernel, kernel};
  s.stride = {A, A};
  const int pad = kernel > A ? (kernel - A + 1) / 2 : 0;
  s.padding = {pad, pad};
  s.in_channels = in_channels;
  s.out_channels = out_channels;
  return s;
}

EfeSpec efe_spec(int A, int in_channels, int out_channels, EpiStride stride) {
  require_angular(A, 2, "efe_spec");
  EfeSpec e;
  e.conv.kernel = {1, A * A};
  e.conv.in_channels = in_channels;
  e.conv.out_channels = out_channels;
  if (stride == EpiStride::kAngular) {
    e.conv.stride = {1, A};
    e.conv.padding = {0, A * (A - 1) / 2};
    e.shuffle = A;
  } else {
    e.conv.stride = {1, A * A};
    e.conv.padding = {0, 0};
    e.shuffle = A * A;
  }
  e.expand.kernel = {1, 1};
  e.expand.in_channels = out_channels;
  e.expand.out_channels = out_channels * e.shuffle;
  return e;
}

std::vector<Position> receptive_field_mask(const ConvSpec& spec, Position out, Extent input) {
  const Extent o = spec.output_size(input);
  if (out.row < 0 || out.col < 0 || out.row >= o.rows || out.col >= o.cols) {
    throw IndexError("receptive_field_mask: output (" + std::to_string(out.row) + ", " +
                     std::to_string(out.col) + ") outside " + std::to_string(o.rows) + "x" +
                     std::to_string(o.cols));
  }
  std::vector<Position> mask;
  for (int i = 0; i < spec.kernel.rows; ++i) {
    const int r = out.row * spec.stride.rows - spec.padding.rows + i * spec.dilation.rows;
    if (r < 0 || r >= input.rows) {
      continue;
    }
    for (int j = 0; j < spec.kernel.cols; ++j) {
      const int c = out.col * spec.stride.cols - spec.padding.cols + j * spec.dilation.cols;
      if (c < 0 || c >= input.cols) {
        continue;
      }
      mask.push_back({r, c});
    }
  }
  return mask;
}

torch::nn::Conv2d make_conv(const ConvSpec& spec) {
  namespace nn = torch::nn;
  return nn::Conv2d(nn::Conv2dOptions(spec.in_channels, spec.out_channels,
                                      {spec.kernel.rows, spec.kernel.cols})
                        .stride({spec.stride.rows, spec.stride.cols})
                        .dilation({spec.dilation.rows, spec.dilation.cols})
                        .padding({spec.padding.rows, spec.padding.cols})
                        .bias(true));
}

torch::Tensor pixel_shuffle_cols(const torch::Tensor& x, int factor) {
  const auto b = x.size(0);
  const auto cr = x.size(1);
  const auto h = x.size(2);
  const auto w = x.size(3);
  if (cr % factor != 0) {
    throw ShapeError("pixel_shuffle_cols: " + std::to_string(cr) +
                     " channels not divisible by " + std::to_string(factor));
  }
  const auto c = cr / factor;
  return x.reshape({b, c, factor, h, w}).permute({0, 1, 3, 4, 2}).reshape({b, c, h, w * factor});
}

EpiExtractorImpl::EpiExtractorImpl(int A, int channels, EpiStride stride)
    : spec_(efe_spec(A, channels, channels, stride)),
      conv_(register_module("conv", make_conv(spec_.conv))),
      expand_(register_module("expand", make_conv(spec_.expand))) {}

torch::Tensor EpiExtractorImpl::pre_restore(const torch::Tensor& x) {
  return conv_->forward(x);
}

torch::Tensor EpiExtractorImpl::horizontal(const torch::Tensor& x) {
  const auto width = x.size(3);
  if (width % spec_.conv.stride.cols != 0) {
    throw ShapeError("EpiExtractor: width " + std::to_string(width) +
                     " not divisible by the EPI stride " +
                     std::to_string(spec_.conv.stride.cols));
  }
  auto y = torch::leaky_relu(conv_->forward(x), 0.1);
  return pixel_shuffle_cols(expand_->forward(y), spec_.shuffle);
}

torch::Tensor EpiExtractorImpl::vertical(const torch::Tensor& x) {
  return horizontal(x.transpose(2, 3)).transpose(2, 3);
}

}  // namespace ddasr
