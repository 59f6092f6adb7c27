#include <random>

#include <gtest/gtest.h>

#include "ddasr/disentangle.hpp"
#include "ddasr/errors.hpp"
#include "oracles.hpp"

namespace ddasr {
namespace {

using PosSet = std::set<std::pair<int, int>>;

PosSet to_set(const std::vector<Position>& mask) {
  PosSet s;
  for (const auto& p : mask) {
    s.insert({p.row, p.col});
  }
  return s;
}

// Same view, neighboring macro-pixels: the 3x3 lattice with spacing A.
PosSet sfe_oracle(int A, int r, int c, int rows, int cols) {
  PosSet s;
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      const int rr = r + i * A;
      const int cc = c + j * A;
      if (rr >= 0 && rr < rows && cc >= 0 && cc < cols) {
        s.insert({rr, cc});
      }
    }
  }
  return s;
}

// Columns within (A^2 - 1) / 2 of the center of macro-pixel `mp`, same row.
PosSet epi_window_oracle(int A, int row, int mp, int cols) {
  PosSet s;
  const double center = mp * A + (A - 1) / 2.0;
  for (int x = 0; x < cols; ++x) {
    if (std::abs(x - center) <= (A * A - 1) / 2.0) {
      s.insert({row, x});
    }
  }
  return s;
}

constexpr int kChannels = 4;

TEST(Specs, OutputSizes) {
  EXPECT_EQ(sfe_spec(3, 8, 8).output_size({15, 21}), (Extent{15, 21}));
  EXPECT_EQ(afe_spec(3, 8, 8).output_size({15, 21}), (Extent{5, 7}));
  EXPECT_EQ(afe_spec(2, 8, 8, 4).output_size({10, 12}), (Extent{5, 6}));
  const EfeSpec e = efe_spec(3, 8, 8);
  EXPECT_EQ(e.conv.output_size({15, 21}), (Extent{15, 7}));
  EXPECT_EQ(e.expand.out_channels, 24);
  const EfeSpec lit = efe_spec(3, 8, 8, EpiStride::kLiteral);
  EXPECT_EQ(lit.conv.output_size({15, 27}), (Extent{15, 3}));
  EXPECT_EQ(lit.shuffle, 9);
  EXPECT_THROW(efe_spec(1, 8, 8), ShapeError);
}

TEST(Specs, MaskRejectsOutOfRangeOutput) {
  EXPECT_THROW(receptive_field_mask(afe_spec(2, 1, 1), {3, 0}, {6, 6}), IndexError);
}

TEST(PixelShuffleCols, MatchesIndexFormula) {
  const auto x = torch::rand({2, 6, 3, 4});
  const auto y = pixel_shuffle_cols(x, 3);
  ASSERT_EQ(y.sizes(), (std::vector<int64_t>{2, 2, 3, 12}));
  for (int b = 0; b < 2; ++b) {
    for (int c = 0; c < 2; ++c) {
      for (int h = 0; h < 3; ++h) {
        for (int w = 0; w < 4; ++w) {
          for (int i = 0; i < 3; ++i) {
            ASSERT_EQ(y[b][c][h][w * 3 + i].item<float>(), x[b][c * 3 + i][h][w].item<float>());
          }
        }
      }
    }
  }
  EXPECT_THROW(pixel_shuffle_cols(torch::rand({1, 5, 2, 2}), 3), ShapeError);
}

TEST(GradientMask, SfeSameViewLocality) {
  std::mt19937 rng(1);
  torch::manual_seed(1);
  int probes = 0;
  for (int A : {2, 3, 5}) {
    const ConvSpec spec = sfe_spec(A, kChannels, kChannels);
    auto conv = make_conv(spec);
    const int rows = A * 5;
    const int cols = A * 6;
    const auto x = torch::rand({1, kChannels, rows, cols});
    for (int k = 0; k < 17; ++k, ++probes) {
      const int r = static_cast<int>(rng() % rows);
      const int c = static_cast<int>(rng() % cols);
      const PosSet grad = oracle::gradient_support(
          [&](const torch::Tensor& t) { return conv->forward(t); }, x,
          static_cast<int>(rng() % kChannels), r, c);
      const PosSet expect = sfe_oracle(A, r, c, rows, cols);
      EXPECT_EQ(grad, expect) << "A=" << A << " out=(" << r << "," << c << ")";
      EXPECT_EQ(to_set(receptive_field_mask(spec, {r, c}, {rows, cols})), expect);
      for (const auto& [i, j] : grad) {
        EXPECT_EQ(i % A, r % A);
        EXPECT_EQ(j % A, c % A);
      }
    }
  }
  EXPECT_GE(probes, 50);
}

TEST(GradientMask, AfeSameMacroPixelLocality) {
  std::mt19937 rng(2);
  torch::manual_seed(2);
  int probes = 0;
  for (int A : {2, 3, 5}) {
    const ConvSpec spec = afe_spec(A, kChannels, kChannels);
    auto conv = make_conv(spec);
    const int H = 5;
    const int W = 6;
    const auto x = torch::rand({1, kChannels, A * H, A * W});
    for (int k = 0; k < 17; ++k, ++probes) {
      const int r = static_cast<int>(rng() % H);
      const int c = static_cast<int>(rng() % W);
      const PosSet grad = oracle::gradient_support(
          [&](const torch::Tensor& t) { return conv->forward(t); }, x, 0, r, c);
      const PosSet expect = oracle::box(r * A, r * A + A, c * A, c * A + A, A * H, A * W);
      EXPECT_EQ(grad, expect) << "A=" << A;
      EXPECT_EQ(to_set(receptive_field_mask(spec, {r, c}, {A * H, A * W})), expect);
    }
  }
  EXPECT_GE(probes, 50);
}

TEST(GradientMask, EfeWindowLocality) {
  std::mt19937 rng(3);
  torch::manual_seed(3);
  int probes = 0;
  for (int A : {2, 3, 5}) {
    EpiExtractor efe(A, kChannels);
    const int H = 4;
    const int W = 7;
    const int rows = A * H;
    const int cols = A * W;
    const auto x = torch::rand({1, kChannels, rows, cols});
    for (int k = 0; k < 17; ++k, ++probes) {
      const int r = static_cast<int>(rng() % rows);
      const int mp = static_cast<int>(rng() % W);
      const PosSet expect = epi_window_oracle(A, r, mp, cols);

      const PosSet pre = oracle::gradient_support(
          [&](const torch::Tensor& t) { return efe->pre_restore(t); }, x, 0, r, mp);
      EXPECT_EQ(pre, expect) << "A=" << A << " row=" << r << " mp=" << mp;
      EXPECT_EQ(to_set(receptive_field_mask(efe->spec().conv, {r, mp}, {rows, cols})), expect);

      // After restore every pixel of macro-pixel mp reads that same window.
      const int x_col = mp * A + static_cast<int>(rng() % A);
      const PosSet full = oracle::gradient_support(
          [&](const torch::Tensor& t) { return efe->horizontal(t); }, x, 1, r, x_col);
      EXPECT_EQ(full, expect);

      // Vertical path: same window along rows.
      const int vmp = static_cast<int>(rng() % H);
      const int vr = vmp * A + static_cast<int>(rng() % A);
      const int vc = static_cast<int>(rng() % cols);
      const auto xt = torch::rand({1, kChannels, rows, cols});
      const PosSet v = oracle::gradient_support(
          [&](const torch::Tensor& t) { return efe->vertical(t); }, xt, 1, vr, vc);
      PosSet vexpect_full;
      for (int y = 0; y < rows; ++y) {
        const double center = vmp * A + (A - 1) / 2.0;
        if (std::abs(y - center) <= (A * A - 1) / 2.0) {
          vexpect_full.insert({y, vc});
        }
      }
      EXPECT_EQ(v, vexpect_full);
    }
  }
  EXPECT_GE(probes, 50);
}

TEST(GradientMask, LiteralStrideReadsOneMacroPixelRun) {
  torch::manual_seed(4);
  const int A = 3;
  EpiExtractor efe(A, kChannels, EpiStride::kLiteral);
  const auto x = torch::rand({1, kChannels, 6, 27});
  const auto y = efe->horizontal(x);
  EXPECT_EQ(y.sizes(), x.sizes());
  const PosSet g = oracle::gradient_support(
      [&](const torch::Tensor& t) { return efe->horizontal(t); }, x, 0, 2, 13);
  EXPECT_EQ(g, oracle::box(2, 3, 9, 18, 6, 27));
}

TEST(Efe, PreservesShapeAndSharesWeights) {
  torch::manual_seed(5);
  EpiExtractor efe(2, kChannels);
  const auto x = torch::rand({2, kChannels, 8, 10});
  EXPECT_EQ(efe->horizontal(x).sizes(), x.sizes());
  EXPECT_EQ(efe->vertical(x).sizes(), x.sizes());
  const auto t = torch::rand({1, kChannels, 6, 6});
  EXPECT_TRUE(torch::equal(efe->vertical(t), efe->horizontal(t.transpose(2, 3)).transpose(2, 3)));
  EXPECT_EQ(efe->parameters().size(), 4u);
  EXPECT_THROW(efe->horizontal(torch::rand({1, kChannels, 4, 5})), ShapeError);
}

}  // namespace
}  // namespace ddasr
