#include <gtest/gtest.h>

#include "ddasr/light_field.hpp"
#include "ddasr/synthetic.hpp"
#include "oracles.hpp"

namespace ddasr {
namespace {

TEST(Texture, IntegerCoordinatesHitGrid) {
  const Texture t = Texture::white_noise(6, 8, 3);
  EXPECT_EQ(t.sample(2, 5), t.grid()(2, 5));
  EXPECT_EQ(t.sample(-1, -1), t.grid()(5, 7));
  EXPECT_EQ(t.sample(6, 8), t.grid()(0, 0));
}

TEST(Texture, BilinearMidpoint) {
  const Texture t = Texture::white_noise(4, 4, 11);
  const float expect = 0.25f * (t.grid()(1, 1) + t.grid()(1, 2) + t.grid()(2, 1) + t.grid()(2, 2));
  EXPECT_NEAR(t.sample(1.5, 1.5), expect, 1e-6);
}

TEST(Generator, ZeroDisparityViewsIdentical) {
  const LightField lf =
      generate_constant_disparity_lf({Texture::value_noise(10, 10, 1), 0.0, 5, 10, 10});
  for (int u = 0; u < 5; ++u) {
    for (int v = 0; v < 5; ++v) {
      EXPECT_EQ(lf.view_image(u, v), lf.view_image(2, 2));
    }
  }
}

TEST(Generator, IntegerDisparityMatchesShiftOracle) {
  const Texture t = Texture::white_noise(12, 14, 2);
  for (int d : {0, 1, 2, 3}) {
    const LightField lf = generate_constant_disparity_lf({t, double(d), 5, 12, 14});
    EXPECT_EQ(lf, oracle::shifted_field(t.grid(), 5, d)) << "d=" << d;
  }
}

// Eq. 1 on the MacPI: the sample of an object point seen from view (u, v)
// lies in the macro-pixel displaced by d * (uc - u, vc - v) from the anchor.
// The displaced position is located by value search, not by formula.
TEST(Generator, Eq1MacroPixelDisplacement) {
  const int A = 3;
  const int S = 11;
  const Texture t = Texture::white_noise(S, S, 17);
  for (int d : {0, 1, 2}) {
    const MacPI m = macpi_from_sai(generate_constant_disparity_lf({t, double(d), A, S, S}));
    const int h0 = 5;
    const int w0 = 5;
    const float anchor = m(h0 * A + 1, w0 * A + 1);
    for (int u = 0; u < A; ++u) {
      for (int v = 0; v < A; ++v) {
        int found_h = -1;
        int found_w = -1;
        for (int h = 0; h < S; ++h) {
          for (int w = 0; w < S; ++w) {
            if (m(h * A + u, w * A + v) == anchor) {
              found_h = h;
              found_w = w;
            }
          }
        }
        ASSERT_GE(found_h, 0);
        EXPECT_EQ(found_h - h0, d * (1 - u)) << "d=" << d << " u=" << u;
        EXPECT_EQ(found_w - w0, d * (1 - v)) << "d=" << d << " v=" << v;
        const int cheb = std::max(std::abs(found_h - h0), std::abs(found_w - w0));
        EXPECT_EQ(cheb, (u == 1 && v == 1) ? 0 : d);
      }
    }
  }
}

TEST(Generator, FractionalEpiSlope) {
  const int A = 7;
  for (double d : {0.5, 1.5}) {
    const LightField lf = generate_constant_disparity_lf(
        {Texture::column_bump(32, 64, 32.0, 6.0), d, A, 32, 64});
    const Epi e = extract_epi(lf, EpiOrientation::kHorizontal, 3, 10);
    std::vector<double> x;
    std::vector<double> y;
    for (int v = 0; v < A; ++v) {
      std::vector<double> profile(64);
      for (int w = 0; w < 64; ++w) {
        profile[w] = e.strip(v, w);
      }
      x.push_back(v);
      y.push_back(oracle::centroid(profile));
    }
    EXPECT_NEAR(-oracle::ols_slope(x, y), d, 0.05) << "d=" << d;
  }
}

}  // namespace
}  // namespace ddasr
