#include <random>

#include <gtest/gtest.h>

#include "ddasr/network.hpp"

namespace ddasr {
namespace {

// Autograd against central finite differences on a double-precision copy of
// a reduced model. The objective is a fixed random linear functional of the
// output so it is smooth away from activation kinks.
TEST(Gradients, AutogradMatchesCentralDifferences) {
  torch::manual_seed(7);
  NetworkConfig cfg;
  cfg.channels = 8;
  cfg.stage_counts = {1, 1, 1, 1};
  ModelState model(cfg);
  model.net->to(torch::kDouble);

  const auto x = torch::rand({1, 1, 12, 12}, torch::kDouble);
  const auto probe = torch::randn({1, 1, 42, 42}, torch::kDouble);
  auto objective = [&] { return (model.net->forward(x) * probe).sum(); };

  model.net->zero_grad();
  objective().backward();

  auto params = model.net->named_parameters();
  std::mt19937_64 rng(11);
  const double eps = 1e-5;
  int checked = 0;
  for (int k = 0; k < 24; ++k) {
    const auto& item = params[rng() % params.size()];
    torch::Tensor p = item.value();
    const int64_t idx = static_cast<int64_t>(rng() % static_cast<uint64_t>(p.numel()));
    const double analytic = p.grad().reshape(-1)[idx].item<double>();

    torch::NoGradGuard guard;
    auto flat = p.view(-1);
    const double orig = flat[idx].item<double>();
    flat[idx] = orig + eps;
    const double up = objective().item<double>();
    flat[idx] = orig - eps;
    const double down = objective().item<double>();
    flat[idx] = orig;
    const double numeric = (up - down) / (2 * eps);

    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    EXPECT_LE(std::abs(analytic - numeric) / scale, 1e-3)
        << item.key() << "[" << idx << "] autograd=" << analytic << " fd=" << numeric;
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

}  // namespace
}  // namespace ddasr
