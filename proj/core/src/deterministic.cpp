#include "ddasr/deterministic.hpp"

#include <cstdlib>
#include <string_view>
#include <thread>

#include <torch/torch.h>

namespace ddasr {

namespace {
bool g_deterministic = false;
}

bool deterministic_requested_by_env() {
  const char* v = std::getenv(kDeterministicEnv);
  if (v == nullptr) {
    return false;
  }
  const std::string_view s(v);
  return !s.empty() && s != "0";
}

void set_deterministic(bool on) {
  g_deterministic = on;
  at::globalContext().setDeterministicAlgorithms(on, /*warn_only=*/false);
  if (on) {
    torch::set_num_threads(1);
  } else {
    torch::set_num_threads(static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
  }
}

bool deterministic_enabled() { return g_deterministic; }

void seed_all(std::uint64_t seed) { torch::manual_seed(seed); }

}  // namespace ddasr
