#pragma once

#include <cstdint>

namespace ddasr {

/// Name of the environment switch that forces deterministic mode globally.
inline constexpr const char* kDeterministicEnv = "DDASR_DETERMINISTIC";

/// True when DDASR_DETERMINISTIC is set to a value other than "0" or "".
bool deterministic_requested_by_env();

/// Enables deterministic kernels and single-threaded intra-op execution, or
/// restores the default thread pool.
void set_deterministic(bool on);
bool deterministic_enabled();

/// Seeds torch's global generator.
void seed_all(std::uint64_t seed);

}  // namespace ddasr
