#pragma once

#include <filesystem>
#include <string_view>

#include "ddasr/network.hpp"

namespace ddasr {

inline constexpr std::string_view kCheckpointVersion = "ddasr-checkpoint-1";

/// Writes a single-file archive:
///
///   "DDASRCKP" magic
///   u32 length + version string
///   u32 length + canonical NetworkConfig text
///   i64 optimizer step
///   u32 tensor count, then per tensor:
///     u32 length + hierarchical key, u32 rank, i64 dims[rank],
///     u64 byte count + little-endian float32 payload
///   u32 CRC-32 of every preceding byte
///
/// Integers are little-endian.
void save_checkpoint(const ModelState& model, const std::filesystem::path& path);

/// Rebuilds the model from the archived config and restores its weights.
/// Throws IntegrityError (checksum, truncation) or FormatError (version,
/// unknown or missing keys).
ModelState load_checkpoint(const std::filesystem::path& path);

/// Restores weights into an existing model. Throws ShapeError naming the
/// first archived key whose shape disagrees with the model, FormatError for
/// unknown or missing keys or a differing config.
void load_checkpoint_into(ModelState& model, const std::filesystem::path& path);

}  // namespace ddasr
