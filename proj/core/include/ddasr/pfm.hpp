#pragma once

#include <filesystem>

#include "ddasr/light_field.hpp"

namespace ddasr {

/// Reads a single-channel (`Pf`) Portable Float Map. Rows are stored
/// bottom-to-top on disk and returned top-to-bottom; the sign of the scale
/// field selects byte order. Throws FormatError on color maps or malformed
/// headers, IntegrityError on truncated data.
Image read_pfm(const std::filesystem::path& path);

/// Writes a little-endian single-channel PFM.
void write_pfm(const std::filesystem::path& path, const Image& img);

}  // namespace ddasr
