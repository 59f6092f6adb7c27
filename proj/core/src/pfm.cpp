#include "ddasr/pfm.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ddasr/errors.hpp"

namespace ddasr {

namespace {

std::string next_token(std::istream& in, const std::filesystem::path& path) {
  std::string tok;
  if (!(in >> tok)) {
    throw FormatError(path.string() + ": truncated PFM header");
  }
  return tok;
}

}  // namespace

Image read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  const std::string magic = next_token(in, path);
  if (magic == "PF") {
    throw FormatError(path.string() + ": color PFM is not a disparity map");
  }
  if (magic != "Pf") {
    throw FormatError(path.string() + ": not a PFM file");
  }
  int cols = 0;
  int rows = 0;
  double scale = 0.0;
  try {
    cols = std::stoi(next_token(in, path));
    rows = std::stoi(next_token(in, path));
    scale = std::stod(next_token(in, path));
  } catch (const std::logic_error&) {
    throw FormatError(path.string() + ": malformed PFM header");
  }
  if (cols <= 0 || rows <= 0 || scale == 0.0) {
    throw FormatError(path.string() + ": invalid PFM dimensions or scale");
  }
  in.get();  // single whitespace byte before the raster
  const bool little = scale < 0.0;
  Image img(rows, cols);
  std::vector<std::uint32_t> row(static_cast<std::size_t>(cols));
  for (int r = rows - 1; r >= 0; --r) {
    if (!in.read(reinterpret_cast<char*>(row.data()),
                 static_cast<std::streamsize>(row.size() * sizeof(std::uint32_t)))) {
      throw IntegrityError(path.string() + ": PFM raster truncated");
    }
    for (int c = 0; c < cols; ++c) {
      std::uint32_t bits = row[c];
      if (little != (std::endian::native == std::endian::little)) {
        bits = __builtin_bswap32(bits);
      }
      float f;
      std::memcpy(&f, &bits, sizeof f);
      img(r, c) = f;
    }
  }
  return img;
}

void write_pfm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "Pf\n" << img.cols() << ' ' << img.rows() << "\n-1.0\n";
  std::vector<std::uint32_t> row(static_cast<std::size_t>(img.cols()));
  for (int r = img.rows() - 1; r >= 0; --r) {
    for (int c = 0; c < img.cols(); ++c) {
      const float f = img(r, c);
      std::uint32_t bits;
      std::memcpy(&bits, &f, sizeof bits);
      if constexpr (std::endian::native != std::endian::little) {
        bits = __builtin_bswap32(bits);
      }
      row[c] = bits;
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(std::uint32_t)));
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace ddasr
