#include "ddasr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <zlib.h>

#include "ddasr/errors.hpp"

namespace ddasr {

namespace {

constexpr char kMagic[8] = {'D', 'D', 'A', 'S', 'R', 'C', 'K', 'P'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  template <typename T>
  void scalar(T v) {
    bytes(&v, sizeof(T));
  }
  void string(std::string_view s) {
    scalar<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size) : data_(data), size_(size) {}

  void bytes(void* out, std::size_t n) {
    if (n > size_ - pos_) {
      throw IntegrityError("checkpoint truncated");
    }
    std::memcpy(out, data_ + pos_, n);
    pos_ += n;
  }
  template <typename T>
  T scalar() {
    T v{};
    bytes(&v, sizeof(T));
    return v;
  }
  std::string string() {
    const auto n = scalar<std::uint32_t>();
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  bool done() const { return pos_ == size_; }

 private:
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

struct ArchivedTensor {
  std::string key;
  std::vector<std::int64_t> shape;
  std::vector<float> values;
};

struct Archive {
  std::string config_text;
  std::int64_t step = 0;
  std::vector<ArchivedTensor> tensors;
};

std::uint32_t crc(const char* data, std::size_t n) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n)));
}

std::string shape_str(const std::vector<std::int64_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out += (i ? ", " : "") + std::to_string(s[i]);
  }
  return out + "]";
}

Archive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open checkpoint " + path.string());
  }
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) + sizeof(std::uint32_t) ||
      std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IntegrityError(path.string() + ": not a checkpoint archive (bad magic or truncated)");
  }
  const std::size_t body = buf.size() - sizeof(std::uint32_t);
  std::uint32_t stored = 0;
  std::memcpy(&stored, buf.data() + body, sizeof(stored));
  if (crc(buf.data(), body) != stored) {
    throw IntegrityError(path.string() + ": checksum mismatch, archive is corrupted");
  }

  Reader r(buf.data() + sizeof(kMagic), body - sizeof(kMagic));
  const std::string version = r.string();
  if (version != kCheckpointVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version '" + version +
                      "', expected '" + std::string(kCheckpointVersion) + "'");
  }
  Archive a;
  a.config_text = r.string();
  a.step = r.scalar<std::int64_t>();
  const auto count = r.scalar<std::uint32_t>();
  a.tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    ArchivedTensor t;
    t.key = r.string();
    const auto rank = r.scalar<std::uint32_t>();
    std::int64_t numel = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      t.shape.push_back(r.scalar<std::int64_t>());
      numel *= t.shape.back();
    }
    const auto nbytes = r.scalar<std::uint64_t>();
    if (nbytes != static_cast<std::uint64_t>(numel) * sizeof(float)) {
      throw IntegrityError(path.string() + ": tensor '" + t.key + "' payload size disagrees with " +
                           shape_str(t.shape));
    }
    t.values.resize(static_cast<std::size_t>(numel));
    r.bytes(t.values.data(), nbytes);
    a.tensors.push_back(std::move(t));
  }
  if (!r.done()) {
    throw IntegrityError(path.string() + ": trailing bytes after tensor table");
  }
  return a;
}

void restore(ModelState& model, const Archive& a, const std::string& source) {
  auto params = model.net->named_parameters(/*recurse=*/true);
  // Validate everything before touching the model so a failed load leaves
  // it unchanged.
  std::set<std::string> seen;
  for (const ArchivedTensor& t : a.tensors) {
    auto* p = params.find(t.key);
    if (p == nullptr) {
      throw FormatError(source + ": unknown key '" + t.key + "' not present in the model");
    }
    const auto expected = p->sizes().vec();
    if (expected != t.shape) {
      throw ShapeError(source + ": key '" + t.key + "' has shape " + shape_str(t.shape) +
                       ", model expects " + shape_str(expected));
    }
    seen.insert(t.key);
  }
  for (const auto& item : params) {
    if (!seen.count(item.key())) {
      throw FormatError(source + ": missing key '" + item.key() + "'");
    }
  }
  if (NetworkConfig::from_text(a.config_text) != model.config()) {
    throw FormatError(source + ": archived config differs from the model config");
  }
  torch::NoGradGuard no_grad;
  for (const ArchivedTensor& t : a.tensors) {
    auto src = torch::from_blob(const_cast<float*>(t.values.data()), t.shape, torch::kFloat32);
    params.find(t.key)->copy_(src);
  }
  model.step = a.step;
}

}  // namespace

void save_checkpoint(const ModelState& model, const std::filesystem::path& path) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.string(kCheckpointVersion);
  w.string(model.config().to_text());
  w.scalar<std::int64_t>(model.step);
  const auto params = model.net->named_parameters(/*recurse=*/true);
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const auto& item : params) {
    const torch::Tensor t = item.value().detach().to(torch::kCPU, torch::kFloat32).contiguous();
    w.string(item.key());
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(t.dim()));
    for (auto d : t.sizes()) {
      w.scalar<std::int64_t>(d);
    }
    const std::uint64_t nbytes = static_cast<std::uint64_t>(t.numel()) * sizeof(float);
    w.scalar<std::uint64_t>(nbytes);
    w.bytes(t.data_ptr<float>(), nbytes);
  }
  const auto& buf = w.buffer();
  const std::uint32_t sum = crc(buf.data(), buf.size());

  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("cannot write checkpoint " + path.string());
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.write(reinterpret_cast<const char*>(&sum), sizeof(sum));
  if (!out) {
    throw FormatError("write failed for checkpoint " + path.string());
  }
}

ModelState load_checkpoint(const std::filesystem::path& path) {
  const Archive a = read_archive(path);
  ModelState model(NetworkConfig::from_text(a.config_text));
  restore(model, a, path.string());
  return model;
}

void load_checkpoint_into(ModelState& model, const std::filesystem::path& path) {
  restore(model, read_archive(path), path.string());
}

}  // namespace ddasr
