#include "ddasr/network.hpp"

#include <cstring>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ddasr/errors.hpp"
#include "ddasr/scene_io.hpp"

namespace ddasr {

namespace nn = torch::nn;

// ---------------------------------------------------------------------------
// NetworkConfig

NetworkConfig NetworkConfig::ddasr() { return NetworkConfig{}; }

NetworkConfig NetworkConfig::ddasr_s() {
  NetworkConfig cfg;
  cfg.a_in = 2;
  cfg.a_out = 3;
  cfg.stage_counts = {1, 1, 3, 1};
  return cfg;
}

NetworkConfig NetworkConfig::with_factor(int a_in, int num, int den) {
  if (a_in < 1 || num < 1 || den < 1 || (a_in * num) % den != 0) {
    throw ShapeError("angular factor " + std::to_string(num) + "/" + std::to_string(den) +
                     " applied to A_in=" + std::to_string(a_in) + " is not an integer grid");
  }
  NetworkConfig cfg;
  cfg.a_in = a_in;
  cfg.a_out = a_in * num / den;
  return cfg;
}

int NetworkConfig::total_blocks() const {
  return std::accumulate(stage_counts.begin(), stage_counts.end(), 0);
}

void NetworkConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("NetworkConfig: " + msg); };
  if (a_in < 2) fail("a_in must be >= 2 (EPI extractor needs two views per axis)");
  if (a_out < 1) fail("a_out must be positive");
  if (channels < 1) fail("channels must be positive");
  if (stage_counts.empty()) fail("stage_counts must be nonempty");
  for (int n : stage_counts) {
    if (n < 1) fail("every stage count must be >= 1");
  }
  if (attention_reduction < 1 || channels % attention_reduction != 0) {
    fail("channels (" + std::to_string(channels) + ") must be divisible by attention_reduction (" +
         std::to_string(attention_reduction) + ")");
  }
  if (afeb_layers < 1 || sfeb_layers < 1) fail("block layer counts must be >= 1");
  if (afe_kernel < 0) fail("afe_kernel must be >= 0");
  if (afeb_mixer_kernel < 1 || afeb_mixer_kernel % 2 == 0) {
    fail("afeb_mixer_kernel must be a positive odd number");
  }
}

std::string NetworkConfig::to_text() const {
  KeyValueFile kv;
  kv.set("a_in", std::to_string(a_in));
  kv.set("a_out", std::to_string(a_out));
  kv.set("channels", std::to_string(channels));
  std::string stages;
  for (std::size_t i = 0; i < stage_counts.size(); ++i) {
    stages += (i ? "," : "") + std::to_string(stage_counts[i]);
  }
  kv.set("stage_counts", stages);
  kv.set("attention_reduction", std::to_string(attention_reduction));
  kv.set("afeb_layers", std::to_string(afeb_layers));
  kv.set("sfeb_layers", std::to_string(sfeb_layers));
  kv.set("afe_kernel", std::to_string(afe_kernel));
  kv.set("afeb_mixer_kernel", std::to_string(afeb_mixer_kernel));
  kv.set("channel_attention", channel_attention ? "1" : "0");
  kv.set("connection", connection == Connection::kLayerwise ? "layerwise" : "dense");
  kv.set("efe_stride", efe_stride == EpiStride::kAngular ? "angular" : "literal");
  kv.set("long_skip", long_skip ? "1" : "0");
  return kv.str();
}

NetworkConfig NetworkConfig::from_text(const std::string& text) {
  const KeyValueFile kv = KeyValueFile::parse(text);
  static const std::set<std::string> known{
      "a_in",        "a_out",           "channels",          "stage_counts",
      "attention_reduction", "afeb_layers", "sfeb_layers",    "afe_kernel",
      "afeb_mixer_kernel", "channel_attention", "connection", "efe_stride",
      "long_skip"};
  for (const auto& [key, value] : kv.values()) {
    if (!known.count(key)) {
      throw FormatError("NetworkConfig: unknown key '" + key + "'");
    }
  }
  auto flag = [&](const std::string& key, bool fallback) {
    if (!kv.has(key)) return fallback;
    const std::string& v = kv.get(key);
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw FormatError("NetworkConfig: '" + key + "' expects 0/1, got '" + v + "'");
  };

  NetworkConfig cfg;
  if (kv.has("a_in")) cfg.a_in = kv.get_int("a_in");
  if (kv.has("a_out")) cfg.a_out = kv.get_int("a_out");
  if (kv.has("channels")) cfg.channels = kv.get_int("channels");
  if (kv.has("stage_counts")) {
    cfg.stage_counts.clear();
    std::istringstream in(kv.get("stage_counts"));
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        cfg.stage_counts.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw FormatError("NetworkConfig: bad stage_counts entry '" + item + "'");
      }
    }
  }
  if (kv.has("attention_reduction")) cfg.attention_reduction = kv.get_int("attention_reduction");
  if (kv.has("afeb_layers")) cfg.afeb_layers = kv.get_int("afeb_layers");
  if (kv.has("sfeb_layers")) cfg.sfeb_layers = kv.get_int("sfeb_layers");
  if (kv.has("afe_kernel")) cfg.afe_kernel = kv.get_int("afe_kernel");
  if (kv.has("afeb_mixer_kernel")) cfg.afeb_mixer_kernel = kv.get_int("afeb_mixer_kernel");
  cfg.channel_attention = flag("channel_attention", cfg.channel_attention);
  cfg.long_skip = flag("long_skip", cfg.long_skip);
  if (kv.has("connection")) {
    const std::string& v = kv.get("connection");
    if (v == "layerwise") cfg.connection = Connection::kLayerwise;
    else if (v == "dense") cfg.connection = Connection::kDense;
    else throw FormatError("NetworkConfig: unknown connection '" + v + "'");
  }
  if (kv.has("efe_stride")) {
    const std::string& v = kv.get("efe_stride");
    if (v == "angular") cfg.efe_stride = EpiStride::kAngular;
    else if (v == "literal") cfg.efe_stride = EpiStride::kLiteral;
    else throw FormatError("NetworkConfig: unknown efe_stride '" + v + "'");
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Fusion / Chain

FusionImpl::FusionImpl(int in_channels, int out_channels, bool attention, int reduction) {
  if (attention) {
    if (reduction < 1 || in_channels % reduction != 0) {
      throw ShapeError("channel attention: " + std::to_string(in_channels) +
                       " channels not divisible by reduction " + std::to_string(reduction));
    }
    const int hidden = in_channels / reduction;
    fc1_ = register_module("fc1", nn::Linear(in_channels, hidden));
    fc2_ = register_module("fc2", nn::Linear(hidden, in_channels));
  }
  conv_ = register_module("conv", nn::Conv2d(nn::Conv2dOptions(in_channels, out_channels, 1)));
}

torch::Tensor FusionImpl::gates(const torch::Tensor& x) {
  if (!has_attention()) {
    throw std::logic_error("Fusion::gates: attention disabled");
  }
  auto pooled = x.mean({2, 3});
  return torch::sigmoid(fc2_->forward(torch::relu(fc1_->forward(pooled))));
}

torch::Tensor FusionImpl::forward(const torch::Tensor& x) {
  if (!has_attention()) {
    return conv_->forward(x);
  }
  auto g = gates(x);
  return conv_->forward(x * g.unsqueeze(-1).unsqueeze(-1));
}

ChainImpl::ChainImpl(int channels, Connection connection, bool attention, int reduction)
    : channels_(channels), connection_(connection), attention_(attention), reduction_(reduction) {}

void ChainImpl::add(nn::AnyModule stage) {
  const std::size_t i = stages_.size();
  register_module("stage" + std::to_string(i), stage.ptr());
  if (connection_ == Connection::kDense && i > 0) {
    const int in = static_cast<int>(i + 1) * channels_;
    reducers_.push_back(register_module("reduce" + std::to_string(i),
                                        nn::Conv2d(nn::Conv2dOptions(in, channels_, 1))));
  }
  stages_.push_back(std::move(stage));
}

void ChainImpl::finish() {
  if (stages_.empty()) {
    throw std::logic_error("Chain::finish: no stages");
  }
  const int n = static_cast<int>(stages_.size());
  const int width = (connection_ == Connection::kDense ? n + 1 : n) * channels_;
  fusion_ = register_module("fusion", Fusion(width, channels_, attention_, reduction_));
}

std::vector<torch::Tensor> ChainImpl::stage_outputs(const torch::Tensor& x) {
  std::vector<torch::Tensor> outs;
  outs.reserve(stages_.size());
  if (connection_ == Connection::kLayerwise) {
    torch::Tensor y = x;
    for (auto& stage : stages_) {
      y = stage.forward(y);
      outs.push_back(y);
    }
    return outs;
  }
  std::vector<torch::Tensor> seen{x};
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    torch::Tensor in = i == 0 ? x : reducers_[i - 1]->forward(torch::cat(seen, 1));
    outs.push_back(stages_[i].forward(in));
    seen.push_back(outs.back());
  }
  return outs;
}

torch::Tensor ChainImpl::forward(const torch::Tensor& x) {
  auto outs = stage_outputs(x);
  if (connection_ == Connection::kDense) {
    outs.insert(outs.begin(), x);
  }
  return fusion_->forward(outs.size() == 1 ? outs.front() : torch::cat(outs, 1));
}

// ---------------------------------------------------------------------------
// Level 1 blocks

AfeStageImpl::AfeStageImpl(const NetworkConfig& cfg, int A) : A_(A) {
  const int C = cfg.channels;
  afe_ = register_module("afe", make_conv(afe_spec(A, C, C, cfg.afe_kernel)));
  ConvSpec mix;
  mix.kernel = {cfg.afeb_mixer_kernel, cfg.afeb_mixer_kernel};
  mix.padding = {cfg.afeb_mixer_kernel / 2, cfg.afeb_mixer_kernel / 2};
  mix.in_channels = C;
  mix.out_channels = C * A * A;
  mixer_ = register_module("mixer", make_conv(mix));
}

torch::Tensor AfeStageImpl::forward(const torch::Tensor& x) {
  if (x.size(2) % A_ != 0 || x.size(3) % A_ != 0) {
    throw ShapeError("AFE: feature map " + std::to_string(x.size(2)) + "x" +
                     std::to_string(x.size(3)) + " not divisible by A=" + std::to_string(A_));
  }
  auto y = torch::leaky_relu(afe_->forward(x), 0.1);
  y = torch::pixel_shuffle(mixer_->forward(y), A_);
  return torch::leaky_relu(y, 0.1);
}

SfeStageImpl::SfeStageImpl(int channels, int A)
    : sfe_(register_module("sfe", make_conv(sfe_spec(A, channels, channels)))) {}

torch::Tensor SfeStageImpl::forward(const torch::Tensor& x) {
  return torch::leaky_relu(sfe_->forward(x), 0.1);
}

AfebImpl::AfebImpl(const NetworkConfig& cfg, int A)
    : chain_(register_module("chain", Chain(cfg.channels, cfg.connection, false, 1))) {
  for (int i = 0; i < cfg.afeb_layers; ++i) {
    chain_->add(nn::AnyModule(AfeStage(cfg, A)));
  }
  chain_->finish();
}

torch::Tensor AfebImpl::forward(const torch::Tensor& x) { return chain_->forward(x); }

SfebImpl::SfebImpl(const NetworkConfig& cfg, int A)
    : chain_(register_module("chain", Chain(cfg.channels, cfg.connection, false, 1))) {
  for (int i = 0; i < cfg.sfeb_layers; ++i) {
    chain_->add(nn::AnyModule(SfeStage(cfg.channels, A)));
  }
  chain_->finish();
}

torch::Tensor SfebImpl::forward(const torch::Tensor& x) { return chain_->forward(x); }

// ---------------------------------------------------------------------------
// Levels 2-4

DdbImpl::DdbImpl(const NetworkConfig& cfg, int A)
    : afeb_(register_module("afeb", Afeb(cfg, A))),
      efe_(register_module("efe", EpiExtractor(A, cfg.channels, cfg.efe_stride))),
      fuse_(register_module(
          "fuse", nn::Conv2d(nn::Conv2dOptions(3 * cfg.channels, cfg.channels, 1)))),
      sfeb_(register_module("sfeb", Sfeb(cfg, A))) {}

torch::Tensor DdbImpl::fusion_features(const torch::Tensor& x) {
  return fuse_->forward(torch::cat({afeb_->forward(x), efe_->horizontal(x), efe_->vertical(x)}, 1));
}

torch::Tensor DdbImpl::forward(const torch::Tensor& x) {
  auto f = fusion_features(x);
  return sfeb_->forward(f) + f;
}

DdbgImpl::DdbgImpl(const NetworkConfig& cfg, int A, int blocks)
    : chain_(register_module("chain", Chain(cfg.channels, cfg.connection, cfg.channel_attention,
                                            cfg.attention_reduction))) {
  for (int i = 0; i < blocks; ++i) {
    Ddb block(cfg, A);
    blocks_.push_back(block);
    chain_->add(nn::AnyModule(block));
  }
  chain_->finish();
}

torch::Tensor DdbgImpl::forward(const torch::Tensor& x) { return chain_->forward(x); }

AngularUpsampleImpl::AngularUpsampleImpl(int channels, int a_in, int a_out) : a_out_(a_out) {
  down_ = register_module("down", make_conv(afe_spec(a_in, channels, channels)));
  ConvSpec expand;
  expand.kernel = {1, 1};
  expand.in_channels = channels;
  expand.out_channels = a_out * a_out;
  expand_ = register_module("expand", make_conv(expand));
}

torch::Tensor AngularUpsampleImpl::forward(const torch::Tensor& x) {
  auto y = torch::leaky_relu(down_->forward(x), 0.1);
  return torch::pixel_shuffle(expand_->forward(y), a_out_);
}

DdasrImpl::DdasrImpl(NetworkConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const int A = cfg_.a_in;
  init_ = register_module("init", make_conv(sfe_spec(A, 1, cfg_.channels)));
  top_ = register_module("top", Chain(cfg_.channels, cfg_.connection, cfg_.channel_attention,
                                      cfg_.attention_reduction));
  for (int n : cfg_.stage_counts) {
    Ddbg group(cfg_, A, n);
    groups_.push_back(group);
    top_->add(nn::AnyModule(group));
  }
  top_->finish();
  up_ = register_module("up", AngularUpsample(cfg_.channels, A, cfg_.a_out));
}

torch::Tensor DdasrImpl::forward(const torch::Tensor& macpi) {
  const int A = cfg_.a_in;
  if (macpi.dim() != 4 || macpi.size(1) != 1 || macpi.size(2) % A != 0 ||
      macpi.size(3) % A != 0) {
    std::ostringstream msg;
    msg << "Ddasr: expected [B, 1, " << A << "*H, " << A << "*W] MacPI, got " << macpi.sizes();
    throw ShapeError(msg.str());
  }
  auto f0 = init_->forward(macpi);
  auto y = top_->forward(f0);
  if (cfg_.long_skip) {
    y = y + f0;
  }
  return up_->forward(y);
}

// ---------------------------------------------------------------------------
// Tensor bridge

std::int64_t enumerated_param_count(const nn::Module& module) {
  std::int64_t n = 0;
  for (const auto& p : module.parameters()) {
    n += p.numel();
  }
  return n;
}

torch::Tensor to_macpi_tensor(const std::vector<LightField>& batch) {
  if (batch.empty()) {
    throw ShapeError("to_macpi_tensor: empty batch");
  }
  const LightField& first = batch.front();
  if (!first.square()) {
    throw ShapeError("to_macpi_tensor: angular grid must be square");
  }
  const int A = first.U();
  const int H = first.H();
  const int W = first.W();
  std::vector<torch::Tensor> items;
  items.reserve(batch.size());
  for (const LightField& lf : batch) {
    if (lf.U() != A || lf.V() != A || lf.H() != H || lf.W() != W) {
      throw ShapeError("to_macpi_tensor: batch members differ in shape");
    }
    auto sai = torch::from_blob(const_cast<float*>(lf.data().data()), {A, A, H, W},
                                torch::kFloat32);
    items.push_back(sai.permute({2, 0, 3, 1}).reshape({1, 1, A * H, A * W}));
  }
  return torch::cat(items, 0).contiguous();
}

torch::Tensor to_macpi_tensor(const LightField& lf) { return to_macpi_tensor(std::vector{lf}); }

LightField from_macpi_tensor(const torch::Tensor& macpi, int A, std::int64_t index) {
  if (macpi.dim() != 4 || macpi.size(1) != 1 || macpi.size(2) % A != 0 ||
      macpi.size(3) % A != 0) {
    throw ShapeError("from_macpi_tensor: tensor is not a single-channel MacPI batch");
  }
  const auto H = macpi.size(2) / A;
  const auto W = macpi.size(3) / A;
  auto sai = macpi[index][0]
                 .detach()
                 .to(torch::kCPU, torch::kFloat32)
                 .reshape({H, A, W, A})
                 .permute({1, 3, 0, 2})
                 .contiguous();
  LightField lf(A, A, static_cast<int>(H), static_cast<int>(W));
  std::memcpy(lf.data().data(), sai.data_ptr<float>(), lf.size() * sizeof(float));
  return lf;
}

LightField ddasr_forward(const LightField& sparse, ModelState& model) {
  const NetworkConfig& cfg = model.config();
  if (sparse.U() != cfg.a_in || sparse.V() != cfg.a_in) {
    throw ShapeError("ddasr_forward: input is " + std::to_string(sparse.U()) + "x" +
                     std::to_string(sparse.V()) + " views, model expects " +
                     std::to_string(cfg.a_in) + "x" + std::to_string(cfg.a_in));
  }
  torch::NoGradGuard no_grad;
  auto out = model.net->forward(to_macpi_tensor(sparse)).clamp(0.0, 1.0);
  return from_macpi_tensor(out, cfg.a_out);
}

}  // namespace ddasr
