#include "ddasr/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ddasr/checkpoint.hpp"
#include "ddasr/deterministic.hpp"
#include "ddasr/errors.hpp"
#include "ddasr/scene_io.hpp"

namespace ddasr {

namespace fs = std::filesystem;

Task parse_task(const std::string& name) {
  if (name == "gvn") {
    return Task::kGvn;
  }
  if (name == "lvn") {
    return Task::kLvn;
  }
  throw std::invalid_argument("unknown task '" + name + "' (expected gvn or lvn)");
}

std::string task_name(Task task) { return task == Task::kGvn ? "gvn" : "lvn"; }

TrainConfig TrainConfig::for_task(Task task) {
  TrainConfig c;
  c.batch_size = task == Task::kGvn ? 8 : 12;
  c.stride = task == Task::kGvn ? 16 : 32;
  return c;
}

double TrainConfig::lr_at(int epoch) const {
  return lr0 * std::pow(0.5, epoch / lr_half_period);
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) {
      throw std::invalid_argument(std::string("TrainConfig: ") + what);
    }
  };
  require(batch_size > 0, "batch_size must be positive");
  require(lr0 > 0.0 && std::isfinite(lr0), "lr0 must be positive");
  require(lr_half_period > 0, "lr_half_period must be positive");
  require(epochs > 0, "epochs must be positive");
  require(patch > 0, "patch must be positive");
  require(stride > 0, "stride must be positive");
  require(beta1 > 0.0 && beta1 < 1.0, "beta1 must lie in (0, 1)");
  require(beta2 > 0.0 && beta2 < 1.0, "beta2 must lie in (0, 1)");
  require(max_steps >= 0, "max_steps must be non-negative");
}

std::string TrainConfig::to_text() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "augment=" << (augment ? 1 : 0) << '\n'
      << "batch_size=" << batch_size << '\n'
      << "beta1=" << beta1 << '\n'
      << "beta2=" << beta2 << '\n'
      << "deterministic=" << (deterministic ? 1 : 0) << '\n'
      << "epochs=" << epochs << '\n'
      << "loss=l1\n"
      << "lr0=" << lr0 << '\n'
      << "lr_half_period=" << lr_half_period << '\n'
      << "max_steps=" << max_steps << '\n'
      << "optimizer=adam\n"
      << "patch=" << patch << '\n'
      << "seed=" << seed << '\n'
      << "stride=" << stride << '\n';
  return out.str();
}

TrainConfig TrainConfig::from_text(const std::string& text, Task task) {
  const KeyValueFile kv = KeyValueFile::parse(text);
  TrainConfig c = for_task(task);
  for (const auto& [key, value] : kv.values()) {
    if (key == "augment") {
      c.augment = kv.get_int(key) != 0;
    } else if (key == "batch_size") {
      c.batch_size = kv.get_int(key);
    } else if (key == "beta1") {
      c.beta1 = kv.get_double(key);
    } else if (key == "beta2") {
      c.beta2 = kv.get_double(key);
    } else if (key == "deterministic") {
      c.deterministic = kv.get_int(key) != 0;
    } else if (key == "epochs") {
      c.epochs = kv.get_int(key);
    } else if (key == "loss") {
      if (value != "l1" && value != "L1") {
        throw FormatError("TrainConfig: only the l1 loss is supported, got '" + value + "'");
      }
    } else if (key == "lr0") {
      c.lr0 = kv.get_double(key);
    } else if (key == "lr_half_period") {
      c.lr_half_period = kv.get_int(key);
    } else if (key == "max_steps") {
      c.max_steps = kv.get_int(key);
    } else if (key == "optimizer") {
      if (value != "adam") {
        throw FormatError("TrainConfig: only the adam optimizer is supported, got '" + value +
                          "'");
      }
    } else if (key == "patch") {
      c.patch = kv.get_int(key);
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "stride") {
      c.stride = kv.get_int(key);
    } else {
      throw FormatError("TrainConfig: unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

TaskGeometry task_geometry(Task task) {
  if (task == Task::kGvn) {
    return {7, 2, 7};
  }
  return {9, 2, 3};
}

std::vector<PatchRef> enumerate_patches(const std::vector<SceneShape>& scenes, Task task,
                                        int patch, int stride) {
  if (patch <= 0 || stride <= 0) {
    throw std::invalid_argument("enumerate_patches: patch and stride must be positive");
  }
  const TaskGeometry geo = task_geometry(task);
  const int blocks = task == Task::kLvn ? static_cast<int>(make_schedule(5, 2, 3, 9).blocks.size())
                                        : 0;
  std::vector<PatchRef> refs;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const SceneShape& sc = scenes[s];
    if (sc.A < geo.crop) {
      throw ShapeError("scene '" + sc.id + "' has " + std::to_string(sc.A) + "x" +
                       std::to_string(sc.A) + " views; task " + task_name(task) + " needs " +
                       std::to_string(geo.crop));
    }
    if (sc.H < patch || sc.W < patch) {
      throw ShapeError("scene '" + sc.id + "' (" + std::to_string(sc.H) + "x" +
                       std::to_string(sc.W) + ") is smaller than the " + std::to_string(patch) +
                       "px patch");
    }
    for (int h0 = 0; h0 + patch <= sc.H; h0 += stride) {
      for (int w0 = 0; w0 + patch <= sc.W; w0 += stride) {
        if (task == Task::kGvn) {
          refs.push_back({s, h0, w0, -1});
        } else {
          for (int b = 0; b < blocks; ++b) {
            refs.push_back({s, h0, w0, b});
          }
        }
      }
    }
  }
  return refs;
}

std::string SampleRecord::provenance() const {
  std::string s = scene + "@(" + std::to_string(h0) + "," + std::to_string(w0) + ")";
  if (block) {
    s += "[block " + std::to_string(block->out_u) + "," + std::to_string(block->out_v) + "]";
  }
  return s;
}

SceneShape shape_of(const TrainingScene& scene) {
  if (!scene.lf.square()) {
    throw ShapeError("scene '" + scene.id + "' has a non-square angular grid");
  }
  return {scene.id, scene.lf.U(), scene.lf.H(), scene.lf.W()};
}

PatchDataset::PatchDataset(std::vector<TrainingScene> scenes, Task task, int patch, int stride)
    : task_(task), patch_(patch) {
  std::vector<SceneShape> shapes;
  for (const auto& s : scenes) {
    shapes.push_back(shape_of(s));
  }
  refs_ = enumerate_patches(shapes, task, patch, stride);
  const TaskGeometry geo = task_geometry(task);
  for (auto& s : scenes) {
    ids_.push_back(s.id);
    crops_.push_back(center_crop_angular(s.lf, geo.crop));
    s.lf = LightField();
  }
  if (task == Task::kLvn) {
    schedule_ = make_schedule(5, 2, 3, 9);
  }
}

SampleRecord PatchDataset::get(std::size_t index) const {
  const PatchRef& r = refs_.at(index);
  const LightField& crop = crops_[r.scene];
  SampleRecord rec;
  rec.scene = ids_[r.scene];
  rec.h0 = r.h0;
  rec.w0 = r.w0;
  if (task_ == Task::kGvn) {
    rec.target = spatial_crop(crop, r.h0, r.w0, patch_, patch_);
  } else {
    const Block& b = schedule_.blocks[static_cast<std::size_t>(r.block)];
    rec.block = b;
    rec.target = spatial_crop(angular_window(crop, b.out_u, b.out_v, 3, 3), r.h0, r.w0, patch_,
                              patch_);
  }
  rec.input = sparse_sample_corners(rec.target, 2);
  return rec;
}

std::vector<SampleRecord> build_patches(const std::vector<TrainingScene>& scenes, Task task,
                                        int patch, int stride) {
  const PatchDataset data(scenes, task, patch, stride);
  std::vector<SampleRecord> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.push_back(data.get(i));
  }
  return out;
}

std::vector<TrainingScene> load_training_scenes(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("training data directory not found: " + dir.string());
  }
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory()) {
      subdirs.push_back(e.path());
    }
  }
  std::ranges::sort(subdirs);
  std::vector<TrainingScene> scenes;
  for (const auto& p : subdirs) {
    scenes.push_back({p.filename().string(), read_scene(p).y});
  }
  if (scenes.empty()) {
    throw std::runtime_error("no scene directories under " + dir.string());
  }
  return scenes;
}

Augmentation draw_augmentation(std::mt19937_64& rng) {
  Augmentation a;
  a.hflip = (rng() & 1u) != 0;
  a.vflip = (rng() & 1u) != 0;
  a.rot90 = static_cast<int>(rng() % 4);
  return a;
}

LightField apply_augmentation(const LightField& lf, const Augmentation& aug) {
  if (!lf.square()) {
    throw ShapeError("apply_augmentation: angular grid must be square");
  }
  const int turns = ((aug.rot90 % 4) + 4) % 4;
  if (turns % 2 == 1 && lf.H() != lf.W()) {
    throw ShapeError("apply_augmentation: rotation needs square spatial patches");
  }
  const int A = lf.U();
  const int H = lf.H();
  const int W = lf.W();
  LightField cur = lf;
  if (aug.hflip || aug.vflip) {
    LightField next(A, A, H, W);
    for (int u = 0; u < A; ++u) {
      for (int v = 0; v < A; ++v) {
        const int su = aug.vflip ? A - 1 - u : u;
        const int sv = aug.hflip ? A - 1 - v : v;
        for (int h = 0; h < H; ++h) {
          const int sh = aug.vflip ? H - 1 - h : h;
          for (int w = 0; w < W; ++w) {
            next(u, v, h, w) = cur(su, sv, sh, aug.hflip ? W - 1 - w : w);
          }
        }
      }
    }
    cur = std::move(next);
  }
  for (int t = 0; t < turns; ++t) {
    LightField next(A, A, H, W);
    for (int u = 0; u < A; ++u) {
      for (int v = 0; v < A; ++v) {
        for (int h = 0; h < H; ++h) {
          for (int w = 0; w < W; ++w) {
            next(u, v, h, w) = cur(v, A - 1 - u, w, W - 1 - h);
          }
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

SampleRecord augment(const SampleRecord& sample, const Augmentation& aug) {
  if (aug.identity()) {
    return sample;
  }
  SampleRecord out = sample;
  out.input = apply_augmentation(sample.input, aug);
  out.target = apply_augmentation(sample.target, aug);
  return out;
}

SampleRecord augment(const SampleRecord& sample, std::mt19937_64& rng) {
  return augment(sample, draw_augmentation(rng));
}

std::string TrainLog::to_jsonl() const {
  std::string out;
  for (const TrainStep& s : steps) {
    nlohmann::json j{{"step", s.step}, {"epoch", s.epoch}, {"lr", s.lr}, {"loss", s.loss}};
    out += j.dump() + '\n';
  }
  for (std::size_t e = 0; e < epoch_lr.size(); ++e) {
    nlohmann::json j{{"epoch", e}, {"epoch_lr", epoch_lr[e]}};
    out += j.dump() + '\n';
  }
  return out;
}

TrainLog train(ModelState& model, const PatchDataset& data, const TrainConfig& cfg,
               const TrainOptions& options) {
  cfg.validate();
  const TaskGeometry geo = task_geometry(data.task());
  if (model.config().a_in != geo.a_in || model.config().a_out != geo.a_out) {
    throw ShapeError("train: model maps " + std::to_string(model.config().a_in) + "x" +
                     std::to_string(model.config().a_in) + " -> " +
                     std::to_string(model.config().a_out) + "x" +
                     std::to_string(model.config().a_out) + ", task " +
                     task_name(data.task()) + " needs " + std::to_string(geo.a_in) + " -> " +
                     std::to_string(geo.a_out));
  }
  if (data.size() == 0) {
    throw std::invalid_argument("train: empty dataset");
  }
  if (cfg.deterministic || deterministic_requested_by_env()) {
    set_deterministic(true);
  }
  if (options.checkpoint_dir) {
    fs::create_directories(*options.checkpoint_dir);
  }

  std::mt19937_64 order_rng(cfg.seed);
  std::mt19937_64 aug_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  torch::optim::Adam opt(model.net->parameters(),
                         torch::optim::AdamOptions(cfg.lr0).betas({cfg.beta1, cfg.beta2}));
  model.net->train();

  TrainLog log;
  std::vector<std::size_t> order(data.size());
  bool done = false;
  for (int epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
    const double lr = cfg.lr_at(epoch);
    for (auto& group : opt.param_groups()) {
      static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), order_rng);

    for (std::size_t first = 0; first < order.size() && !done; first += cfg.batch_size) {
      const std::size_t last = std::min(order.size(), first + cfg.batch_size);
      std::vector<LightField> inputs;
      std::vector<LightField> targets;
      std::vector<std::string> provenance;
      for (std::size_t k = first; k < last; ++k) {
        SampleRecord s = data.get(order[k]);
        if (cfg.augment) {
          s = augment(s, aug_rng);
        }
        provenance.push_back(s.provenance());
        inputs.push_back(std::move(s.input));
        targets.push_back(std::move(s.target));
      }

      opt.zero_grad();
      const auto pred = model.net->forward(to_macpi_tensor(inputs));
      const auto loss = torch::l1_loss(pred, to_macpi_tensor(targets));
      const double value = loss.item<double>();
      if (!std::isfinite(value)) {
        std::string batch;
        for (const auto& p : provenance) {
          batch += (batch.empty() ? "" : ", ") + p;
        }
        std::ostringstream msg;
        msg << "non-finite loss at step " << model.step << " (epoch " << epoch << ", lr " << lr
            << "); batch: " << batch;
        throw TrainingError(msg.str());
      }
      loss.backward();
      opt.step();

      const TrainStep rec{model.step, epoch, lr, value};
      log.steps.push_back(rec);
      if (options.on_step) {
        options.on_step(rec);
      }
      ++model.step;
      if (cfg.max_steps > 0 && model.step >= cfg.max_steps) {
        done = true;
      }
    }
    log.epoch_lr.push_back(lr);
    if (options.checkpoint_dir) {
      std::ostringstream name;
      name << "epoch_" << std::setw(3) << std::setfill('0') << epoch + 1 << ".ckpt";
      save_checkpoint(model, *options.checkpoint_dir / name.str());
    }
  }
  model.net->eval();
  return log;
}

}  // namespace ddasr
