#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ddasr/btas.hpp"
#include "ddasr/light_field.hpp"
#include "ddasr/network.hpp"

namespace ddasr {

/// GVN: 2x2 corners -> central 7x7. LVN: 2x2 corners -> 3x3 blocks of the
/// central 9x9, enumerated in BTAS traversal order.
enum class Task { kGvn, kLvn };

Task parse_task(const std::string& name);
std::string task_name(Task task);

struct TrainConfig {
  int batch_size = 8;
  double lr0 = 2e-4;
  int lr_half_period = 15;  ///< epochs between halvings
  int epochs = 75;
  int patch = 64;
  int stride = 16;  ///< spatial step between patch origins
  double beta1 = 0.9;
  double beta2 = 0.999;
  bool augment = true;
  std::uint64_t seed = 0;
  bool deterministic = false;
  std::int64_t max_steps = 0;  ///< stop after this many steps; 0 = run all epochs

  /// Defaults for a task: batch 8 and patch stride 16 for GVN, batch 12 and
  /// stride 32 for LVN (the strides that land near the published sample counts).
  static TrainConfig for_task(Task task);

  /// lr0 * 0.5^floor(epoch / lr_half_period), epochs counted from 0.
  double lr_at(int epoch) const;

  /// Throws std::invalid_argument unless every field is positive/in range.
  void validate() const;

  std::string to_text() const;
  /// Parses `key=value` text over the task defaults. Unknown keys, a loss
  /// other than l1 or an optimizer other than adam throw FormatError.
  static TrainConfig from_text(const std::string& text, Task task);

  bool operator==(const TrainConfig&) const = default;
};

/// Angular geometry of a task.
struct TaskGeometry {
  int crop = 7;    ///< central views used from each scene
  int a_in = 2;
  int a_out = 7;
};
TaskGeometry task_geometry(Task task);

struct SceneShape {
  std::string id;
  int A = 0;  ///< square angular size
  int H = 0;
  int W = 0;
};

/// Reference to one training sample before its pixels are gathered.
struct PatchRef {
  std::size_t scene = 0;
  int h0 = 0;
  int w0 = 0;
  int block = -1;  ///< index into the BTAS schedule for LVN, -1 for GVN
};

/// Spatial-major enumeration: for each scene, each patch origin (row-major),
/// each angular block. Throws ShapeError for scenes with too few views or
/// smaller than one patch.
std::vector<PatchRef> enumerate_patches(const std::vector<SceneShape>& scenes, Task task,
                                        int patch, int stride);

struct SampleRecord {
  LightField input;   ///< a_in x a_in corner views of target
  LightField target;  ///< a_out x a_out patch
  std::string scene;
  int h0 = 0;
  int w0 = 0;
  std::optional<Block> block;

  std::string provenance() const;
};

struct TrainingScene {
  std::string id;
  LightField lf;
};

SceneShape shape_of(const TrainingScene& scene);

/// Enumerated patch set over a list of scenes; samples are gathered on demand.
class PatchDataset {
 public:
  PatchDataset(std::vector<TrainingScene> scenes, Task task, int patch, int stride);

  std::size_t size() const { return refs_.size(); }
  Task task() const { return task_; }
  const std::vector<PatchRef>& refs() const { return refs_; }
  SampleRecord get(std::size_t index) const;

 private:
  std::vector<std::string> ids_;
  Task task_;
  int patch_;
  std::vector<PatchRef> refs_;
  std::vector<LightField> crops_;
  BlockSchedule schedule_;
};

/// All samples of a scene list, materialized.
std::vector<SampleRecord> build_patches(const std::vector<TrainingScene>& scenes, Task task,
                                        int patch, int stride);

/// Reads every subdirectory of `dir` as a scene (sorted by name).
std::vector<TrainingScene> load_training_scenes(const std::filesystem::path& dir);

/// Flips and quarter turns applied jointly to spatial and angular axes.
/// Order: horizontal flip, vertical flip, then `rot90` counter-clockwise turns.
struct Augmentation {
  bool hflip = false;  ///< reverses w and v
  bool vflip = false;  ///< reverses h and u
  int rot90 = 0;       ///< (h, w, u, v) -> (w, W-1-h, v, A-1-u) per turn

  bool identity() const { return !hflip && !vflip && rot90 % 4 == 0; }
};

Augmentation draw_augmentation(std::mt19937_64& rng);
/// Requires square angular and (for rotations) square spatial extents.
LightField apply_augmentation(const LightField& lf, const Augmentation& aug);
SampleRecord augment(const SampleRecord& sample, const Augmentation& aug);
SampleRecord augment(const SampleRecord& sample, std::mt19937_64& rng);

struct TrainStep {
  std::int64_t step = 0;
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  bool operator==(const TrainStep&) const = default;
};

struct TrainLog {
  std::vector<TrainStep> steps;
  std::vector<double> epoch_lr;  ///< lr used in each completed epoch

  /// One JSON object per line: step records, then per-epoch lr records.
  std::string to_jsonl() const;
  bool operator==(const TrainLog&) const = default;
};

struct TrainOptions {
  /// Receives `epoch_NNN.ckpt` after every epoch when set.
  std::optional<std::filesystem::path> checkpoint_dir;
  std::function<void(const TrainStep&)> on_step;
};

/// L1 over the full output MacPI, Adam, step-halving lr per epoch. A
/// non-finite loss throws TrainingError naming the step, lr and the
/// samples in the batch.
TrainLog train(ModelState& model, const PatchDataset& data, const TrainConfig& cfg,
               const TrainOptions& options = {});

}  // namespace ddasr
