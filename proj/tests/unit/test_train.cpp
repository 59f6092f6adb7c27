#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

#include "ddasr/deterministic.hpp"
#include "ddasr/errors.hpp"
#include "ddasr/synthetic.hpp"
#include "ddasr/train.hpp"
#include "oracles.hpp"

namespace ddasr {
namespace {

namespace fs = std::filesystem;

// Integer-disparity parallax law checked on every in-frame sample:
// lf(u, v, h, w) == lf(c, c, h + d(u - c), w + d(v - c)).
bool satisfies_parallax(const LightField& lf, int d) {
  const int c = (lf.U() - 1) / 2;
  for (int u = 0; u < lf.U(); ++u) {
    for (int v = 0; v < lf.V(); ++v) {
      for (int h = 0; h < lf.H(); ++h) {
        for (int w = 0; w < lf.W(); ++w) {
          const int sh = h + d * (u - c);
          const int sw = w + d * (v - c);
          if (sh < 0 || sh >= lf.H() || sw < 0 || sw >= lf.W()) {
            continue;
          }
          if (lf(u, v, h, w) != lf(c, c, sh, sw)) {
            return false;
          }
        }
      }
    }
  }
  return true;
}

TrainingScene synthetic_scene(const std::string& id, int A, int S, double d, std::uint64_t seed) {
  return {id, generate_constant_disparity_lf({Texture::white_noise(S, S, seed), d, A, S, S})};
}

TEST(TrainConfig, Schedule) {
  const TrainConfig c = TrainConfig::for_task(Task::kGvn);
  EXPECT_DOUBLE_EQ(c.lr_at(0), 2e-4);
  EXPECT_DOUBLE_EQ(c.lr_at(14), 2e-4);
  EXPECT_DOUBLE_EQ(c.lr_at(15), 1e-4);
  EXPECT_DOUBLE_EQ(c.lr_at(30), 5e-5);
  EXPECT_DOUBLE_EQ(c.lr_at(c.epochs - 1), 2e-4 * std::pow(0.5, 4));
  EXPECT_DOUBLE_EQ(c.lr_at(75), 6.25e-6);
  EXPECT_EQ(c.batch_size, 8);
  EXPECT_EQ(TrainConfig::for_task(Task::kLvn).batch_size, 12);
}

TEST(TrainConfig, TextRoundTripAndErrors) {
  TrainConfig c = TrainConfig::for_task(Task::kLvn);
  c.seed = 77;
  c.lr0 = 3e-4;
  c.augment = false;
  EXPECT_EQ(TrainConfig::from_text(c.to_text(), Task::kLvn), c);
  EXPECT_EQ(TrainConfig::from_text("epochs=3\n", Task::kLvn).batch_size, 12);
  EXPECT_THROW(TrainConfig::from_text("momentum=0.9\n", Task::kGvn), FormatError);
  EXPECT_THROW(TrainConfig::from_text("loss=mse\n", Task::kGvn), FormatError);
  EXPECT_THROW(TrainConfig::from_text("batch_size=0\n", Task::kGvn), std::invalid_argument);
  EXPECT_EQ(parse_task("lvn"), Task::kLvn);
  EXPECT_THROW(parse_task("both"), std::invalid_argument);
}

TEST(Enumeration, NonOverlappingGvnPatches) {
  const auto refs = enumerate_patches({{"s", 7, 512, 512}}, Task::kGvn, 64, 64);
  EXPECT_EQ(refs.size(), 64u);
}

TEST(Enumeration, SixteenLvnBlocksPerPatch) {
  const auto refs = enumerate_patches({{"s", 9, 64, 64}}, Task::kLvn, 64, 64);
  EXPECT_EQ(refs.size(), 16u);
}

TEST(Enumeration, DefaultStridesNearPublishedCounts) {
  // 20 HCI-new training scenes (9x9x512x512) and 100 Lytro scenes (14x14x376x541).
  std::vector<SceneShape> hci(20, {"hci", 9, 512, 512});
  std::vector<SceneShape> lytro(100, {"lytro", 14, 376, 541});
  std::vector<SceneShape> all = hci;
  all.insert(all.end(), lytro.begin(), lytro.end());

  const TrainConfig g = TrainConfig::for_task(Task::kGvn);
  const TrainConfig l = TrainConfig::for_task(Task::kLvn);
  const double gvn = static_cast<double>(enumerate_patches(all, Task::kGvn, g.patch, g.stride).size());
  const double lvn_hci = static_cast<double>(enumerate_patches(hci, Task::kLvn, l.patch, l.stride).size());
  const double lvn_lytro =
      static_cast<double>(enumerate_patches(lytro, Task::kLvn, l.patch, l.stride).size());
  EXPECT_NEAR(gvn / 7.3e4, 1.0, 0.2) << gvn;
  EXPECT_NEAR(lvn_hci / 6.3e4, 1.0, 0.2) << lvn_hci;
  EXPECT_NEAR(lvn_lytro / 2.3e5, 1.0, 0.2) << lvn_lytro;
}

TEST(Enumeration, Errors) {
  EXPECT_THROW(enumerate_patches({{"small", 9, 32, 80}}, Task::kGvn, 64, 32), ShapeError);
  EXPECT_THROW(enumerate_patches({{"few", 5, 128, 128}}, Task::kGvn, 64, 32), ShapeError);
  EXPECT_THROW(enumerate_patches({{"seven", 7, 128, 128}}, Task::kLvn, 64, 32), ShapeError);
}

TEST(Dataset, GvnSamplesAreCornersOfCenterCrop) {
  const TrainingScene scene{"r", oracle::random_lf(9, 9, 20, 24, 3)};
  const PatchDataset data({scene}, Task::kGvn, 8, 8);
  ASSERT_EQ(data.size(), 2u * 3u);
  const SampleRecord s = data.get(4);
  EXPECT_EQ(s.h0, 8);
  EXPECT_EQ(s.w0, 8);
  ASSERT_EQ(s.target.U(), 7);
  for (int u = 0; u < 7; ++u) {
    for (int v = 0; v < 7; ++v) {
      for (int h = 0; h < 8; ++h) {
        for (int w = 0; w < 8; ++w) {
          ASSERT_EQ(s.target(u, v, h, w), scene.lf(u + 1, v + 1, h + 8, w + 8));
        }
      }
    }
  }
  EXPECT_EQ(s.input.view_image(0, 0), s.target.view_image(0, 0));
  EXPECT_EQ(s.input.view_image(1, 0), s.target.view_image(6, 0));
  EXPECT_EQ(s.input.view_image(1, 1), s.target.view_image(6, 6));
  EXPECT_FALSE(s.block.has_value());
}

TEST(Dataset, LvnInputsAreFiveByFiveGridViews) {
  const TrainingScene scene{"r", oracle::random_lf(9, 9, 8, 8, 4)};
  const PatchDataset data({scene}, Task::kLvn, 8, 8);
  ASSERT_EQ(data.size(), 16u);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const SampleRecord s = data.get(i);
    ASSERT_TRUE(s.block.has_value());
    const Block& b = *s.block;
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(s.target.view_image(a, c), scene.lf.view_image(b.out_u + a, b.out_v + c));
      }
    }
    // Input (i, j) is view (in_u + i, in_v + j) of the 5x5 grid at even positions.
    for (int ii = 0; ii < 2; ++ii) {
      for (int jj = 0; jj < 2; ++jj) {
        EXPECT_EQ(s.input.view_image(ii, jj),
                  scene.lf.view_image(2 * (b.in_u + ii), 2 * (b.in_v + jj)));
      }
    }
  }
  EXPECT_NE(data.get(5).provenance().find("[block"), std::string::npos);
}

TEST(Augment, PreservesParallaxLaw) {
  const TrainingScene scene = synthetic_scene("d1", 9, 32, 1.0, 5);
  ASSERT_TRUE(satisfies_parallax(center_crop_angular(scene.lf, 7), 1));
  const PatchDataset data({scene}, Task::kGvn, 16, 16);
  const SampleRecord s = data.get(0);
  for (bool hf : {false, true}) {
    for (bool vf : {false, true}) {
      for (int rot = 0; rot < 4; ++rot) {
        const Augmentation aug{hf, vf, rot};
        const SampleRecord a = augment(s, aug);
        EXPECT_TRUE(satisfies_parallax(a.target, 1)) << hf << vf << rot;
        EXPECT_EQ(a.input, sparse_sample_corners(a.target, 2)) << hf << vf << rot;
      }
    }
  }
}

TEST(Augment, FlipReversesMatchingAxes) {
  const LightField lf = oracle::random_lf(3, 3, 4, 4, 6);
  const LightField f = apply_augmentation(lf, {true, false, 0});
  EXPECT_EQ(f(0, 0, 1, 0), lf(0, 2, 1, 3));
  const LightField r = apply_augmentation(lf, {false, false, 1});
  EXPECT_EQ(r(0, 1, 2, 3), lf(1, 2, 3, 1));
}

TEST(Augment, IdentitiesAndInvolutions) {
  const LightField lf = oracle::random_lf(5, 5, 6, 6, 7);
  EXPECT_EQ(apply_augmentation(lf, {}), lf);
  const Augmentation h{true, false, 0};
  EXPECT_EQ(apply_augmentation(apply_augmentation(lf, h), h), lf);
  const Augmentation v{false, true, 0};
  EXPECT_EQ(apply_augmentation(apply_augmentation(lf, v), v), lf);
  EXPECT_EQ(apply_augmentation(lf, {false, false, 4}), lf);
  EXPECT_THROW(apply_augmentation(oracle::random_lf(3, 3, 4, 5, 1), {false, false, 1}),
               ShapeError);
}

NetworkConfig micro() {
  NetworkConfig c;
  c.channels = 4;
  c.stage_counts = {1, 1};
  c.attention_reduction = 2;
  return c;
}

class TrainLoop : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ddasr_train_" + std::string(::testing::UnitTest::GetInstance()
                                                                           ->current_test_info()
                                                                           ->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override {
    fs::remove_all(dir_);
    set_deterministic(false);
  }
  fs::path dir_;
};

TEST_F(TrainLoop, SeededRunsAreIdentical) {
  const PatchDataset data({synthetic_scene("a", 9, 16, 1.0, 1), synthetic_scene("b", 9, 16, 0.0, 2)},
                          Task::kGvn, 8, 8);
  TrainConfig cfg = TrainConfig::for_task(Task::kGvn);
  cfg.batch_size = 3;
  cfg.epochs = 2;
  cfg.seed = 5;
  cfg.deterministic = true;
  cfg.patch = 8;
  cfg.stride = 8;

  auto run = [&](const fs::path& out) {
    seed_all(cfg.seed);
    ModelState m(micro());
    TrainOptions opt;
    opt.checkpoint_dir = out;
    return train(m, data, cfg, opt);
  };
  const TrainLog a = run(dir_ / "a");
  const TrainLog b = run(dir_ / "b");
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.steps.size(), 6u);  // 8 samples, batch 3, 2 epochs
  EXPECT_EQ(a.epoch_lr, (std::vector<double>{2e-4, 2e-4}));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "epoch_001.ckpt"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "epoch_002.ckpt"));

  const std::string jsonl = a.to_jsonl();
  EXPECT_EQ(std::count(jsonl.begin(), jsonl.end(), '\n'), 8);
  EXPECT_NE(jsonl.find("\"loss\""), std::string::npos);
}

TEST_F(TrainLoop, MaxStepsStopsEarly) {
  const PatchDataset data({synthetic_scene("a", 9, 16, 1.0, 1)}, Task::kGvn, 8, 8);
  TrainConfig cfg = TrainConfig::for_task(Task::kGvn);
  cfg.batch_size = 1;
  cfg.max_steps = 3;
  ModelState m(micro());
  EXPECT_EQ(train(m, data, cfg).steps.size(), 3u);
  EXPECT_EQ(m.step, 3);
}

TEST_F(TrainLoop, NonFiniteLossNamesTheBatch) {
  TrainingScene bad = synthetic_scene("broken", 9, 8, 0.0, 3);
  bad.lf(4, 4, 2, 2) = std::numeric_limits<float>::quiet_NaN();
  const PatchDataset data({bad}, Task::kGvn, 8, 8);
  TrainConfig cfg = TrainConfig::for_task(Task::kGvn);
  cfg.augment = false;
  ModelState m(micro());
  try {
    train(m, data, cfg);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("step 0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("lr 0.0002"), std::string::npos) << msg;
    EXPECT_NE(msg.find("broken@(0,0)"), std::string::npos) << msg;
  }
}

TEST_F(TrainLoop, RejectsMismatchedModel) {
  const PatchDataset data({synthetic_scene("a", 9, 8, 0.0, 1)}, Task::kLvn, 8, 8);
  ModelState m(micro());  // 2 -> 7
  EXPECT_THROW(train(m, data, TrainConfig::for_task(Task::kLvn)), ShapeError);
}

}  // namespace
}  // namespace ddasr
