#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddasr/btas.hpp"
#include "ddasr/checkpoint.hpp"
#include "ddasr/deterministic.hpp"
#include "ddasr/errors.hpp"
#include "ddasr/metrics.hpp"
#include "ddasr/network.hpp"
#include "ddasr/pfm.hpp"
#include "ddasr/scene_io.hpp"
#include "ddasr/synthetic.hpp"
#include "ddasr/train.hpp"
#include "ddasr/visuals.hpp"

namespace fs = std::filesystem;
using namespace ddasr;

namespace {

bool is_scene_dir(const fs::path& p) { return fs::exists(p / "scene.meta"); }

// "5x5" or "5" -> 5; rejects non-square grids.
int parse_grid(const std::string& s) {
  const auto x = s.find('x');
  const int a = std::stoi(s.substr(0, x));
  if (x != std::string::npos && std::stoi(s.substr(x + 1)) != a) {
    throw ShapeError("only square angular grids are supported, got " + s);
  }
  return a;
}

// Reduces a scene to the sparse input of an a_in -> a_out model. Scenes that
// already have a_in x a_in views pass through; denser scenes are center
// cropped to a_out and corner sampled.
LightField sparse_input(const LightField& lf, int a_in, int a_out) {
  if (lf.U() == a_in && lf.V() == a_in) {
    return lf;
  }
  return sparse_sample_corners(center_crop_angular(lf, a_out), a_in);
}

LightField fit_ground_truth(const LightField& gt, int a_out) {
  return gt.U() == a_out ? gt : center_crop_angular(gt, a_out);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), {}};
}

// --- convert ---------------------------------------------------------------

struct ConvertArgs {
  std::string in;
  std::string out;
};

void run_convert(const ConvertArgs& a) {
  if (fs::is_directory(a.in)) {
    const SceneData s = read_scene(a.in);
    if (!s.y.square()) {
      throw ShapeError("convert: MacPI needs a square angular grid");
    }
    write_macpi(a.out, macpi_from_sai(s.y));
    std::printf("wrote %s (A=%d, %dx%d)\n", a.out.c_str(), s.y.U(), s.y.H(), s.y.W());
  } else {
    const MacPI m = read_macpi(a.in);
    write_scene(a.out, sai_from_macpi(m));
    std::printf("wrote %s (%dx%d views)\n", a.out.c_str(), m.A(), m.A());
  }
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string out;
  int views = 9;
  int height = 64;
  int width = 64;
  double disparity = 1.0;
  std::string texture = "value";
  std::uint64_t seed = 0;
};

void run_synth(const SynthArgs& a) {
  const Texture tex = a.texture == "white"  ? Texture::white_noise(a.height, a.width, a.seed)
                      : a.texture == "edge" ? Texture::vertical_edge(a.height, a.width, a.width / 2)
                                            : Texture::value_noise(a.height, a.width, a.seed);
  SceneData s;
  s.y = generate_constant_disparity_lf({tex, a.disparity, a.views, a.height, a.width});
  s.meta = {a.views, a.views, a.height, a.width, a.disparity, a.disparity};
  write_scene(a.out, s);
  std::printf("wrote %s (%dx%d views, d=%g)\n", a.out.c_str(), a.views, a.views, a.disparity);
}

// --- infer -----------------------------------------------------------------

struct InferArgs {
  std::string in;
  std::string ckpt;
  std::string out;
};

void run_infer(const InferArgs& a) {
  ModelState model = load_checkpoint(a.ckpt);
  const NetworkConfig& cfg = model.config();
  const SceneData scene = read_scene(a.in);
  SceneData result;
  result.y = ddasr_forward(sparse_input(scene.y, cfg.a_in, cfg.a_out), model);
  if (scene.has_color()) {
    result.cb = nearest_view_upsample(sparse_input(*scene.cb, cfg.a_in, cfg.a_out), cfg.a_out);
    result.cr = nearest_view_upsample(sparse_input(*scene.cr, cfg.a_in, cfg.a_out), cfg.a_out);
  }
  result.meta = {cfg.a_out, cfg.a_out, result.y.H(), result.y.W(), scene.meta.disparity_min,
                 scene.meta.disparity_max};
  write_scene(a.out, result);
  std::printf("wrote %s (%dx%d -> %dx%d)\n", a.out.c_str(), cfg.a_in, cfg.a_in, cfg.a_out,
              cfg.a_out);
}

// --- btas ------------------------------------------------------------------

struct BtasArgs {
  std::string in;
  std::string ckpt;
  std::string grid = "5x5";
  std::string target = "9x9";
  std::string out;
  int threads = 1;
};

void run_btas_cmd(const BtasArgs& a) {
  const int M = parse_grid(a.grid);
  const int T = parse_grid(a.target);
  const BlockSchedule schedule = make_schedule(M, 2, 3, T);
  ModelState model = load_checkpoint(a.ckpt);
  const SceneData scene = read_scene(a.in);

  // A dense T x T scene is reduced to its even-indexed M x M views.
  auto grid_input = [&](const LightField& lf) {
    if (lf.U() == M && lf.V() == M) {
      return lf;
    }
    if (lf.U() != T || lf.V() != T) {
      throw ShapeError("btas: scene has " + std::to_string(lf.U()) + "x" + std::to_string(lf.V()) +
                       " views, expected " + a.grid + " or " + a.target);
    }
    LightField out(M, M, lf.H(), lf.W());
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        out.set_view(i, j, lf.view_image(2 * i, 2 * j));
      }
    }
    return out;
  };

  BtasOptions opt;
  if (a.threads > 1) {
    opt.execution = Execution::kParallel;
    opt.threads = a.threads;
  }
  SceneData result;
  result.y = run_btas(grid_input(scene.y), network_lvn(model), schedule, opt);
  if (scene.has_color()) {
    result.cb = nearest_view_upsample(grid_input(*scene.cb), T);
    result.cr = nearest_view_upsample(grid_input(*scene.cr), T);
  }
  result.meta = {T, T, result.y.H(), result.y.W(), scene.meta.disparity_min,
                 scene.meta.disparity_max};
  write_scene(a.out, result);

  std::string grid;
  for (int u = 0; u < T; ++u) {
    for (int v = 0; v < T; ++v) {
      grid += std::to_string(schedule.coverage(u, v)) + (v + 1 < T ? " " : "\n");
    }
  }
  write_text(fs::path(a.out) / "coverage.txt", grid);
  std::printf("wrote %s (%zu blocks)\n", a.out.c_str(), schedule.blocks.size());
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::string task = "2x2->7x7";
  std::string model = "";
  std::string out;
};

TaskSpec parse_task_spec(const std::string& s) {
  const auto arrow = s.find("->");
  if (arrow == std::string::npos) {
    throw std::invalid_argument("task must look like 2x2->7x7, got '" + s + "'");
  }
  return {parse_grid(s.substr(0, arrow)), parse_grid(s.substr(arrow + 2))};
}

void run_eval(const EvalArgs& a) {
  MetricReport rep;
  rep.task = parse_task_spec(a.task);
  rep.model_id = a.model;
  auto score = [&](const fs::path& p, const fs::path& g, const std::string& name) {
    const LightField pred = read_scene(p).y;
    const LightField gt = fit_ground_truth(read_scene(g).y, rep.task.a_out);
    rep.scenes.push_back(evaluate_scene(pred, gt, rep.task, name));
  };
  if (is_scene_dir(a.pred)) {
    score(a.pred, a.gt, fs::path(a.pred).filename().string());
  } else {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(a.pred)) {
      if (e.is_directory() && is_scene_dir(e.path())) {
        dirs.push_back(e.path());
      }
    }
    std::ranges::sort(dirs);
    if (dirs.empty()) {
      throw std::runtime_error("eval: no scene directories under " + a.pred);
    }
    for (const auto& d : dirs) {
      const fs::path g = fs::path(a.gt) / d.filename();
      if (!is_scene_dir(g)) {
        throw std::runtime_error("eval: missing ground truth for " + d.filename().string());
      }
      score(d, g, d.filename().string());
    }
  }
  const std::string jsonl = rep.to_jsonl();
  if (!a.out.empty()) {
    write_text(a.out, jsonl);
  }
  std::fputs(jsonl.c_str(), stdout);
}

// --- depth-eval ------------------------------------------------------------

struct DepthArgs {
  std::string pred;
  std::string gt;
  std::string mask;
  double bp1 = kBp1Tau;
  double bp7 = kBp7Tau;
};

void run_depth_eval(const DepthArgs& a) {
  std::vector<std::pair<fs::path, fs::path>> pairs;
  if (fs::is_directory(a.pred)) {
    for (const auto& e : fs::directory_iterator(a.pred)) {
      if (e.path().extension() == ".pfm") {
        pairs.emplace_back(e.path(), fs::path(a.gt) / e.path().filename());
      }
    }
    std::ranges::sort(pairs);
  } else {
    pairs.emplace_back(a.pred, a.gt);
  }
  if (pairs.empty()) {
    throw std::runtime_error("depth-eval: no .pfm files under " + a.pred);
  }
  std::vector<std::uint8_t> mask;
  if (!a.mask.empty()) {
    const Image m = read_png_gray(a.mask);
    for (float x : m.data()) {
      mask.push_back(x > 0.5f ? 1 : 0);
    }
  }
  double s1 = 0, s7 = 0, sm = 0;
  for (const auto& [p, g] : pairs) {
    const DisparityMap d{read_pfm(p), mask};
    const DisparityMap t{read_pfm(g), {}};
    const double b1 = badpix(d, t, a.bp1);
    const double b7 = badpix(d, t, a.bp7);
    const double m = mse100(d, t);
    s1 += b1;
    s7 += b7;
    sm += m;
    nlohmann::json j{{"record", "scene"}, {"scene", p.stem().string()}, {"bp1", b1},
                     {"bp7", b7},         {"mse100", m}};
    std::puts(j.dump().c_str());
  }
  const double n = static_cast<double>(pairs.size());
  nlohmann::json j{{"record", "dataset"}, {"scenes", pairs.size()}, {"bp1", s1 / n},
                   {"bp7", s7 / n},       {"mse100", sm / n},       {"tau_bp1", a.bp1},
                   {"tau_bp7", a.bp7}};
  std::puts(j.dump().c_str());
}

// --- visuals ---------------------------------------------------------------

struct VisualArgs {
  std::string pred;
  std::string gt;
  std::string out;
  VisualOptions opt;
};

void run_visuals(const VisualArgs& a) {
  const LightField pred = read_scene(a.pred).y;
  const LightField gt = fit_ground_truth(read_scene(a.gt).y, pred.U());
  emit_visuals(pred, gt, a.out, a.opt);
  std::printf("wrote csai.png, errmap.png, epi_h.png, epi_v.png to %s\n", a.out.c_str());
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string task = "gvn";
  std::string data;
  std::string config;
  std::string net_config;
  std::string out;
  bool deterministic = false;
  std::int64_t seed = -1;
};

void run_train(const TrainArgs& a) {
  const Task task = parse_task(a.task);
  TrainConfig cfg = a.config.empty() ? TrainConfig::for_task(task)
                                     : TrainConfig::from_text(read_text(a.config), task);
  if (a.deterministic) {
    cfg.deterministic = true;
  }
  if (a.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(a.seed);
  }
  const NetworkConfig net = !a.net_config.empty() ? NetworkConfig::from_text(read_text(a.net_config))
                            : task == Task::kGvn  ? NetworkConfig::ddasr()
                                                  : NetworkConfig::ddasr_s();
  seed_all(cfg.seed);
  ModelState model(net);
  const PatchDataset data(load_training_scenes(a.data), task, cfg.patch, cfg.stride);
  std::fprintf(stderr, "%s: %zu samples, %lld parameters\n", task_name(task).c_str(), data.size(),
               static_cast<long long>(param_count(net)));

  fs::create_directories(a.out);
  write_text(fs::path(a.out) / "train.cfg", cfg.to_text());
  std::ofstream log(fs::path(a.out) / "train_log.jsonl");
  TrainOptions opt;
  opt.checkpoint_dir = fs::path(a.out);
  opt.on_step = [&](const TrainStep& s) {
    nlohmann::json j{{"step", s.step}, {"epoch", s.epoch}, {"lr", s.lr}, {"loss", s.loss}};
    log << j.dump() << '\n' << std::flush;
    std::puts(j.dump().c_str());
  };
  train(model, data, cfg, opt);
  save_checkpoint(model, fs::path(a.out) / "final.ckpt");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ddasr: light-field angular super-resolution"};
  app.require_subcommand(1);

  ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "SAI scene directory <-> MacPI PNG");
  c->add_option("--in", conv.in, "scene directory or MacPI PNG")->required();
  c->add_option("--out", conv.out, "MacPI PNG or scene directory")->required();

  SynthArgs syn;
  auto* s = app.add_subcommand("synth", "generate a constant-disparity scene");
  s->add_option("--out", syn.out)->required();
  s->add_option("--views", syn.views, "angular size A")->check(CLI::PositiveNumber);
  s->add_option("--height", syn.height)->check(CLI::PositiveNumber);
  s->add_option("--width", syn.width)->check(CLI::PositiveNumber);
  s->add_option("--disparity", syn.disparity, "pixels per view step");
  s->add_option("--texture", syn.texture)->check(CLI::IsMember({"value", "white", "edge"}));
  s->add_option("--seed", syn.seed);

  InferArgs inf;
  auto* i = app.add_subcommand("infer", "run one model on a scene");
  i->add_option("--in", inf.in)->required();
  i->add_option("--ckpt", inf.ckpt)->required();
  i->add_option("--out", inf.out)->required();

  BtasArgs bt;
  auto* b = app.add_subcommand("btas", "block-traversal inference with a local view network");
  b->add_option("--in", bt.in)->required();
  b->add_option("--ckpt", bt.ckpt)->required();
  b->add_option("--grid", bt.grid);
  b->add_option("--target", bt.target);
  b->add_option("--out", bt.out)->required();
  b->add_option("--threads", bt.threads)->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "PSNR/SSIM over novel views");
  e->add_option("--pred", ev.pred, "scene directory or directory of scenes")->required();
  e->add_option("--gt", ev.gt)->required();
  e->add_option("--task", ev.task, "e.g. 2x2->7x7 or 5x5->9x9");
  e->add_option("--model", ev.model, "model id recorded in the report");
  e->add_option("--report", ev.out, "also write the report here");

  DepthArgs dp;
  auto* d = app.add_subcommand("depth-eval", "BP1/BP7/MSEx100 from PFM disparity maps");
  d->add_option("--pred", dp.pred, "PFM file or directory")->required();
  d->add_option("--gt", dp.gt)->required();
  d->add_option("--mask", dp.mask, "PNG, nonzero = valid");
  d->add_option("--bp1", dp.bp1, "BP1 threshold");
  d->add_option("--bp7", dp.bp7, "BP7 threshold");

  VisualArgs vis;
  auto* v = app.add_subcommand("visuals", "center view, error map and EPI strips");
  v->add_option("--pred", vis.pred)->required();
  v->add_option("--gt", vis.gt)->required();
  v->add_option("--out", vis.out)->required();
  v->add_option("--scanline-h", vis.opt.scanline_h);
  v->add_option("--scanline-w", vis.opt.scanline_w);
  v->add_option("--error-scale", vis.opt.error_full_scale);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train a GVN or LVN");
  t->add_option("--task", tr.task)->check(CLI::IsMember({"gvn", "lvn"}));
  t->add_option("--data", tr.data, "directory of training scenes")->required();
  t->add_option("--config", tr.config, "key=value TrainConfig");
  t->add_option("--net-config", tr.net_config, "key=value NetworkConfig");
  t->add_option("--out", tr.out, "checkpoint directory")->required();
  t->add_flag("--deterministic", tr.deterministic);
  t->add_option("--seed", tr.seed);

  CLI11_PARSE(app, argc, argv);

  if (deterministic_requested_by_env()) {
    set_deterministic(true);
  }
  try {
    if (*c) run_convert(conv);
    if (*s) run_synth(syn);
    if (*i) run_infer(inf);
    if (*b) run_btas_cmd(bt);
    if (*e) run_eval(ev);
    if (*d) run_depth_eval(dp);
    if (*v) run_visuals(vis);
    if (*t) run_train(tr);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
  return 0;
}
