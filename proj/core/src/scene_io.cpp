#include "ddasr/scene_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ddasr/color.hpp"
#include "ddasr/errors.hpp"

namespace ddasr {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint8_t to_byte(float x) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0f, 1.0f) * 255.0f));
}

fs::path meta_path_for(const fs::path& png_path) {
  fs::path p = png_path;
  p.replace_extension(".meta");
  return p;
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("line " + std::to_string(lineno) + ": expected key=value, got '" +
                        line + "'");
    }
    kv.values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValueFile KeyValueFile::read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void KeyValueFile::write(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
  out << str();
}

std::string KeyValueFile::str() const {
  std::string s;
  for (const auto& [k, v] : values_) {
    s += k + "=" + v + "\n";
  }
  return s;
}

const std::string& KeyValueFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw FormatError("missing key '" + key + "'");
  }
  return it->second;
}

int KeyValueFile::get_int(const std::string& key) const {
  const std::string& s = get(key);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("key '" + key + "': '" + s + "' is not an integer");
  }
  return value;
}

double KeyValueFile::get_double(const std::string& key) const {
  const std::string& s = get(key);
  try {
    std::size_t used = 0;
    const double value = std::stod(s, &used);
    if (used != s.size()) {
      throw std::invalid_argument(s);
    }
    return value;
  } catch (const std::exception&) {
    throw FormatError("key '" + key + "': '" + s + "' is not a number");
  }
}

std::optional<std::string> KeyValueFile::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::string view_filename(int u, int v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "view_%02d_%02d.png", u, v);
  return buf;
}

SceneData read_scene(const fs::path& dir) {
  const KeyValueFile kv = KeyValueFile::read(dir / "scene.meta");
  SceneData scene;
  scene.meta.U = kv.get_int("U");
  scene.meta.V = kv.get_int("V");
  scene.meta.H = kv.get_int("H");
  scene.meta.W = kv.get_int("W");
  if (kv.has("disparity_min")) {
    scene.meta.disparity_min = kv.get_double("disparity_min");
  }
  if (kv.has("disparity_max")) {
    scene.meta.disparity_max = kv.get_double("disparity_max");
  }
  const SceneMeta& m = scene.meta;
  scene.y = LightField(m.U, m.V, m.H, m.W);

  for (int u = 0; u < m.U; ++u) {
    for (int v = 0; v < m.V; ++v) {
      const fs::path p = dir / view_filename(u, v);
      cv::Mat img = cv::imread(p.string(), cv::IMREAD_UNCHANGED);
      if (img.empty()) {
        throw FormatError("cannot read view " + p.string());
      }
      if (img.depth() != CV_8U) {
        throw FormatError(p.string() + ": only 8-bit views are supported");
      }
      if (img.rows != m.H || img.cols != m.W) {
        throw ShapeError(p.string() + ": view is " + std::to_string(img.rows) + "x" +
                         std::to_string(img.cols) + ", scene.meta says " +
                         std::to_string(m.H) + "x" + std::to_string(m.W));
      }
      if (img.channels() == 4) {
        cv::cvtColor(img, img, cv::COLOR_BGRA2BGR);
      }
      if (img.channels() == 1) {
        auto dst = scene.y.view(u, v);
        for (int h = 0; h < m.H; ++h) {
          const auto* row = img.ptr<std::uint8_t>(h);
          for (int w = 0; w < m.W; ++w) {
            dst[static_cast<std::size_t>(h) * m.W + w] = row[w] / 255.0f;
          }
        }
        continue;
      }
      if (img.channels() != 3) {
        throw FormatError(p.string() + ": unsupported channel count " +
                          std::to_string(img.channels()));
      }
      if (!scene.cb) {
        scene.cb = LightField(m.U, m.V, m.H, m.W, 0.5f);
        scene.cr = LightField(m.U, m.V, m.H, m.W, 0.5f);
      }
      for (int h = 0; h < m.H; ++h) {
        const auto* row = img.ptr<cv::Vec3b>(h);
        for (int w = 0; w < m.W; ++w) {
          // OpenCV stores BGR.
          const YCbCr c = to_ycbcr({row[w][2] / 255.0f, row[w][1] / 255.0f, row[w][0] / 255.0f});
          scene.y(u, v, h, w) = std::clamp(c.y, 0.0f, 1.0f);
          (*scene.cb)(u, v, h, w) = c.cb;
          (*scene.cr)(u, v, h, w) = c.cr;
        }
      }
    }
  }
  return scene;
}

void write_scene(const fs::path& dir, const SceneData& scene) {
  fs::create_directories(dir);
  const LightField& y = scene.y;
  KeyValueFile kv;
  kv.set("U", std::to_string(y.U()));
  kv.set("V", std::to_string(y.V()));
  kv.set("H", std::to_string(y.H()));
  kv.set("W", std::to_string(y.W()));
  if (scene.meta.disparity_min) {
    kv.set("disparity_min", std::to_string(*scene.meta.disparity_min));
  }
  if (scene.meta.disparity_max) {
    kv.set("disparity_max", std::to_string(*scene.meta.disparity_max));
  }
  kv.write(dir / "scene.meta");

  for (int u = 0; u < y.U(); ++u) {
    for (int v = 0; v < y.V(); ++v) {
      const fs::path p = dir / view_filename(u, v);
      cv::Mat img;
      if (scene.has_color()) {
        img.create(y.H(), y.W(), CV_8UC3);
        for (int h = 0; h < y.H(); ++h) {
          auto* row = img.ptr<cv::Vec3b>(h);
          for (int w = 0; w < y.W(); ++w) {
            const Rgb c = to_rgb({y(u, v, h, w), (*scene.cb)(u, v, h, w), (*scene.cr)(u, v, h, w)});
            row[w] = cv::Vec3b(to_byte(c.b), to_byte(c.g), to_byte(c.r));
          }
        }
      } else {
        img.create(y.H(), y.W(), CV_8UC1);
        for (int h = 0; h < y.H(); ++h) {
          auto* row = img.ptr<std::uint8_t>(h);
          for (int w = 0; w < y.W(); ++w) {
            row[w] = to_byte(y(u, v, h, w));
          }
        }
      }
      if (!cv::imwrite(p.string(), img)) {
        throw FormatError("cannot write view " + p.string());
      }
    }
  }
}

void write_scene(const fs::path& dir, const LightField& y) {
  SceneData scene;
  scene.y = y;
  write_scene(dir, scene);
}

void write_png(const fs::path& path, const Image& img) {
  cv::Mat m(img.rows(), img.cols(), CV_8UC1);
  for (int r = 0; r < img.rows(); ++r) {
    auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < img.cols(); ++c) {
      row[c] = to_byte(img(r, c));
    }
  }
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  if (!cv::imwrite(path.string(), m)) {
    throw FormatError("cannot write " + path.string());
  }
}

Image read_png_gray(const fs::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (m.empty()) {
    throw FormatError("cannot read " + path.string());
  }
  Image img(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r) {
    const auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < m.cols; ++c) {
      img(r, c) = row[c] / 255.0f;
    }
  }
  return img;
}

void write_macpi(const fs::path& png_path, const MacPI& m) {
  write_png(png_path, m.pixels());
  KeyValueFile kv;
  kv.set("A", std::to_string(m.A()));
  kv.set("H", std::to_string(m.H()));
  kv.set("W", std::to_string(m.W()));
  kv.write(meta_path_for(png_path));
}

MacPI read_macpi(const fs::path& png_path) {
  const KeyValueFile kv = KeyValueFile::read(meta_path_for(png_path));
  const int A = kv.get_int("A");
  Image px = read_png_gray(png_path);
  if (kv.has("H") && kv.has("W") &&
      (px.rows() != A * kv.get_int("H") || px.cols() != A * kv.get_int("W"))) {
    throw ShapeError(png_path.string() + ": pixel size disagrees with A/H/W metadata");
  }
  return MacPI(A, std::move(px));
}

}  // namespace ddasr
