#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "ddasr/light_field.hpp"

namespace ddasr {

/// Parsed `key=value` metadata file. Blank lines and `#` comments are skipped.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text);
  static KeyValueFile read(const std::filesystem::path& path);

  void write(const std::filesystem::path& path) const;
  std::string str() const;

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct SceneMeta {
  int U = 0;
  int V = 0;
  int H = 0;
  int W = 0;
  std::optional<double> disparity_min;
  std::optional<double> disparity_max;
};

/// Luminance plus optional chroma planes, all in [0, 1].
struct SceneData {
  LightField y;
  std::optional<LightField> cb;
  std::optional<LightField> cr;
  SceneMeta meta;

  bool has_color() const { return cb.has_value() && cr.has_value(); }
};

/// Reads `view_{u:02d}_{v:02d}.png` files (8-bit gray or RGB) plus
/// `scene.meta`. RGB views are converted to BT.601 Y/Cb/Cr.
SceneData read_scene(const std::filesystem::path& dir);

/// Writes a scene directory. Chroma planes, when present, produce RGB views.
void write_scene(const std::filesystem::path& dir, const SceneData& scene);
void write_scene(const std::filesystem::path& dir, const LightField& y);

std::string view_filename(int u, int v);

/// 8-bit grayscale PNG I/O for single images.
void write_png(const std::filesystem::path& path, const Image& img);
Image read_png_gray(const std::filesystem::path& path);

/// MacPI as `<stem>.png` plus `<stem>.meta` recording A, H, W.
void write_macpi(const std::filesystem::path& png_path, const MacPI& m);
MacPI read_macpi(const std::filesystem::path& png_path);

}  // namespace ddasr
