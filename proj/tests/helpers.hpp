#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sceneq/generator.hpp"
#include "sceneq/jsonl.hpp"
#include "sceneq/scenegraph.hpp"

namespace testutil {

inline std::filesystem::path dataDir() { return SCENEQ_DATA_DIR; }

inline std::filesystem::path tmpDir(const std::string& name) {
  auto dir = std::filesystem::path(SCENEQ_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Shared ontology bundle; loading is cheap but not free, so tests reuse one.
inline const sceneq::Ontology& ont() {
  static sceneq::Ontology o = sceneq::Ontology::load(dataDir() / "ontology");
  return o;
}

inline const sceneq::NormalizeTables& tables() {
  static sceneq::NormalizeTables t = sceneq::NormalizeTables::load(dataDir() / "ontology");
  return t;
}

inline sceneq::json rawObject(const std::string& name, double x, double y, double w, double h,
                              std::vector<std::string> attrs = {},
                              std::vector<std::pair<std::string, std::string>> rels = {}) {
  sceneq::json o;
  o["name"] = name;
  o["x"] = x;
  o["y"] = y;
  o["w"] = w;
  o["h"] = h;
  o["attributes"] = attrs;
  sceneq::json r = sceneq::json::array();
  for (auto& [p, t] : rels) r.push_back({{"name", p}, {"object", t}});
  o["relations"] = r;
  return o;
}

inline sceneq::json rawGraph(const std::string& imageId, double w, double h,
                             const sceneq::json& objects) {
  return {{"imageId", imageId}, {"width", w}, {"height", h}, {"objects", objects}};
}

// Small kitchen scene used across test files: a red apple and a yellow
// banana on a large wooden table, a stove at the top right. Geometry puts
// the apple left of the banana and the stove above everything on the table.
inline sceneq::SceneGraph fixtureGraph() {
  sceneq::json objs;
  objs["a1"] = rawObject("apple", 30, 300, 60, 60, {"red", "small"}, {{"on", "t1"}});
  objs["b1"] = rawObject("banana", 520, 310, 80, 40, {"yellow", "small"}, {{"on", "t1"}});
  objs["t1"] = rawObject("table", 20, 280, 600, 180, {"wooden", "brown", "large"});
  objs["d1"] = rawObject("dog", 240, 200, 120, 160, {"brown", "small"}, {{"near", "t1"}});
  objs["s1"] = rawObject("stove", 560, 40, 70, 200, {"white", "metal"});
  return sceneq::normalizeGraph(rawGraph("fixture1", 640, 480, objs), ont(), tables(), 0.3);
}

}  // namespace testutil
