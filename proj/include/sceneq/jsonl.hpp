#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "json.hpp"
#include "sceneq/util.hpp"

namespace sceneq {

using json = nlohmann::json;

// Line-delimited JSON records. Every pipeline stage reads and writes this
// shape; blank lines are skipped, parse failures report the line number.
inline void forEachJsonl(const std::filesystem::path& path,
                         const std::function<void(const json&, size_t line)>& fn) {
  std::ifstream in(path);
  if (!in) throw SceneqError("cannot open " + path.string());
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const std::exception& e) {
      throw SceneqError(path.string() + ":" + std::to_string(n) + ": bad JSON record: " + e.what());
    }
    fn(rec, n);
  }
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path);
    if (!out_) throw SceneqError("cannot write " + path.string());
  }
  void write(const json& rec) {
    out_ << rec.dump() << "\n";
    ++count_;
  }
  size_t count() const { return count_; }
  void close() { out_.close(); }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  size_t count_ = 0;
};

inline std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SceneqError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void writeFile(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SceneqError("cannot write " + path.string());
  out << content;
}

}  // namespace sceneq
