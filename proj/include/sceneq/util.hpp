#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sceneq {

// All recoverable failures (bad input files, bad CLI usage, malformed records)
// surface as SceneqError; the CLI maps them to exit code 2.
class SceneqError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string toLower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<std::string> splitTrimmed(const std::string& s, char sep) {
  auto parts = split(s, sep);
  for (auto& p : parts) p = trim(p);
  return parts;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline bool startsWith(const std::string& s, const std::string& prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic value in [0,1) keyed by strings; used where per-record decisions
// must not depend on iteration order (balancing keep/drop, split assignment).
inline double hash01(uint64_t seed, const std::string& salt, const std::string& key) {
  uint64_t h = fnv1a64(key, fnv1a64(salt, splitmix64(seed)));
  return static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
}

// Seeded RNG with named substreams. Substreams derive from the construction
// seed, not the consumed state, so stream(a) is unaffected by draws on this.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  Rng stream(const std::string& name) const {
    return Rng(splitmix64(seed_ ^ fnv1a64(name)));
  }

  uint64_t u64() { return gen_(); }

  // Unbiased enough for corpus work; avoids std::uniform_int_distribution,
  // whose output is implementation defined.
  uint64_t below(uint64_t n) { return n ? u64() % n : 0; }

  double unit() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    if (v.empty()) throw SceneqError("pick from empty list");
    return v[static_cast<size_t>(below(v.size()))];
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace sceneq
