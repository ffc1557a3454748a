#pragma once

#include <map>
#include <string>
#include <vector>

#include "sceneq/generator.hpp"

namespace sceneq {

// Balancing partition keys. The global label is the answer-type ("color",
// "name-fruit", "exist"); the local label prefixes it with the question's
// main subject ("apple-color"). Both derive deterministically from the
// program.
struct GroupLabel {
  std::string global;
  std::string local;
};

GroupLabel labelGroups(const Program& p, const TypeTriple& t);

struct BalanceConfig {
  double b = 1.3;      // head/tail mass bound
  double rMin = 0.2;   // consecutive-count ratio floor
  double rMax = 1.0;   // consecutive-count ratio cap
  std::map<std::string, double> typeShares;  // detailed type -> target fraction
  std::vector<double> splitShares = {0.7, 0.1, 0.1, 0.1};
  uint64_t seed = 1;
};

// Answer histogram of one group, kept sorted by descending count.
struct AnswerDistribution {
  std::string label;
  std::vector<std::pair<std::string, double>> entries;

  static AnswerDistribution of(const std::string& label,
                               const std::vector<QAInstance*>& group);
  double total() const;
  double entropyBits() const;  // of the normalized distribution
};

// One forward pass of the head/tail recurrence: walking answers from most
// to least frequent, scale the head down whenever its mass exceeds b times
// the remaining tail, then clamp the next count into [rMin, rMax] times the
// current one. Target counts are real-valued. Single-entry distributions
// are returned unchanged.
AnswerDistribution smooth(const AnswerDistribution& dist, const BalanceConfig& cfg);

struct GroupReport {
  std::string label;
  AnswerDistribution input, target;
  double realizedEntropy = 0;
  long kept = 0;
};

struct BalanceReport {
  std::vector<GroupReport> globalGroups;
  std::vector<GroupReport> localGroups;
  long inputCount = 0;
  long keptCount = 0;
  json toJson() const;
};

// Two-level rejection sampling: smooth every global group and keep each
// instance with probability target/current for its answer, then repeat per
// local group, then downsample detailed types to typeShares when given,
// then drop near-duplicates (same image, detailed type and argument tuple).
// Keep decisions hash on (seed, questionId) so record order is irrelevant.
// Survivors get isBalanced=true.
std::vector<QAInstance> rebalance(const std::vector<QAInstance>& corpus,
                                  const BalanceConfig& cfg, BalanceReport* report);

std::vector<QAInstance> dedupSimilar(const std::vector<QAInstance>& corpus);

// Assigns every image to train/val/test/challenge by seeded-hash ranking:
// images are ordered by hash(seed, imageId) and cut at the cumulative
// share boundaries, so the realized counts match the shares exactly up to
// integer rounding. Questions inherit their image's split.
std::vector<QAInstance> assignSplits(std::vector<QAInstance> corpus, const BalanceConfig& cfg);

}  // namespace sceneq
