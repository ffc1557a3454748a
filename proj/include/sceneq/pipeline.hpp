#pragma once

#include <filesystem>
#include <string>

#include "sceneq/balancing.hpp"
#include "sceneq/entailment.hpp"
#include "sceneq/generator.hpp"
#include "sceneq/metrics.hpp"

namespace sceneq {

// File plumbing for the pipeline stages. Loaded from a JSON config file;
// individual paths can be overridden per invocation. Every output gets a
// sibling <output>.manifest.json echoing the stage configuration and
// record counts (no timestamps, so reruns are byte-identical).
struct PipelineConfig {
  std::filesystem::path ontologyDir;
  std::filesystem::path graphs;            // raw graphs jsonl
  std::filesystem::path normalizedGraphs;  // normalize output
  std::filesystem::path patterns;
  std::filesystem::path questions;          // generate output
  std::filesystem::path entailments;        // entail output
  std::filesystem::path balancedQuestions;  // balance output
  std::filesystem::path splitQuestions;     // split output
  std::filesystem::path predictions;
  std::filesystem::path report;
  double marginFraction = 0.15;
  GeneratorConfig generator;
  BalanceConfig balance;

  static PipelineConfig fromFile(const std::filesystem::path& path);
  static PipelineConfig fromJson(const json& j, const std::filesystem::path& baseDir);
};

struct StageResult {
  std::string stage;
  json manifest;
};

StageResult runNormalize(const PipelineConfig& cfg);
StageResult runGenerate(const PipelineConfig& cfg);
StageResult runEntail(const PipelineConfig& cfg);
StageResult runBalance(const PipelineConfig& cfg);
StageResult runSplit(const PipelineConfig& cfg);
StageResult runEvaluate(const PipelineConfig& cfg);

// Corpus statistics: counts per structural/semantic/detailed type,
// question-length histogram, question and answer vocabulary sizes.
json corpusStats(const std::vector<QAInstance>& corpus);

std::vector<QAInstance> loadQuestions(const std::filesystem::path& path);
std::vector<EntailedSet> loadEntailments(const std::filesystem::path& path);

}  // namespace sceneq
