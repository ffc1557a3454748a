#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sceneq/balancing.hpp"
#include "sceneq/entailment.hpp"
#include "sceneq/generator.hpp"

namespace sceneq {

struct Prediction {
  std::string questionId;
  std::string answer;
  json attention;  // object-id or "r,c" grid keys -> probability mass; null if absent
};

std::vector<Prediction> loadPredictions(const std::filesystem::path& path);

struct Ratio {
  long hits = 0, total = 0;
  double pct() const { return total == 0 ? 0.0 : 100.0 * hits / total; }
};

struct MetricReport {
  Ratio overall, binary, open;
  std::map<std::string, Ratio> byStructural;
  std::map<std::string, Ratio> bySemantic;
  std::map<std::string, Ratio> byDetailed;
  std::optional<double> consistency;  // absent when no entailed member was posed
  double validity = 0, plausibility = 0;
  double distribution = 0;
  std::optional<double> grounding;  // absent without attention maps

  json toJson() const;
  std::string table() const;  // human-readable summary
};

// "yes"/"no" gold answers define the binary bucket; everything else is open.
bool isBinaryAnswer(const std::string& gold);

// Per-question answer scope: {yes,no} for binary rows, the two alternatives
// for choose rows, the queried type's values for attribute queries, category
// members for name queries, attribute-type names for common, the compared
// concepts for compare. validAnswer is the validity predicate; a plausible
// answer is additionally required to co-occur with the question's subject in
// the reference corpus (binary and choose scopes are plausible by scope).
std::vector<std::string> answerScope(const QAInstance& q, const Ontology& ont);
bool validAnswer(const QAInstance& q, const std::string& answer, const Ontology& ont);
bool plausibleAnswer(const QAInstance& q, const std::string& answer, const Ontology& ont,
                     const PlausibilityTable& table);

// Chi-square style divergence between gold and predicted answer counts of
// one group, predicted counts normalized to the gold total:
//   sum_a (pred_a - gold_a)^2 / max(gold_a, 0.5)
double groupDivergence(const std::map<std::string, double>& gold,
                       const std::map<std::string, double>& pred);

// Attention mass a prediction places on the question's pointed regions.
// Object keys count fully when pointed; grid cells (square grid inferred
// from the largest index) contribute mass times the fraction of the cell
// covered by the union of pointed boxes. Throws when masses sum > 1 + 1e-6.
double groundingScore(const Prediction& pred, const QAInstance& q, const SceneGraph& g);

// Full evaluation. gold answers are matched lowercase/trimmed; questions
// without a prediction count as wrong. Consistency averages, over correctly
// answered questions with at least one entailed member posed in the corpus,
// the accuracy on those members. Distribution averages groupDivergence over
// global groups with two or more distinct gold answers.
MetricReport evaluate(const std::vector<Prediction>& preds, const std::vector<QAInstance>& gold,
                      const std::vector<EntailedSet>& entailments,
                      const std::vector<SceneGraph>& graphs, const Ontology& ont);

}  // namespace sceneq
