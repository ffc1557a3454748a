#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sceneq/ontology.hpp"
#include "sceneq/program.hpp"
#include "sceneq/scenegraph.hpp"

namespace sceneq {

// Question pattern. Loaded from a JSONL catalog; one record per pattern:
//   {"group": "queryAttr", "program": "<sProg>/query: <type>",
//    "texts": ["What <type> is <s>?", ...], "short": "<answer>",
//    "long": "<sShort> is <answer>.", "constraints": ["type!=position"]}
// Boolean groups replace "long" with "longYes"/"longNo". Text templates
// support <hole> fields, [optional segments] and (a|b) alternates. The
// program template uses the same <hole> names; the per-group binding
// builders fill both from one map.
struct Pattern {
  std::string group;  // catalog row name
  std::string program;
  std::vector<std::string> texts;
  std::string shortAnswer;
  std::string longAnswer;
  std::string longYes, longNo;
  std::vector<std::string> constraints;  // "key=value" / "key!=value"
};

std::vector<Pattern> loadPatterns(const std::filesystem::path& path);

// Unambiguous noun phrase for one object: a program prefix (select, then
// filter/relate steps) that resolves to exactly {target} plus its surface
// forms. mentions carries every concept id the surface names, for
// disclosure checks.
struct Reference {
  std::string target;
  bool direct = false;
  std::string surface;       // "the red apple"
  std::string indefinite;    // "a red apple"
  std::string prefix;        // "select: apple/filter: red"
  std::set<std::string> mentions;
  int depth = 0;  // 0 direct, 1 modifier, 2 relation hop
};

// All unambiguous references to target, cheapest first. Direct references
// require the bare concept to be unique in the graph; deeper ones add one
// attribute/position modifier or one relation hop through another
// referenced object (maxDepth 2 enables hops).
std::vector<Reference> buildReferences(const SceneGraph& g, const Ontology& ont,
                                       const std::string& target, int maxDepth);

struct NoDecoyAvailable : SceneqError {
  using SceneqError::SceneqError;
};

// Plausible-but-false distractor for a question slot. candidates: every
// concept of the truth's attribute type (attribute slots) or category
// (object slots), minus the truth, its exclusion partners, values already
// true for the subject in the graph, and values the corpus never pairs
// with the subject. Sampled by plausibility weight.
std::string selectDecoy(const SceneGraph& g, const Ontology& ont, const PlausibilityTable& table,
                        const std::string& subject, const std::string& truth,
                        const std::vector<std::string>& trueNow, Rng& rng);

struct QAInstance {
  std::string questionId;
  std::string imageId;
  std::string question;
  std::string semantic;  // serialized program
  std::string answer;
  std::string fullAnswer;
  TypeTriple types;
  std::string groupGlobal, groupLocal;
  json annotations;  // {"question": {"i:j": objectId}, "answer": objectId?}
  bool isBalanced = false;
  std::string split;

  json toJson() const;  // generator-stage fields only
  static QAInstance fromJson(const json& record);
};

// One attempted instantiation: hole values for program and text templates,
// grounding ids per reference hole, plausibility subjects and values whose
// disclosure would spoil the question.
struct Binding {
  std::map<std::string, std::string> holes;
  std::map<std::string, std::string> holeObjects;  // hole name -> object id
  std::map<std::string, std::string> tags;         // constraint keys
  std::set<std::string> probed;  // values that must not appear in references
  std::string answerObject;      // object id the answer names, if any
};

struct Rejection {
  std::string imageId;
  std::string group;
  std::string reason;
};

struct GeneratorConfig {
  uint64_t seed = 1;
  int maxDepth = 2;
  int sitesPerGroup = 6;  // per image; caps quadratic site families
  // Object names too often missing from annotations to support "no"
  // existence answers; mirrors the normalize-stage list.
  std::set<std::string> commonlyUnannotated;
};

struct GeneratedCorpus {
  std::vector<QAInstance> questions;
  std::vector<Rejection> rejections;
};

// Realizes one pattern against a binding: picks a text template, resolves
// [optional] and (a|b) segments, substitutes holes, applies article
// agreement, fills and executes the program, renders short/long answers
// and grounding spans. Returns the instance or a rejection reason.
struct InstantiateResult {
  std::optional<QAInstance> instance;
  std::string rejectReason;
};
InstantiateResult instantiate(const SceneGraph& g, const Ontology& ont, const Pattern& pattern,
                              const Binding& binding, Rng& rng);

// Enumerates generation sites for every catalog group over one graph and
// instantiates one randomly chosen applicable pattern per site binding.
// Deterministic for a fixed (graph, patterns, seed): per-image rng streams
// keyed by imageId make corpus generation order-independent.
GeneratedCorpus generateForGraph(const SceneGraph& g, const Ontology& ont,
                                 const PlausibilityTable& table,
                                 const std::vector<Pattern>& patterns,
                                 const GeneratorConfig& cfg);

GeneratedCorpus generateCorpus(const std::vector<SceneGraph>& graphs, const Ontology& ont,
                               const std::vector<Pattern>& patterns, const GeneratorConfig& cfg);

}  // namespace sceneq
