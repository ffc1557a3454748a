#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sceneq/jsonl.hpp"
#include "sceneq/ontology.hpp"

namespace sceneq {

struct BoundingBox {
  double x = 0, y = 0, w = 0, h = 0;
  double cx() const { return x + w / 2; }
  double cy() const { return y + h / 2; }
};

struct SGObject {
  std::string id;
  std::string name;  // canonical concept id
  BoundingBox box;
  std::vector<std::string> attributes;  // canonical ids, sorted, deduped
  std::set<std::string> positions;      // subset of left/right/top/bottom/middle
};

struct SGRelation {
  std::string subject;  // object id
  std::string predicate;
  std::string object;  // object id
  bool derived = false;
  auto operator<=>(const SGRelation&) const = default;
};

struct SamenessFlag {
  std::string a, b;  // object ids, a < b
  std::string type;
  bool same = false;
};

struct SceneGraph {
  std::string imageId;
  double width = 0, height = 0;
  std::map<std::string, SGObject> objects;
  std::vector<SGRelation> relations;
  std::map<std::string, std::string> globals;  // weather / location -> value id
  std::vector<SamenessFlag> sameness;
  long droppedAnnotations = 0;

  const SGObject& object(const std::string& id) const;
  bool hasEdge(const std::string& subj, const std::string& pred, const std::string& obj) const;
};

// Edge blacklist rule. Each slot is a concept id, "cat:<category>", or "*".
struct PruneRule {
  std::string subject, predicate, object;
};

struct GlobalTrigger {
  std::string trigger;  // object concept that triggers the inference
  std::string field;    // weather | location
  std::string value;    // concept id recorded as the global value
};

// Scene-level normalization tables loaded from the ontology bundle dir:
//   prune_rules.csv, triggers.csv, unannotated.txt
struct NormalizeTables {
  std::vector<PruneRule> pruneRules;
  std::vector<GlobalTrigger> triggers;
  std::set<std::string> commonlyUnannotated;

  static NormalizeTables load(const std::filesystem::path& dir);
};

// Parses one raw record ({imageId, width, height, objects: {...}}), maps
// names through the ontology, drops unresolvable annotations (counted in
// droppedAnnotations) and errors on structural problems: duplicate object
// ids, relation endpoints that do not exist, boxes outside the image.
// Raw spatial edges (left/right/above/below) are dropped here; they are
// re-derived from geometry by augmentPositions.
SceneGraph loadGraph(const json& record, const Ontology& ont);

SceneGraph pruneEdges(SceneGraph g, const Ontology& ont, const std::vector<PruneRule>& rules);

// Tags objects left/right/top/bottom when the box center falls within
// marginFraction of the matching border, middle when untagged, and derives
// pairwise spatial relations for objects whose intervals are disjoint,
// storing both directions. marginFraction must lie in (0, 0.5].
SceneGraph augmentPositions(SceneGraph g, double marginFraction);

// Records same/different flags for every unordered object pair and every
// attribute type present on both.
SceneGraph augmentSameness(SceneGraph g, const Ontology& ont);

// Sets weather/location when the trigger table nominates exactly one value
// for a field; conflicting triggers leave it unset.
SceneGraph inferGlobals(SceneGraph g, const std::vector<GlobalTrigger>& triggers);

enum class Uniqueness { Unique, Multiple, Absent, Unknown };

// Counts graph objects matching a concept or category (descendants count).
// Zero matches is Absent only when the name is not on the commonly
// unannotated list, else Unknown.
Uniqueness uniqueness(const SceneGraph& g, const Ontology& ont,
                      const std::set<std::string>& commonlyUnannotated,
                      const std::string& conceptOrCategory);

size_t countMatching(const SceneGraph& g, const Ontology& ont, const std::string& conceptOrCategory);

// Full normalization chain used by the CLI normalize stage.
SceneGraph normalizeGraph(const json& record, const Ontology& ont, const NormalizeTables& tables,
                          double marginFraction);

// Round-trip serialization of a normalized graph. The record keeps the raw
// input shape plus derived data (positions, derived relations, globals).
json graphToJson(const SceneGraph& g);
SceneGraph graphFromNormalizedJson(const json& record, const Ontology& ont);

std::vector<SceneGraph> loadGraphCorpus(const std::filesystem::path& path, const Ontology& ont,
                                        bool normalized);

// One pass over a corpus recording (subject, attribute) and
// (subject, related object) co-occurrences, lifted to ancestor categories,
// plus ("scene", global value) facts.
PlausibilityTable buildPlausibility(const std::vector<SceneGraph>& corpus, const Ontology& ont);

}  // namespace sceneq
