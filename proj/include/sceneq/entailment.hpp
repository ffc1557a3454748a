#pragma once

#include <string>
#include <vector>

#include "sceneq/generator.hpp"
#include "sceneq/ontology.hpp"
#include "sceneq/program.hpp"
#include "sceneq/scenegraph.hpp"

namespace sceneq {

struct EntailedQuestion {
  std::string semantic;  // serialized program
  std::string answer;
  bool operator==(const EntailedQuestion&) const = default;
};

struct EntailedSet {
  std::string source;  // questionId
  std::vector<EntailedQuestion> members;
};

// Rule metadata, loaded from rules.csv (id,enabled,description). Transforms
// are built in; the table lets deployments switch rules off.
struct EntailmentRules {
  std::set<std::string> enabled;
  static EntailmentRules load(const std::filesystem::path& dir);
  static EntailmentRules all();
  bool on(const std::string& id) const { return enabled.count(id) > 0; }
};

// One application of the rule catalog to a single question. Every produced
// member is sound by construction: rules that need reference uniqueness or
// edge symmetry check the graph before firing. Members never include the
// source program and are deduplicated by serialized form.
//
// Rules (ids in rules.csv):
//   queryToVerify   queryAttr=a      -> verifyAttr a yes; verifyAttr b no and
//                                       chooseAttr {a,b}=a per plausible decoy b
//   verifyToExist   verifyAttr=yes   -> exist yes (same selection chain)
//   spatialInverse  existRel=yes     -> inverse-direction existRel yes (derived
//                                       spatial edges are stored both ways)
//   spatialContra   existRel=yes     -> opposite-relation existRel no, when both
//                                       endpoint concepts are unique in the graph
//   andBranches     logicAnd=yes     -> each conjunct exist yes
//   orBranches      logicOr=no       -> each disjunct exist no
//   sameTransfer    twoSame T=yes    -> queryAttr T on each side, answer = the
//                                       shared value read from the graph
//   allToPairs      allSame T=yes    -> twoSame T yes per referenceable pair
std::vector<EntailedQuestion> entail(const QAInstance& q, const SceneGraph& g,
                                     const Ontology& ont, const PlausibilityTable& table,
                                     const EntailmentRules& rules);

// Iterates entail over newly produced members until fixpoint or maxRounds.
// Intermediate members are requestioned as pseudo-instances; the source is
// excluded from its own closure.
EntailedSet closure(const QAInstance& q, const SceneGraph& g, const Ontology& ont,
                    const PlausibilityTable& table, const EntailmentRules& rules, int maxRounds);

json entailedSetToJson(const EntailedSet& s);
EntailedSet entailedSetFromJson(const json& record);

}  // namespace sceneq
