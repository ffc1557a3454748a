#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sceneq/util.hpp"

namespace sceneq {

enum class ConceptKind { Object, Attribute, Relation };

std::string kindName(ConceptKind k);

struct Concept {
  std::string id;
  ConceptKind kind = ConceptKind::Object;
  std::string category;
  std::vector<std::string> synonyms;
  std::string pos;      // noun | adj | verb | prep
  std::string plural;   // empty: regular +s for nouns, none for the rest
  std::string article;  // "a" | "an" | "none"
};

// Per attribute-type metadata that does not fit the concept records:
// whether a type admits a single value per object, the comparison ordering
// (ascending), and comparative surface forms used in question text.
struct AttributeType {
  std::string name;
  bool exclusive = false;
  std::vector<std::string> ordering;
  std::string moreWord;
  std::string lessWord;
};

// Concept vocabulary, category hierarchy, decoy exclusions and token
// normalization tables, loaded from one bundle directory:
//   concepts.jsonl, hierarchy.csv, exclusions.csv, attribute_types.csv,
//   stopwords.txt, typos.csv
class Ontology {
 public:
  static Ontology load(const std::filesystem::path& dir);

  const Concept* find(const std::string& id) const;
  const Concept& at(const std::string& id) const;  // throws naming the id
  bool isCategory(const std::string& name) const;
  bool isKnownName(const std::string& name) const;  // concept or category

  // Token normalization: lowercase, strip stop words, fix typos, map
  // synonyms. Returns the canonical concept id, or nullopt when unknown.
  // Idempotent: normalizing an id yields that id.
  std::optional<std::string> normalizeToken(const std::string& raw) const;

  // Hierarchy. Categories form a single-rooted acyclic tree; every concept
  // hangs off its category.
  const std::string& root() const { return root_; }
  std::string parentOf(const std::string& category) const;
  std::vector<std::string> ancestorsOf(const std::string& conceptOrCategory) const;
  // All concept ids of the given kind under a category (transitive).
  std::vector<std::string> categoryMembers(const std::string& category) const;
  // True when an object's concept id satisfies a query id that may be the
  // concept itself or any ancestor category.
  bool conceptMatches(const std::string& conceptId, const std::string& query) const;

  const AttributeType* attributeType(const std::string& name) const;
  // Attribute-type of an attribute concept (its category). Throws on
  // non-attribute ids.
  const std::string& attributeTypeOf(const std::string& attrId) const;
  std::vector<std::string> attributeTypeNames() const;

  bool excluded(const std::string& a, const std::string& b) const;

  // Surface helpers for text realization. The id itself is the display
  // form; relations may carry a preferred phrase as their first synonym.
  std::string pluralOf(const std::string& id) const;
  std::string articleFor(const std::string& id) const;  // "a " / "an " / ""

  const std::map<std::string, Concept>& concepts() const { return concepts_; }

 private:
  std::map<std::string, Concept> concepts_;
  std::map<std::string, std::string> synonymToId_;
  std::map<std::string, std::string> typoFixes_;
  std::set<std::string> stopWords_;
  std::map<std::string, std::string> categoryParent_;
  std::map<std::string, std::vector<std::string>> categoryChildren_;  // category -> subcategories
  std::map<std::string, std::vector<std::string>> categoryConcepts_;  // category -> direct concept ids
  std::map<std::string, AttributeType> attributeTypes_;
  std::set<std::pair<std::string, std::string>> exclusions_;  // ordered pairs, both directions
  std::string root_;

  void validate() const;
};

// Corpus co-occurrence counts keyed by (subject concept, value). Subjects
// are lifted to their ancestor categories so category-level questions can
// be checked. Built by one pass over a graph corpus; see buildPlausibility
// in scenegraph.hpp.
class PlausibilityTable {
 public:
  void add(const std::string& subject, const std::string& value, long n = 1);
  long count(const std::string& subject, const std::string& value) const;
  size_t size() const { return counts_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, long> counts_;
};

// A (subject, value) pair is plausible when it occurs at least once in the
// reference corpus. Unknown ids are an error, not "implausible". The
// pseudo-subject "scene" covers scene-level values.
bool plausible(const Ontology& ont, const PlausibilityTable& table,
               const std::string& subject, const std::string& value);

}  // namespace sceneq
