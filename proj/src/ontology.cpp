#include "sceneq/ontology.hpp"

#include <fstream>

#include "sceneq/jsonl.hpp"

namespace sceneq {

std::string kindName(ConceptKind k) {
  switch (k) {
    case ConceptKind::Object: return "object";
    case ConceptKind::Attribute: return "attribute";
    case ConceptKind::Relation: return "relation";
  }
  return "?";
}

namespace {

ConceptKind parseKind(const std::string& s, const std::string& where) {
  if (s == "object") return ConceptKind::Object;
  if (s == "attribute") return ConceptKind::Attribute;
  if (s == "relation") return ConceptKind::Relation;
  throw SceneqError(where + ": unknown kind '" + s + "'");
}

const std::set<std::string> kReservedIds = {"scene", "allObjs", "_", "name",
                                            "weather", "location", "yes", "no"};

// Lines of "a,b" style tables; '#' comments and blank lines allowed.
void forEachCsvLine(const std::filesystem::path& path, size_t minFields,
                    const std::function<void(const std::vector<std::string>&, size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw SceneqError("cannot open " + path.string());
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = splitTrimmed(t, ',');
    if (fields.size() < minFields)
      throw SceneqError(path.string() + ":" + std::to_string(n) + ": expected at least " +
                        std::to_string(minFields) + " fields");
    fn(fields, n);
  }
}

}  // namespace

Ontology Ontology::load(const std::filesystem::path& dir) {
  Ontology ont;

  const std::set<std::string> allowedFields = {"id",  "kind",   "category", "synonyms",
                                               "pos", "plural", "article"};
  forEachJsonl(dir / "concepts.jsonl", [&](const json& rec, size_t line) {
    std::string where = (dir / "concepts.jsonl").string() + ":" + std::to_string(line);
    for (auto it = rec.begin(); it != rec.end(); ++it) {
      if (!allowedFields.count(it.key()))
        throw SceneqError(where + ": unknown field '" + it.key() + "'");
    }
    Concept c;
    c.id = rec.at("id").get<std::string>();
    c.kind = parseKind(rec.at("kind").get<std::string>(), where);
    c.category = rec.at("category").get<std::string>();
    if (rec.contains("synonyms")) c.synonyms = rec["synonyms"].get<std::vector<std::string>>();
    if (rec.contains("pos")) c.pos = rec["pos"].get<std::string>();
    if (rec.contains("plural")) c.plural = rec["plural"].get<std::string>();
    if (rec.contains("article")) c.article = rec["article"].get<std::string>();
    if (c.id.empty()) throw SceneqError(where + ": empty id");
    if (kReservedIds.count(c.id)) throw SceneqError(where + ": id '" + c.id + "' is reserved");
    if (ont.concepts_.count(c.id)) throw SceneqError(where + ": duplicate id '" + c.id + "'");
    if (!c.article.empty() && c.article != "a" && c.article != "an" && c.article != "none")
      throw SceneqError(where + ": bad article '" + c.article + "' for '" + c.id + "'");
    ont.concepts_[c.id] = c;
  });

  forEachCsvLine(dir / "hierarchy.csv", 2, [&](const std::vector<std::string>& f, size_t line) {
    const std::string& child = f[0];
    const std::string& parent = f[1];
    if (ont.categoryParent_.count(child))
      throw SceneqError("hierarchy.csv:" + std::to_string(line) + ": duplicate child '" + child + "'");
    ont.categoryParent_[child] = parent;
    ont.categoryChildren_[parent].push_back(child);
  });

  forEachCsvLine(dir / "exclusions.csv", 2, [&](const std::vector<std::string>& f, size_t) {
    ont.exclusions_.insert({f[0], f[1]});
    ont.exclusions_.insert({f[1], f[0]});
  });

  // type,exclusive[,ordering a|b|c][,moreWord|lessWord]
  forEachCsvLine(dir / "attribute_types.csv", 2, [&](const std::vector<std::string>& f, size_t line) {
    AttributeType t;
    t.name = f[0];
    if (f[1] == "exclusive") t.exclusive = true;
    else if (f[1] == "multi") t.exclusive = false;
    else throw SceneqError("attribute_types.csv:" + std::to_string(line) +
                           ": expected 'exclusive' or 'multi', got '" + f[1] + "'");
    if (f.size() > 2 && !f[2].empty()) t.ordering = splitTrimmed(f[2], '|');
    if (f.size() > 3 && !f[3].empty()) {
      auto words = splitTrimmed(f[3], '|');
      if (words.size() != 2)
        throw SceneqError("attribute_types.csv:" + std::to_string(line) + ": need more|less words");
      t.moreWord = words[0];
      t.lessWord = words[1];
    }
    ont.attributeTypes_[t.name] = t;
  });

  {
    std::ifstream in(dir / "stopwords.txt");
    if (!in) throw SceneqError("cannot open " + (dir / "stopwords.txt").string());
    std::string line;
    while (std::getline(in, line)) {
      std::string t = trim(line);
      if (!t.empty() && t[0] != '#') ont.stopWords_.insert(toLower(t));
    }
  }

  forEachCsvLine(dir / "typos.csv", 2, [&](const std::vector<std::string>& f, size_t) {
    ont.typoFixes_[toLower(f[0])] = toLower(f[1]);
  });

  for (const auto& [id, c] : ont.concepts_) {
    for (const auto& syn : c.synonyms) {
      std::string s = toLower(syn);
      auto it = ont.synonymToId_.find(s);
      if (it != ont.synonymToId_.end() && it->second != id)
        throw SceneqError("synonym '" + s + "' maps to both '" + it->second + "' and '" + id + "'");
      ont.synonymToId_[s] = id;
    }
    ont.categoryConcepts_[c.category].push_back(id);
  }

  ont.validate();
  return ont;
}

void Ontology::validate() const {
  // Single root: exactly one category with no parent entry among parents.
  std::set<std::string> allCats;
  for (const auto& [child, parent] : categoryParent_) {
    allCats.insert(child);
    allCats.insert(parent);
  }
  for (const auto& [cat, ids] : categoryConcepts_) {
    if (!allCats.count(cat))
      throw SceneqError("category '" + cat + "' (used by concept '" + ids.front() +
                        "') missing from hierarchy");
  }
  std::string root;
  for (const auto& cat : allCats) {
    if (!categoryParent_.count(cat)) {
      if (!root.empty()) throw SceneqError("hierarchy has two roots: '" + root + "' and '" + cat + "'");
      root = cat;
    }
  }
  if (root.empty()) throw SceneqError("hierarchy has no root (cycle)");
  const_cast<Ontology*>(this)->root_ = root;

  // Acyclic: walking up from every category must reach the root.
  for (const auto& cat : allCats) {
    std::string cur = cat;
    size_t hops = 0;
    while (cur != root) {
      auto it = categoryParent_.find(cur);
      if (it == categoryParent_.end() || ++hops > allCats.size())
        throw SceneqError("hierarchy cycle or gap at '" + cat + "'");
      cur = it->second;
    }
  }

  for (const auto& [id, c] : concepts_) {
    // Scene globals are modeled as attribute types, so their field names
    // are legal category names even though they are reserved as ids.
    if (kReservedIds.count(c.category) && c.category != "weather" && c.category != "location")
      throw SceneqError("concept '" + id + "' uses reserved category name");
    if (c.kind == ConceptKind::Attribute && !attributeTypes_.count(c.category))
      throw SceneqError("attribute '" + id + "' has category '" + c.category +
                        "' missing from attribute_types.csv");
  }
  for (const auto& [name, t] : attributeTypes_) {
    for (const auto& v : t.ordering) {
      auto it = concepts_.find(v);
      if (it == concepts_.end() || it->second.category != name)
        throw SceneqError("attribute_types.csv: ordering value '" + v + "' is not a '" + name +
                          "' attribute");
    }
  }
}

const Concept* Ontology::find(const std::string& id) const {
  auto it = concepts_.find(id);
  return it == concepts_.end() ? nullptr : &it->second;
}

const Concept& Ontology::at(const std::string& id) const {
  auto it = concepts_.find(id);
  if (it == concepts_.end()) throw SceneqError("unknown concept '" + id + "'");
  return it->second;
}

bool Ontology::isCategory(const std::string& name) const {
  return categoryParent_.count(name) || name == root_;
}

bool Ontology::isKnownName(const std::string& name) const {
  return concepts_.count(name) || isCategory(name);
}

std::optional<std::string> Ontology::normalizeToken(const std::string& raw) const {
  std::string s = toLower(trim(raw));
  if (s.empty()) return std::nullopt;
  auto resolve = [&](const std::string& tok) -> std::optional<std::string> {
    if (concepts_.count(tok)) return tok;
    auto syn = synonymToId_.find(tok);
    if (syn != synonymToId_.end()) return syn->second;
    return std::nullopt;
  };
  auto typo = typoFixes_.find(s);
  if (typo != typoFixes_.end()) s = typo->second;
  if (auto r = resolve(s)) return r;
  // Strip stop words, fix per-word typos, retry.
  std::vector<std::string> kept;
  for (auto& w : splitTrimmed(s, ' ')) {
    if (w.empty() || stopWords_.count(w)) continue;
    auto wt = typoFixes_.find(w);
    kept.push_back(wt == typoFixes_.end() ? w : wt->second);
  }
  if (kept.empty()) return std::nullopt;
  return resolve(join(kept, " "));
}

std::string Ontology::parentOf(const std::string& category) const {
  auto it = categoryParent_.find(category);
  if (it == categoryParent_.end()) throw SceneqError("unknown category '" + category + "'");
  return it->second;
}

std::vector<std::string> Ontology::ancestorsOf(const std::string& conceptOrCategory) const {
  std::vector<std::string> out;
  std::string cur;
  if (auto* c = find(conceptOrCategory)) cur = c->category;
  else if (isCategory(conceptOrCategory)) cur = conceptOrCategory == root_ ? "" : parentOf(conceptOrCategory);
  else throw SceneqError("unknown name '" + conceptOrCategory + "'");
  if (isCategory(conceptOrCategory)) out.push_back(conceptOrCategory);
  while (!cur.empty()) {
    out.push_back(cur);
    cur = cur == root_ ? "" : parentOf(cur);
  }
  return out;
}

std::vector<std::string> Ontology::categoryMembers(const std::string& category) const {
  if (!isCategory(category)) throw SceneqError("unknown category '" + category + "'");
  std::vector<std::string> out;
  std::vector<std::string> work = {category};
  while (!work.empty()) {
    std::string cat = work.back();
    work.pop_back();
    auto ids = categoryConcepts_.find(cat);
    if (ids != categoryConcepts_.end())
      out.insert(out.end(), ids->second.begin(), ids->second.end());
    auto kids = categoryChildren_.find(cat);
    if (kids != categoryChildren_.end())
      work.insert(work.end(), kids->second.begin(), kids->second.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Ontology::conceptMatches(const std::string& conceptId, const std::string& query) const {
  if (conceptId == query) return true;
  if (!isCategory(query)) return false;
  auto* c = find(conceptId);
  if (!c) return false;
  std::string cur = c->category;
  while (true) {
    if (cur == query) return true;
    if (cur == root_) return false;
    auto it = categoryParent_.find(cur);
    if (it == categoryParent_.end()) return false;
    cur = it->second;
  }
}

const AttributeType* Ontology::attributeType(const std::string& name) const {
  auto it = attributeTypes_.find(name);
  return it == attributeTypes_.end() ? nullptr : &it->second;
}

const std::string& Ontology::attributeTypeOf(const std::string& attrId) const {
  const Concept& c = at(attrId);
  if (c.kind != ConceptKind::Attribute)
    throw SceneqError("'" + attrId + "' is not an attribute");
  return c.category;
}

std::vector<std::string> Ontology::attributeTypeNames() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : attributeTypes_) out.push_back(name);
  return out;
}

bool Ontology::excluded(const std::string& a, const std::string& b) const {
  return exclusions_.count({a, b}) > 0;
}

std::string Ontology::pluralOf(const std::string& id) const {
  const Concept* c = find(id);
  if (c && !c->plural.empty()) return c->plural;
  return id + "s";
}

std::string Ontology::articleFor(const std::string& id) const {
  const Concept& c = at(id);
  if (c.article == "an") return "an ";
  if (c.article == "none") return "";
  return "a ";
}

void PlausibilityTable::add(const std::string& subject, const std::string& value, long n) {
  counts_[{subject, value}] += n;
}

long PlausibilityTable::count(const std::string& subject, const std::string& value) const {
  auto it = counts_.find({subject, value});
  return it == counts_.end() ? 0 : it->second;
}

bool plausible(const Ontology& ont, const PlausibilityTable& table,
               const std::string& subject, const std::string& value) {
  if (subject != "scene" && !ont.isKnownName(subject))
    throw SceneqError("plausible: unknown subject '" + subject + "'");
  if (!ont.isKnownName(value)) throw SceneqError("plausible: unknown value '" + value + "'");
  return table.count(subject, value) >= 1;
}

}  // namespace sceneq
