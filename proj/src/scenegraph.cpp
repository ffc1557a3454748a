#include "sceneq/scenegraph.hpp"

#include <algorithm>
#include <fstream>

namespace sceneq {

namespace {

const std::set<std::string> kSpatialPredicates = {"to the left of", "to the right of", "above",
                                                  "below"};

void forEachCsv(const std::filesystem::path& path, size_t minFields,
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
      throw SceneqError(path.string() + ":" + std::to_string(n) + ": short line");
    fn(fields, n);
  }
}

bool ruleSlotMatches(const std::string& slot, const std::string& conceptId, const Ontology& ont) {
  if (slot == "*") return true;
  if (startsWith(slot, "cat:")) return ont.conceptMatches(conceptId, slot.substr(4));
  return slot == conceptId;
}

}  // namespace

const SGObject& SceneGraph::object(const std::string& id) const {
  auto it = objects.find(id);
  if (it == objects.end()) throw SceneqError("graph " + imageId + ": no object '" + id + "'");
  return it->second;
}

bool SceneGraph::hasEdge(const std::string& subj, const std::string& pred,
                         const std::string& obj) const {
  for (const auto& r : relations)
    if (r.subject == subj && r.predicate == pred && r.object == obj) return true;
  return false;
}

NormalizeTables NormalizeTables::load(const std::filesystem::path& dir) {
  NormalizeTables t;
  forEachCsv(dir / "prune_rules.csv", 3, [&](const std::vector<std::string>& f, size_t) {
    t.pruneRules.push_back({f[0], f[1], f[2]});
  });
  forEachCsv(dir / "triggers.csv", 3, [&](const std::vector<std::string>& f, size_t line) {
    if (f[1] != "weather" && f[1] != "location")
      throw SceneqError("triggers.csv:" + std::to_string(line) + ": field must be weather|location");
    t.triggers.push_back({f[0], f[1], f[2]});
  });
  std::ifstream in(dir / "unannotated.txt");
  if (!in) throw SceneqError("cannot open " + (dir / "unannotated.txt").string());
  std::string line;
  while (std::getline(in, line)) {
    std::string s = trim(line);
    if (!s.empty() && s[0] != '#') t.commonlyUnannotated.insert(s);
  }
  return t;
}

SceneGraph loadGraph(const json& record, const Ontology& ont) {
  SceneGraph g;
  std::string where = "graph record";
  try {
    if (record.contains("imageId")) g.imageId = record.at("imageId").get<std::string>();
    else throw SceneqError("missing imageId");
    where = "graph " + g.imageId;
    g.width = record.at("width").get<double>();
    g.height = record.at("height").get<double>();
    if (g.width <= 0 || g.height <= 0) throw SceneqError(where + ": non-positive image size");

    struct RawRel { std::string subj, name, obj; };
    std::vector<RawRel> rawRels;

    const json& objs = record.at("objects");
    for (auto it = objs.begin(); it != objs.end(); ++it) {
      const std::string& oid = it.key();
      const json& o = it.value();
      if (g.objects.count(oid)) throw SceneqError(where + ": duplicate object id '" + oid + "'");
      auto name = ont.normalizeToken(o.at("name").get<std::string>());
      if (!name) {
        ++g.droppedAnnotations;
        continue;  // whole object unresolvable
      }
      SGObject obj;
      obj.id = oid;
      obj.name = *name;
      obj.box.x = o.at("x").get<double>();
      obj.box.y = o.at("y").get<double>();
      obj.box.w = o.at("w").get<double>();
      obj.box.h = o.at("h").get<double>();
      if (obj.box.w <= 0 || obj.box.h <= 0)
        throw SceneqError(where + ": object '" + oid + "' has empty box");
      if (obj.box.x < 0 || obj.box.y < 0 || obj.box.x + obj.box.w > g.width ||
          obj.box.y + obj.box.h > g.height)
        throw SceneqError(where + ": object '" + oid + "' box outside image");
      if (o.contains("attributes")) {
        for (const auto& a : o.at("attributes")) {
          auto attr = ont.normalizeToken(a.get<std::string>());
          if (!attr || ont.at(*attr).kind != ConceptKind::Attribute) {
            ++g.droppedAnnotations;
            continue;
          }
          obj.attributes.push_back(*attr);
        }
      }
      if (o.contains("relations")) {
        for (const auto& r : o.at("relations")) {
          rawRels.push_back({oid, r.at("name").get<std::string>(), r.at("object").get<std::string>()});
        }
      }
      g.objects[oid] = obj;
    }

    for (const auto& rr : rawRels) {
      if (!g.objects.count(rr.subj)) continue;  // subject itself was dropped above
      if (!objs.contains(rr.obj)) throw SceneqError(where + ": relation endpoint '" + rr.obj +
                                                    "' does not exist");
      auto pred = ont.normalizeToken(rr.name);
      if (!pred || ont.at(*pred).kind != ConceptKind::Relation) {
        ++g.droppedAnnotations;
        continue;
      }
      if (!g.objects.count(rr.obj)) {
        ++g.droppedAnnotations;  // endpoint object was unresolvable
        continue;
      }
      if (kSpatialPredicates.count(*pred)) continue;  // re-derived from geometry later
      g.relations.push_back({rr.subj, *pred, rr.obj, false});
    }

    // Dedup attributes and enforce one value per exclusive type.
    for (auto& [oid, obj] : g.objects) {
      std::sort(obj.attributes.begin(), obj.attributes.end());
      obj.attributes.erase(std::unique(obj.attributes.begin(), obj.attributes.end()),
                           obj.attributes.end());
      std::map<std::string, std::string> seenExclusive;
      std::vector<std::string> kept;
      for (const auto& a : obj.attributes) {
        const std::string& type = ont.attributeTypeOf(a);
        const AttributeType* t = ont.attributeType(type);
        if (t && t->exclusive) {
          auto prev = seenExclusive.find(type);
          if (prev != seenExclusive.end()) {
            ++g.droppedAnnotations;  // keep the first value, drop the clash
            continue;
          }
          seenExclusive[type] = a;
        }
        kept.push_back(a);
      }
      obj.attributes = kept;
    }
    std::sort(g.relations.begin(), g.relations.end());
    g.relations.erase(std::unique(g.relations.begin(), g.relations.end()), g.relations.end());
  } catch (const json::exception& e) {
    throw SceneqError(where + ": malformed record: " + e.what());
  }
  return g;
}

SceneGraph pruneEdges(SceneGraph g, const Ontology& ont, const std::vector<PruneRule>& rules) {
  std::vector<SGRelation> kept;
  for (const auto& r : g.relations) {
    const std::string& sc = g.object(r.subject).name;
    const std::string& oc = g.object(r.object).name;
    bool blacklisted = false;
    for (const auto& rule : rules) {
      if (ruleSlotMatches(rule.subject, sc, ont) && rule.predicate == r.predicate &&
          ruleSlotMatches(rule.object, oc, ont)) {
        blacklisted = true;
        break;
      }
    }
    if (!blacklisted) kept.push_back(r);
  }
  g.relations = kept;
  return g;
}

SceneGraph augmentPositions(SceneGraph g, double marginFraction) {
  if (!(marginFraction > 0 && marginFraction <= 0.5))
    throw SceneqError("marginFraction must be in (0, 0.5], got " + std::to_string(marginFraction));

  for (auto& [id, o] : g.objects) {
    o.positions.clear();
    if (o.box.cx() <= marginFraction * g.width) o.positions.insert("left");
    if (o.box.cx() >= (1 - marginFraction) * g.width) o.positions.insert("right");
    if (o.box.cy() <= marginFraction * g.height) o.positions.insert("top");
    if (o.box.cy() >= (1 - marginFraction) * g.height) o.positions.insert("bottom");
    if (o.positions.empty()) o.positions.insert("middle");
  }

  std::vector<SGRelation> kept;
  for (const auto& r : g.relations)
    if (!kSpatialPredicates.count(r.predicate)) kept.push_back(r);
  g.relations = kept;

  std::vector<SGRelation> derived;
  for (const auto& [ida, a] : g.objects) {
    for (const auto& [idb, b] : g.objects) {
      if (ida >= idb) continue;
      // Horizontal: intervals must be disjoint, both directions stored.
      if (a.box.x + a.box.w <= b.box.x) {
        derived.push_back({ida, "to the left of", idb, true});
        derived.push_back({idb, "to the right of", ida, true});
      } else if (b.box.x + b.box.w <= a.box.x) {
        derived.push_back({idb, "to the left of", ida, true});
        derived.push_back({ida, "to the right of", idb, true});
      }
      if (a.box.y + a.box.h <= b.box.y) {
        derived.push_back({ida, "above", idb, true});
        derived.push_back({idb, "below", ida, true});
      } else if (b.box.y + b.box.h <= a.box.y) {
        derived.push_back({idb, "above", ida, true});
        derived.push_back({ida, "below", idb, true});
      }
    }
  }
  std::sort(derived.begin(), derived.end());
  g.relations.insert(g.relations.end(), derived.begin(), derived.end());
  return g;
}

SceneGraph augmentSameness(SceneGraph g, const Ontology& ont) {
  g.sameness.clear();
  auto valueOf = [&](const SGObject& o, const std::string& type) -> std::optional<std::string> {
    std::optional<std::string> found;
    for (const auto& a : o.attributes) {
      if (ont.attributeTypeOf(a) == type) {
        if (found) return std::nullopt;  // multi-valued: not comparable
        found = a;
      }
    }
    return found;
  };
  for (auto ia = g.objects.begin(); ia != g.objects.end(); ++ia) {
    for (auto ib = std::next(ia); ib != g.objects.end(); ++ib) {
      std::set<std::string> types;
      for (const auto& a : ia->second.attributes) types.insert(ont.attributeTypeOf(a));
      for (const auto& type : types) {
        auto va = valueOf(ia->second, type);
        auto vb = valueOf(ib->second, type);
        if (va && vb) g.sameness.push_back({ia->first, ib->first, type, *va == *vb});
      }
    }
  }
  return g;
}

SceneGraph inferGlobals(SceneGraph g, const std::vector<GlobalTrigger>& triggers) {
  std::map<std::string, std::set<std::string>> candidates;
  for (const auto& [id, o] : g.objects)
    for (const auto& t : triggers)
      if (o.name == t.trigger) candidates[t.field].insert(t.value);
  g.globals.clear();
  for (const auto& [field, values] : candidates)
    if (values.size() == 1) g.globals[field] = *values.begin();
  return g;
}

size_t countMatching(const SceneGraph& g, const Ontology& ont, const std::string& name) {
  size_t n = 0;
  for (const auto& [id, o] : g.objects)
    if (ont.conceptMatches(o.name, name)) ++n;
  return n;
}

Uniqueness uniqueness(const SceneGraph& g, const Ontology& ont,
                      const std::set<std::string>& commonlyUnannotated, const std::string& name) {
  size_t n = countMatching(g, ont, name);
  if (n == 1) return Uniqueness::Unique;
  if (n > 1) return Uniqueness::Multiple;
  return commonlyUnannotated.count(name) ? Uniqueness::Unknown : Uniqueness::Absent;
}

SceneGraph normalizeGraph(const json& record, const Ontology& ont, const NormalizeTables& tables,
                          double marginFraction) {
  SceneGraph g = loadGraph(record, ont);
  g = pruneEdges(std::move(g), ont, tables.pruneRules);
  g = augmentPositions(std::move(g), marginFraction);
  g = augmentSameness(std::move(g), ont);
  g = inferGlobals(std::move(g), tables.triggers);
  // Canonical relation order, so reloading a serialized graph is a no-op.
  std::sort(g.relations.begin(), g.relations.end());
  return g;
}

json graphToJson(const SceneGraph& g) {
  json objs = json::object();
  for (const auto& [id, o] : g.objects) {
    json rels = json::array();
    for (const auto& r : g.relations) {
      if (r.subject != id) continue;
      rels.push_back({{"name", r.predicate}, {"object", r.object}, {"derived", r.derived}});
    }
    objs[id] = {{"name", o.name},
                {"x", o.box.x},
                {"y", o.box.y},
                {"w", o.box.w},
                {"h", o.box.h},
                {"attributes", o.attributes},
                {"positions", std::vector<std::string>(o.positions.begin(), o.positions.end())},
                {"relations", rels}};
  }
  json rec = {{"imageId", g.imageId},
              {"width", g.width},
              {"height", g.height},
              {"objects", objs},
              {"droppedAnnotations", g.droppedAnnotations}};
  for (const auto& [field, value] : g.globals) rec[field] = value;
  return rec;
}

SceneGraph graphFromNormalizedJson(const json& record, const Ontology& ont) {
  SceneGraph g;
  g.imageId = record.at("imageId").get<std::string>();
  g.width = record.at("width").get<double>();
  g.height = record.at("height").get<double>();
  if (record.contains("droppedAnnotations"))
    g.droppedAnnotations = record.at("droppedAnnotations").get<long>();
  if (record.contains("weather")) g.globals["weather"] = record.at("weather").get<std::string>();
  if (record.contains("location")) g.globals["location"] = record.at("location").get<std::string>();
  const json& objs = record.at("objects");
  for (auto it = objs.begin(); it != objs.end(); ++it) {
    const json& o = it.value();
    SGObject obj;
    obj.id = it.key();
    obj.name = o.at("name").get<std::string>();
    if (!ont.find(obj.name))
      throw SceneqError("graph " + g.imageId + ": unknown concept '" + obj.name +
                        "' in normalized record");
    obj.box = {o.at("x").get<double>(), o.at("y").get<double>(), o.at("w").get<double>(),
               o.at("h").get<double>()};
    obj.attributes = o.at("attributes").get<std::vector<std::string>>();
    for (const auto& p : o.at("positions")) obj.positions.insert(p.get<std::string>());
    for (const auto& r : o.at("relations"))
      g.relations.push_back({obj.id, r.at("name").get<std::string>(),
                             r.at("object").get<std::string>(), r.value("derived", false)});
    g.objects[obj.id] = obj;
  }
  for (const auto& r : g.relations) {
    if (!g.objects.count(r.object))
      throw SceneqError("graph " + g.imageId + ": relation endpoint '" + r.object + "' missing");
  }
  std::sort(g.relations.begin(), g.relations.end());
  g = augmentSameness(std::move(g), ont);
  return g;
}

std::vector<SceneGraph> loadGraphCorpus(const std::filesystem::path& path, const Ontology& ont,
                                        bool normalized) {
  std::vector<SceneGraph> out;
  std::set<std::string> seen;
  forEachJsonl(path, [&](const json& rec, size_t line) {
    SceneGraph g = normalized ? graphFromNormalizedJson(rec, ont) : loadGraph(rec, ont);
    if (!seen.insert(g.imageId).second)
      throw SceneqError(path.string() + ":" + std::to_string(line) + ": duplicate imageId '" +
                        g.imageId + "'");
    out.push_back(std::move(g));
  });
  return out;
}

PlausibilityTable buildPlausibility(const std::vector<SceneGraph>& corpus, const Ontology& ont) {
  PlausibilityTable table;
  auto lift = [&](const std::string& subject, const std::string& value) {
    table.add(subject, value);
    for (const auto& anc : ont.ancestorsOf(subject)) table.add(anc, value);
  };
  for (const auto& g : corpus) {
    for (const auto& [id, o] : g.objects) {
      for (const auto& a : o.attributes) lift(o.name, a);
      for (const auto& p : o.positions) lift(o.name, p);
      for (const auto& anc : ont.ancestorsOf(o.name)) table.add(anc, o.name);
      table.add(o.name, o.name);
    }
    for (const auto& r : g.relations) {
      const std::string& sc = g.object(r.subject).name;
      const std::string& oc = g.object(r.object).name;
      lift(sc, oc);
      lift(oc, sc);
    }
    for (const auto& [field, value] : g.globals) table.add("scene", value);
  }
  return table;
}

}  // namespace sceneq
