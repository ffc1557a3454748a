#include "sceneq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sceneq/jsonl.hpp"

namespace sceneq {

std::vector<Prediction> loadPredictions(const std::filesystem::path& path) {
  std::vector<Prediction> out;
  forEachJsonl(path, [&](const json& rec, size_t line) {
    Prediction p;
    try {
      p.questionId = rec.at("questionId").get<std::string>();
      p.answer = rec.at("answer").get<std::string>();
      p.attention = rec.value("attention", json());
    } catch (const json::exception& e) {
      throw SceneqError(path.string() + ":" + std::to_string(line) + ": bad prediction: " +
                        e.what());
    }
    out.push_back(std::move(p));
  });
  return out;
}

bool isBinaryAnswer(const std::string& gold) { return gold == "yes" || gold == "no"; }

namespace {

// Last concrete select/relate target of one branch; empty when none.
std::string branchConcept(const std::vector<Step>& steps) {
  std::string cur;
  for (const auto& s : steps) {
    if (s.op == Op::Select && s.operands[0] != "allObjs" && s.operands[0] != "scene")
      cur = s.operands[0];
    if (s.op == Op::Relate && s.operands[0] != "_") cur = s.operands[0];
  }
  return cur;
}

std::vector<std::string> membersOrSelf(const Ontology& ont, const std::string& name) {
  if (ont.isCategory(name)) return ont.categoryMembers(name);
  return {name};
}

std::vector<std::string> nonPositionTypes(const Ontology& ont) {
  std::vector<std::string> out;
  for (const auto& t : ont.attributeTypeNames())
    if (t != "position") out.push_back(t);
  return out;
}

std::vector<std::string> allObjectConcepts(const Ontology& ont) {
  std::vector<std::string> out;
  for (const auto& [id, c] : ont.concepts())
    if (c.kind == ConceptKind::Object) out.push_back(id);
  return out;
}

}  // namespace

std::vector<std::string> answerScope(const QAInstance& q, const Ontology& ont) {
  Program p = parseProgram(q.semantic);
  const Step& last = p.steps.back();
  const std::string& d = q.types.detailed;

  if (q.types.structural == "verify" || q.types.structural == "logical" || d == "exist" ||
      d == "existRel" || d == "twoSame" || d == "twoDiff" || d == "allSame" || d == "allDiff")
    return {"yes", "no"};
  if (d == "chooseRel")
    return {spatialShortForm(last.operands[0]), spatialShortForm(last.operands[1])};
  if (q.types.structural == "choose") return {last.operands[0], last.operands[1]};
  if (d == "common") return nonPositionTypes(ont);
  if (d == "compare") {
    std::vector<std::string> scope;
    std::vector<std::vector<Step>> branches;
    for (const auto& s : p.steps) {
      if (s.op == Op::Select) branches.push_back({});
      if (!branches.empty()) branches.back().push_back(s);
    }
    for (const auto& b : branches)
      for (const auto& m : membersOrSelf(ont, branchConcept(b))) scope.push_back(m);
    return scope;
  }
  if (d == "queryRel") return allObjectConcepts(ont);
  if (d == "queryObject") return membersOrSelf(ont, branchConcept(p.steps));
  // Attribute or global queries: the queried type's values.
  return ont.categoryMembers(last.typeArg);
}

bool validAnswer(const QAInstance& q, const std::string& answer, const Ontology& ont) {
  auto scope = answerScope(q, ont);
  return std::find(scope.begin(), scope.end(), answer) != scope.end();
}

bool plausibleAnswer(const QAInstance& q, const std::string& answer, const Ontology& ont,
                     const PlausibilityTable& table) {
  if (!validAnswer(q, answer, ont)) return false;
  const std::string& d = q.types.detailed;
  if (isBinaryAnswer(answer) || q.types.structural == "choose" || d == "compare") return true;
  Program p = parseProgram(q.semantic);
  std::string subject = mainSubject(p);
  if (d == "common") {
    for (const auto& m : ont.categoryMembers(answer))
      if (table.count(subject, m) >= 1) return true;
    return false;
  }
  return table.count(subject, answer) >= 1;
}

double groupDivergence(const std::map<std::string, double>& gold,
                       const std::map<std::string, double>& pred) {
  double goldTotal = 0, predTotal = 0;
  for (const auto& [a, c] : gold) goldTotal += c;
  for (const auto& [a, c] : pred) predTotal += c;
  double scale = predTotal > 0 ? goldTotal / predTotal : 0;

  std::set<std::string> keys;
  for (const auto& [a, c] : gold) keys.insert(a);
  for (const auto& [a, c] : pred) keys.insert(a);
  double sum = 0;
  for (const auto& a : keys) {
    double gi = gold.count(a) ? gold.at(a) : 0;
    double pi = (pred.count(a) ? pred.at(a) : 0) * scale;
    sum += (pi - gi) * (pi - gi) / std::max(gi, 0.5);
  }
  return sum;
}

namespace {

struct Rect {
  double x0, y0, x1, y1;
  double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
};

// Exact area of (union of boxes) ∩ cell, by coordinate compression.
double unionAreaInRect(const std::vector<Rect>& boxes, const Rect& cell) {
  std::vector<Rect> clipped;
  std::vector<double> xs, ys;
  for (const auto& b : boxes) {
    Rect c{std::max(b.x0, cell.x0), std::max(b.y0, cell.y0), std::min(b.x1, cell.x1),
           std::min(b.y1, cell.y1)};
    if (c.x1 <= c.x0 || c.y1 <= c.y0) continue;
    clipped.push_back(c);
    xs.push_back(c.x0);
    xs.push_back(c.x1);
    ys.push_back(c.y0);
    ys.push_back(c.y1);
  }
  if (clipped.empty()) return 0;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  double area = 0;
  for (size_t i = 0; i + 1 < xs.size(); ++i)
    for (size_t j = 0; j + 1 < ys.size(); ++j) {
      double cx = (xs[i] + xs[i + 1]) / 2, cy = (ys[j] + ys[j + 1]) / 2;
      for (const auto& b : clipped)
        if (cx > b.x0 && cx < b.x1 && cy > b.y0 && cy < b.y1) {
          area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
          break;
        }
    }
  return area;
}

std::set<std::string> pointedObjects(const QAInstance& q) {
  std::set<std::string> ids;
  if (q.annotations.contains("question"))
    for (const auto& [span, oid] : q.annotations.at("question").items()) {
      (void)span;
      ids.insert(oid.get<std::string>());
    }
  if (q.annotations.contains("answer")) ids.insert(q.annotations.at("answer").get<std::string>());
  return ids;
}

}  // namespace

double groundingScore(const Prediction& pred, const QAInstance& q, const SceneGraph& g) {
  auto pointed = pointedObjects(q);
  std::vector<Rect> boxes;
  for (const auto& oid : pointed) {
    const SGObject& o = g.object(oid);
    boxes.push_back({o.box.x, o.box.y, o.box.x + o.box.w, o.box.y + o.box.h});
  }

  // Grid size from the largest index seen.
  int n = 0;
  double total = 0;
  for (const auto& [key, massJson] : pred.attention.items()) {
    double mass = massJson.get<double>();
    if (mass < 0) throw SceneqError("negative attention mass for '" + key + "'");
    total += mass;
    size_t comma = key.find(',');
    if (comma == std::string::npos) {
      if (!g.objects.count(key))
        throw SceneqError("attention key '" + key + "' is neither a cell nor an object");
      continue;
    }
    int r = std::stoi(key.substr(0, comma));
    int c = std::stoi(key.substr(comma + 1));
    if (r < 0 || c < 0) throw SceneqError("negative attention cell index '" + key + "'");
    n = std::max(n, std::max(r, c) + 1);
  }
  if (total > 1 + 1e-6)
    throw SceneqError("attention masses sum to " + std::to_string(total) + " > 1");

  double score = 0;
  for (const auto& [key, massJson] : pred.attention.items()) {
    double mass = massJson.get<double>();
    size_t comma = key.find(',');
    if (comma == std::string::npos) {
      if (pointed.count(key)) score += mass;
      continue;
    }
    int r = std::stoi(key.substr(0, comma));
    int c = std::stoi(key.substr(comma + 1));
    double cw = g.width / n, ch = g.height / n;
    Rect cell{c * cw, r * ch, (c + 1) * cw, (r + 1) * ch};
    double cellArea = cell.area();
    if (cellArea <= 0) continue;
    score += mass * unionAreaInRect(boxes, cell) / cellArea;
  }
  return score;
}

json MetricReport::toJson() const {
  auto ratio = [](const Ratio& r) {
    return json{{"hits", r.hits}, {"total", r.total}, {"pct", r.pct()}};
  };
  auto ratioMap = [&](const std::map<std::string, Ratio>& m) {
    json j = json::object();
    for (const auto& [k, r] : m) j[k] = ratio(r);
    return j;
  };
  json j{{"accuracy",
          {{"overall", ratio(overall)}, {"binary", ratio(binary)}, {"open", ratio(open)}}},
         {"byStructural", ratioMap(byStructural)},
         {"bySemantic", ratioMap(bySemantic)},
         {"byDetailed", ratioMap(byDetailed)},
         {"validity", validity},
         {"plausibility", plausibility},
         {"distribution", distribution}};
  j["consistency"] = consistency ? json(*consistency) : json();
  j["grounding"] = grounding ? json(*grounding) : json();
  return j;
}

std::string MetricReport::table() const {
  std::ostringstream out;
  char buf[128];
  auto line = [&](const std::string& name, double value, bool present = true) {
    if (!present) {
      std::snprintf(buf, sizeof buf, "%-14s      n/a\n", name.c_str());
    } else {
      std::snprintf(buf, sizeof buf, "%-14s %8.2f\n", name.c_str(), value);
    }
    out << buf;
  };
  line("accuracy", overall.pct());
  line("  binary", binary.pct(), binary.total > 0);
  line("  open", open.pct(), open.total > 0);
  line("consistency", consistency.value_or(0), consistency.has_value());
  line("validity", validity);
  line("plausibility", plausibility);
  line("distribution", distribution);
  line("grounding", grounding.value_or(0), grounding.has_value());
  for (const auto& [k, r] : byStructural) line("  " + k, r.pct());
  return out.str();
}

MetricReport evaluate(const std::vector<Prediction>& preds, const std::vector<QAInstance>& gold,
                      const std::vector<EntailedSet>& entailments,
                      const std::vector<SceneGraph>& graphs, const Ontology& ont) {
  std::map<std::string, const QAInstance*> byId;
  for (const auto& q : gold) byId[q.questionId] = &q;
  std::map<std::string, const Prediction*> predOf;
  for (const auto& p : preds) {
    if (!byId.count(p.questionId))
      throw SceneqError("prediction for unknown question '" + p.questionId + "'");
    predOf[p.questionId] = &p;
  }
  std::map<std::string, const SceneGraph*> graphOf;
  for (const auto& g : graphs) graphOf[g.imageId] = &g;

  PlausibilityTable table = buildPlausibility(graphs, ont);

  auto normalized = [](const std::string& s) { return toLower(trim(s)); };
  auto correct = [&](const QAInstance& q) {
    auto it = predOf.find(q.questionId);
    return it != predOf.end() && normalized(it->second->answer) == normalized(q.answer);
  };

  MetricReport r;
  long valid = 0, plausible = 0;
  for (const auto& q : gold) {
    bool hit = correct(q);
    auto bump = [&](Ratio& ratio) {
      ratio.total++;
      if (hit) ratio.hits++;
    };
    bump(r.overall);
    bump(isBinaryAnswer(normalized(q.answer)) ? r.binary : r.open);
    bump(r.byStructural[q.types.structural]);
    bump(r.bySemantic[q.types.semantic]);
    bump(r.byDetailed[q.types.detailed]);

    auto it = predOf.find(q.questionId);
    if (it != predOf.end()) {
      std::string a = normalized(it->second->answer);
      if (validAnswer(q, a, ont)) {
        ++valid;
        if (plausibleAnswer(q, a, ont, table)) ++plausible;
      }
    }
  }
  long total = static_cast<long>(gold.size());
  r.validity = total ? 100.0 * valid / total : 0;
  r.plausibility = total ? 100.0 * plausible / total : 0;

  // Consistency: accuracy over posed entailed members of correctly answered
  // questions.
  std::map<std::pair<std::string, std::string>, const QAInstance*> posed;
  for (const auto& q : gold) posed[{q.imageId, q.semantic}] = &q;
  double consistencySum = 0;
  long consistencyCount = 0;
  for (const auto& set : entailments) {
    auto src = byId.find(set.source);
    if (src == byId.end() || !correct(*src->second)) continue;
    long hits = 0, posedCount = 0;
    for (const auto& m : set.members) {
      auto it = posed.find({src->second->imageId, m.semantic});
      if (it == posed.end()) continue;
      ++posedCount;
      if (correct(*it->second)) ++hits;
    }
    if (posedCount == 0) continue;
    consistencySum += 100.0 * hits / posedCount;
    ++consistencyCount;
  }
  if (consistencyCount > 0) r.consistency = consistencySum / consistencyCount;

  // Distribution: divergence between gold and predicted answer histograms
  // per global group.
  std::map<std::string, std::map<std::string, double>> goldDist, predDist;
  for (const auto& q : gold) {
    goldDist[q.groupGlobal][normalized(q.answer)] += 1;
    auto it = predOf.find(q.questionId);
    if (it != predOf.end()) predDist[q.groupGlobal][normalized(it->second->answer)] += 1;
  }
  double divSum = 0;
  long divCount = 0;
  for (const auto& [label, dist] : goldDist) {
    if (dist.size() < 2) continue;
    divSum += groupDivergence(dist, predDist.count(label) ? predDist.at(label)
                                                          : std::map<std::string, double>{});
    ++divCount;
  }
  r.distribution = divCount ? divSum / divCount : 0;

  // Grounding: mean attention mass on pointed regions, over predictions
  // that carry attention for questions that point at anything.
  double groundSum = 0;
  long groundCount = 0;
  for (const auto& q : gold) {
    auto it = predOf.find(q.questionId);
    if (it == predOf.end() || it->second->attention.is_null() ||
        !it->second->attention.is_object())
      continue;
    if (pointedObjects(q).empty()) continue;
    auto gIt = graphOf.find(q.imageId);
    if (gIt == graphOf.end())
      throw SceneqError("no scene graph for image '" + q.imageId + "'");
    groundSum += 100.0 * groundingScore(*it->second, q, *gIt->second);
    ++groundCount;
  }
  if (groundCount > 0) r.grounding = groundSum / groundCount;

  return r;
}

}  // namespace sceneq
