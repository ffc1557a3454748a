#include "sceneq/entailment.hpp"

#include <algorithm>
#include <fstream>

#include "sceneq/jsonl.hpp"

namespace sceneq {

namespace {

const std::vector<std::string>& ruleIds() {
  static const std::vector<std::string> ids = {"queryToVerify", "verifyToExist", "spatialInverse",
                                               "spatialContra", "andBranches",   "orBranches",
                                               "sameTransfer",  "allToPairs"};
  return ids;
}

bool isChainOp(Op op) { return op == Op::Select || op == Op::Filter || op == Op::Relate; }

// Leading select/filter/relate steps of the program, or empty when the
// program prefix is not a plain chain.
std::vector<Step> chainPrefix(const Program& p) {
  std::vector<Step> steps;
  for (size_t i = 0; i + 1 < p.steps.size(); ++i) {
    if (!isChainOp(p.steps[i].op)) return {};
    steps.push_back(p.steps[i]);
  }
  return steps;
}

// Splits a chain1/exist/chain2/exist/(and|or) program into its two chains.
// Returns false when the shape differs.
bool splitLogicChains(const Program& p, std::vector<Step>& c1, std::vector<Step>& c2) {
  std::vector<std::vector<Step>> chains;
  size_t i = 0;
  while (i < p.steps.size() && chains.size() < 2) {
    if (p.steps[i].op != Op::Select) return false;
    std::vector<Step> chain;
    while (i < p.steps.size() && isChainOp(p.steps[i].op)) {
      if (p.steps[i].op == Op::Select && !chain.empty()) break;
      chain.push_back(p.steps[i]);
      ++i;
    }
    if (i >= p.steps.size() || p.steps[i].op != Op::Exist) return false;
    ++i;
    chains.push_back(std::move(chain));
  }
  if (chains.size() != 2 || i + 1 != p.steps.size()) return false;
  Op last = p.steps.back().op;
  if (last != Op::And && last != Op::Or) return false;
  c1 = chains[0];
  c2 = chains[1];
  return true;
}

std::string serializeSteps(std::vector<Step> steps) { return serializeProgram(Program{std::move(steps)}); }

void addMember(std::vector<EntailedQuestion>& out, std::vector<Step> steps,
               const std::string& answer) {
  out.push_back({serializeSteps(std::move(steps)), answer});
}

const std::map<std::string, std::string>& spatialOpposites() {
  static const std::map<std::string, std::string> m = {{"to the left of", "to the right of"},
                                                       {"to the right of", "to the left of"},
                                                       {"above", "below"},
                                                       {"below", "above"}};
  return m;
}

void ruleQueryToVerify(const Program& p, const std::string& answer, const SceneGraph& g,
                       const Ontology& ont, const PlausibilityTable& table,
                       std::vector<EntailedQuestion>& out) {
  auto chain = chainPrefix(p);
  if (chain.empty()) return;
  const std::string& type = p.steps.back().typeArg;

  std::vector<Step> verifyYes = chain;
  verifyYes.push_back(Step{Op::VerifyAttr, type, {answer}, ""});
  addMember(out, verifyYes, "yes");

  auto ids = resolveSelection(chain, g, ont);
  if (ids.size() != 1) return;
  const SGObject& o = g.object(ids[0]);
  std::vector<std::string> trueNow;
  if (type == "position")
    trueNow.assign(o.positions.begin(), o.positions.end());
  else
    for (const auto& a : o.attributes)
      if (ont.attributeTypeOf(a) == type) trueNow.push_back(a);

  std::string subject = mainSubject(p);
  std::vector<std::string> pool =
      type == "position" ? std::vector<std::string>{} : ont.categoryMembers(type);
  for (const auto& b : pool) {
    if (b == answer || ont.excluded(b, answer)) continue;
    if (std::find(trueNow.begin(), trueNow.end(), b) != trueNow.end()) continue;
    if (table.count(subject, b) < 1) continue;
    std::vector<Step> verifyNo = chain;
    verifyNo.push_back(Step{Op::VerifyAttr, type, {b}, ""});
    addMember(out, verifyNo, "no");
    std::vector<Step> choose = chain;
    choose.push_back(Step{Op::Choose, type, {std::min(answer, b), std::max(answer, b)}, ""});
    addMember(out, choose, answer);
  }
}

void ruleVerifyToExist(const Program& p, std::vector<EntailedQuestion>& out) {
  auto chain = chainPrefix(p);
  if (chain.empty()) return;
  if (chain[0].operands[0] == "scene") return;
  chain.push_back(Step{Op::Exist, "", {}, ""});
  addMember(out, chain, "yes");
}

// Splits <anchorChain>/relate(subject,R): C off a spatial existRel program
// and names the concept of the resolved anchor object. The anchor chain may
// be deep (filters, relation hops), so the head select operand is not
// trustworthy; the resolved object is.
bool spatialRelParts(const Program& p, const SceneGraph& g, const Ontology& ont, Step& rel,
                     std::string& anchorConcept) {
  auto chain = chainPrefix(p);
  if (chain.size() < 2 || chain.back().op != Op::Relate) return false;
  rel = chain.back();
  if (!spatialOpposites().count(rel.typeArg)) return false;
  if (rel.direction != "subject" || rel.operands[0] == "_") return false;
  if (chain[0].op != Op::Select || chain[0].operands[0] == "scene") return false;
  chain.pop_back();
  auto ids = resolveSelection(chain, g, ont);
  if (ids.size() != 1) return false;
  anchorConcept = g.object(ids[0]).name;
  return true;
}

void ruleSpatialInverse(const Program& p, const SceneGraph& g, const Ontology& ont,
                        std::vector<EntailedQuestion>& out) {
  Step rel;
  std::string anchorConcept;
  if (!spatialRelParts(p, g, ont, rel, anchorConcept)) return;
  // An edge (x,R,a) is stored with its inverse (a,R⁻¹,x), so the swapped
  // question is sound without any uniqueness gate.
  std::vector<Step> steps = {Step{Op::Select, "", {rel.operands[0]}, ""},
                             Step{Op::Relate, spatialOpposites().at(rel.typeArg),
                                  {anchorConcept}, "subject"},
                             Step{Op::Exist, "", {}, ""}};
  addMember(out, steps, "yes");
}

void ruleSpatialContra(const Program& p, const SceneGraph& g, const Ontology& ont,
                       std::vector<EntailedQuestion>& out) {
  Step rel;
  std::string anchorConcept;
  if (!spatialRelParts(p, g, ont, rel, anchorConcept)) return;
  // Sound only when both names are unique: the one pair lies on one side of
  // the axis, so the opposite relation provably fails.
  if (countMatching(g, ont, rel.operands[0]) != 1) return;
  if (countMatching(g, ont, anchorConcept) != 1) return;
  std::vector<Step> steps = {Step{Op::Select, "", {anchorConcept}, ""},
                             Step{Op::Relate, spatialOpposites().at(rel.typeArg),
                                  {rel.operands[0]}, "subject"},
                             Step{Op::Exist, "", {}, ""}};
  addMember(out, steps, "no");
}

void ruleLogicBranches(const Program& p, const std::string& wanted,
                       std::vector<EntailedQuestion>& out) {
  std::vector<Step> c1, c2;
  if (!splitLogicChains(p, c1, c2)) return;
  for (auto* chain : {&c1, &c2}) {
    std::vector<Step> steps = *chain;
    steps.push_back(Step{Op::Exist, "", {}, ""});
    addMember(out, steps, wanted);
  }
}

// twoSame T == yes: both sides carry the same graph value of T.
void ruleSameTransfer(const Program& p, const SceneGraph& g, const Ontology& ont,
                      std::vector<EntailedQuestion>& out) {
  const std::string& type = p.steps.back().typeArg;
  if (type.empty() || type == "position") return;
  std::vector<std::vector<Step>> chains;
  for (size_t i = 0; i + 1 < p.steps.size(); ++i) {
    if (p.steps[i].op == Op::Select) chains.push_back({});
    if (chains.empty() || !isChainOp(p.steps[i].op)) return;
    chains.back().push_back(p.steps[i]);
  }
  if (chains.size() != 2) return;
  std::string shared;
  for (const auto& chain : chains) {
    auto ids = resolveSelection(chain, g, ont);
    if (ids.size() != 1) return;
    std::string value;
    for (const auto& a : g.object(ids[0]).attributes)
      if (ont.attributeTypeOf(a) == type) {
        if (!value.empty()) return;  // multi-valued: the query would be ambiguous
        value = a;
      }
    if (value.empty()) return;
    if (shared.empty()) shared = value;
    if (value != shared) return;  // answer disagrees with the graph; stay silent
  }
  for (const auto& chain : chains) {
    std::vector<Step> steps = chain;
    steps.push_back(Step{Op::Query, type, {}, ""});
    addMember(out, steps, shared);
  }
}

void ruleAllToPairs(const Program& p, const SceneGraph& g, const Ontology& ont,
                    std::vector<EntailedQuestion>& out) {
  const std::string& type = p.steps.back().typeArg;
  if (type.empty() || p.steps.size() != 2 || p.steps[0].op != Op::Select) return;
  const std::string& cat = p.steps[0].operands[0];
  if (cat == "scene") return;
  std::vector<std::string> members;
  for (const auto& [oid, o] : g.objects)
    if (cat == "allObjs" || ont.conceptMatches(o.name, cat)) members.push_back(oid);
  for (size_t i = 0; i < members.size(); ++i)
    for (size_t j = i + 1; j < members.size(); ++j) {
      auto r1 = buildReferences(g, ont, members[i], 1);
      auto r2 = buildReferences(g, ont, members[j], 1);
      if (r1.empty() || r2.empty()) continue;
      Program pair = parseProgram(r1[0].prefix + "/" + r2[0].prefix + "/same " + type);
      addMember(out, pair.steps, "yes");
    }
}

}  // namespace

EntailmentRules EntailmentRules::all() {
  EntailmentRules r;
  r.enabled.insert(ruleIds().begin(), ruleIds().end());
  return r;
}

EntailmentRules EntailmentRules::load(const std::filesystem::path& dir) {
  auto path = dir / "rules.csv";
  std::ifstream in(path);
  if (!in) throw SceneqError("cannot open " + path.string());
  EntailmentRules r;
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto parts = splitTrimmed(line, ',');
    if (parts.size() < 2)
      throw SceneqError(path.string() + ":" + std::to_string(n) + ": want id,enabled[,description]");
    const std::string& id = parts[0];
    if (std::find(ruleIds().begin(), ruleIds().end(), id) == ruleIds().end())
      throw SceneqError(path.string() + ":" + std::to_string(n) + ": unknown rule '" + id + "'");
    std::string flag = toLower(parts[1]);
    if (flag == "1" || flag == "true" || flag == "yes") r.enabled.insert(id);
  }
  return r;
}

std::vector<EntailedQuestion> entail(const QAInstance& q, const SceneGraph& g, const Ontology& ont,
                                     const PlausibilityTable& table,
                                     const EntailmentRules& rules) {
  Program p = parseProgram(q.semantic);
  TypeTriple t = classify(p);
  std::vector<EntailedQuestion> out;

  if (t.detailed == "queryAttr" && rules.on("queryToVerify") && q.answer != "yes" &&
      q.answer != "no")
    ruleQueryToVerify(p, q.answer, g, ont, table, out);
  if (t.detailed == "verifyAttr" && q.answer == "yes" && rules.on("verifyToExist"))
    ruleVerifyToExist(p, out);
  if (t.detailed == "existRel" && q.answer == "yes") {
    if (rules.on("spatialInverse")) ruleSpatialInverse(p, g, ont, out);
    if (rules.on("spatialContra")) ruleSpatialContra(p, g, ont, out);
  }
  if (t.detailed == "logicAnd" && q.answer == "yes" && rules.on("andBranches"))
    ruleLogicBranches(p, "yes", out);
  if (t.detailed == "logicOr" && q.answer == "no" && rules.on("orBranches"))
    ruleLogicBranches(p, "no", out);
  if (t.detailed == "twoSame" && q.answer == "yes" && rules.on("sameTransfer"))
    ruleSameTransfer(p, g, ont, out);
  if (t.detailed == "allSame" && q.answer == "yes" && rules.on("allToPairs"))
    ruleAllToPairs(p, g, ont, out);

  // Dedup and drop the source itself.
  std::vector<EntailedQuestion> uniq;
  std::set<std::string> seen = {q.semantic};
  for (auto& m : out) {
    if (seen.count(m.semantic)) continue;
    seen.insert(m.semantic);
    uniq.push_back(std::move(m));
  }
  return uniq;
}

EntailedSet closure(const QAInstance& q, const SceneGraph& g, const Ontology& ont,
                    const PlausibilityTable& table, const EntailmentRules& rules, int maxRounds) {
  EntailedSet set;
  set.source = q.questionId;
  std::set<std::string> seen = {q.semantic};
  std::vector<EntailedQuestion> frontier = entail(q, g, ont, table, rules);

  for (int round = 0; round < maxRounds && !frontier.empty(); ++round) {
    std::vector<EntailedQuestion> next;
    for (auto& m : frontier) {
      if (seen.count(m.semantic)) continue;
      seen.insert(m.semantic);
      set.members.push_back(m);
      QAInstance pseudo;
      pseudo.semantic = m.semantic;
      pseudo.answer = m.answer;
      pseudo.imageId = q.imageId;
      for (auto& deeper : entail(pseudo, g, ont, table, rules))
        if (!seen.count(deeper.semantic)) next.push_back(std::move(deeper));
    }
    frontier = std::move(next);
  }
  return set;
}

json entailedSetToJson(const EntailedSet& s) {
  json members = json::array();
  for (const auto& m : s.members) members.push_back({{"semantic", m.semantic}, {"answer", m.answer}});
  return json{{"questionId", s.source}, {"entailed", members}};
}

EntailedSet entailedSetFromJson(const json& rec) {
  EntailedSet s;
  try {
    s.source = rec.at("questionId").get<std::string>();
    for (const auto& m : rec.at("entailed"))
      s.members.push_back({m.at("semantic").get<std::string>(), m.at("answer").get<std::string>()});
  } catch (const json::exception& e) {
    throw SceneqError(std::string("bad entailment record: ") + e.what());
  }
  return s;
}

}  // namespace sceneq
