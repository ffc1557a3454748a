#include "sceneq/balancing.hpp"

#include <algorithm>
#include <cmath>

namespace sceneq {

GroupLabel labelGroups(const Program& p, const TypeTriple& t) {
  const Step& last = p.steps.back();
  const std::string& d = t.detailed;
  std::string global;
  if (d == "queryGlobal" || d == "chooseGlobal") global = last.typeArg;
  else if (d == "verifyGlobal") global = "verifyGlobal-" + last.typeArg;
  else if (d == "queryAttr" || d == "chooseAttr") global = last.typeArg;
  else if (d == "verifyAttr") global = "verifyAttr-" + last.typeArg;
  else if (d == "queryObject" || d == "chooseObject") global = "name-" + mainSubject(p);
  else if (d == "queryRel" || d == "chooseObjRel") global = "name";
  else if (d == "compare") global = "compare-" + last.typeArg;
  else if (d == "twoSame" || d == "twoDiff" || d == "allSame" || d == "allDiff")
    global = d + (last.typeArg.empty() ? "" : "-" + last.typeArg);
  else global = d;  // verifyAttrs, exist, existRel, logic, verifyRel, chooseRel, common

  return {global, mainSubject(p) + "-" + global};
}

AnswerDistribution AnswerDistribution::of(const std::string& label,
                                          const std::vector<QAInstance*>& group) {
  std::map<std::string, double> counts;
  for (const QAInstance* q : group) counts[q->answer] += 1;
  AnswerDistribution d;
  d.label = label;
  d.entries.assign(counts.begin(), counts.end());
  std::sort(d.entries.begin(), d.entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return d;
}

double AnswerDistribution::total() const {
  double t = 0;
  for (const auto& [a, c] : entries) t += c;
  return t;
}

double AnswerDistribution::entropyBits() const {
  double t = total();
  if (t <= 0) return 0;
  double h = 0;
  for (const auto& [a, c] : entries) {
    if (c <= 0) continue;
    double p = c / t;
    h -= p * std::log2(p);
  }
  return h;
}

AnswerDistribution smooth(const AnswerDistribution& dist, const BalanceConfig& cfg) {
  AnswerDistribution out = dist;
  size_t n = out.entries.size();
  if (n < 2) return out;
  for (size_t i = 0; i + 1 < n; ++i) {
    double head = 0, tail = 0;
    for (size_t j = 0; j <= i; ++j) head += out.entries[j].second;
    for (size_t j = i + 1; j < n; ++j) tail += out.entries[j].second;
    if (tail > 0 && head > cfg.b * tail) {
      double scale = cfg.b * tail / head;
      for (size_t j = 0; j <= i; ++j) out.entries[j].second *= scale;
    }
    double cur = out.entries[i].second;
    double& next = out.entries[i + 1].second;
    next = std::min(next, cfg.rMax * cur);
    next = std::max(next, cfg.rMin * cur);
  }
  return out;
}

json BalanceReport::toJson() const {
  auto groupJson = [](const GroupReport& g) {
    auto dist = [](const AnswerDistribution& d) {
      json entries = json::array();
      for (const auto& [a, c] : d.entries) entries.push_back({{"answer", a}, {"count", c}});
      return entries;
    };
    return json{{"label", g.label},
                {"input", dist(g.input)},
                {"target", dist(g.target)},
                {"realizedEntropy", g.realizedEntropy},
                {"kept", g.kept}};
  };
  json global = json::array(), local = json::array();
  for (const auto& g : globalGroups) global.push_back(groupJson(g));
  for (const auto& g : localGroups) local.push_back(groupJson(g));
  return json{{"inputCount", inputCount},
              {"keptCount", keptCount},
              {"globalGroups", global},
              {"localGroups", local}};
}

namespace {

// One rejection-sampled pass over a grouping. keep[qid] flags survivors;
// the pass only ever clears flags.
void balancePass(std::vector<QAInstance*>& alive, const BalanceConfig& cfg,
                 const std::string& salt, bool local, std::map<std::string, bool>& keep,
                 std::vector<GroupReport>* reports) {
  std::map<std::string, std::vector<QAInstance*>> groups;
  for (QAInstance* q : alive) groups[local ? q->groupLocal : q->groupGlobal].push_back(q);

  for (auto& [label, members] : groups) {
    AnswerDistribution input = AnswerDistribution::of(label, members);
    AnswerDistribution target = smooth(input, cfg);
    std::map<std::string, double> current, wanted;
    for (const auto& [a, c] : input.entries) current[a] = c;
    for (const auto& [a, c] : target.entries) wanted[a] = c;

    long kept = 0;
    std::map<std::string, double> realized;
    for (QAInstance* q : members) {
      double p = std::min(1.0, wanted[q->answer] / current[q->answer]);
      if (hash01(cfg.seed, salt + "|" + label, q->questionId) < p) {
        ++kept;
        realized[q->answer] += 1;
      } else {
        keep[q->questionId] = false;
      }
    }
    if (reports) {
      GroupReport r;
      r.label = label;
      r.input = input;
      r.target = target;
      r.kept = kept;
      AnswerDistribution rd;
      rd.label = label;
      rd.entries.assign(realized.begin(), realized.end());
      r.realizedEntropy = rd.entropyBits();
      reports->push_back(std::move(r));
    }
  }

  alive.erase(std::remove_if(alive.begin(), alive.end(),
                             [&](QAInstance* q) { return !keep[q->questionId]; }),
              alive.end());
}

// Near-duplicate key: probing the same thing about the same objects in the
// same image. The serialized program's argument tuple captures it.
std::string similarityKey(const QAInstance& q) {
  Program p = parseProgram(q.semantic);
  std::vector<std::string> args;
  for (const auto& s : p.steps) {
    for (const auto& o : s.operands) args.push_back(o);
    if (!s.typeArg.empty()) args.push_back(s.typeArg);
  }
  std::sort(args.begin(), args.end());
  return q.imageId + "\x1f" + q.types.detailed + "\x1f" + join(args, "\x1f");
}

}  // namespace

std::vector<QAInstance> dedupSimilar(const std::vector<QAInstance>& corpus) {
  std::map<std::string, const QAInstance*> best;
  for (const auto& q : corpus) {
    std::string key = similarityKey(q);
    auto it = best.find(key);
    if (it == best.end()) {
      best[key] = &q;
      continue;
    }
    // Prefer the more specific program, then the stable smaller id.
    size_t a = parseProgram(q.semantic).steps.size();
    size_t b = parseProgram(it->second->semantic).steps.size();
    if (a > b || (a == b && q.questionId < it->second->questionId)) best[key] = &q;
  }
  std::vector<QAInstance> out;
  for (const auto& q : corpus)
    if (best.at(similarityKey(q)) == &q) out.push_back(q);
  return out;
}

std::vector<QAInstance> rebalance(const std::vector<QAInstance>& corpus, const BalanceConfig& cfg,
                                  BalanceReport* report) {
  std::vector<QAInstance> work = corpus;
  std::map<std::string, bool> keep;
  for (const auto& q : work) keep[q.questionId] = true;
  std::vector<QAInstance*> alive;
  for (auto& q : work) alive.push_back(&q);

  if (report) {
    report->inputCount = static_cast<long>(corpus.size());
    report->globalGroups.clear();
    report->localGroups.clear();
  }

  balancePass(alive, cfg, "global", false, keep, report ? &report->globalGroups : nullptr);
  balancePass(alive, cfg, "local", true, keep, report ? &report->localGroups : nullptr);

  if (!cfg.typeShares.empty()) {
    std::map<std::string, long> counts;
    for (QAInstance* q : alive) counts[q->types.detailed]++;
    long total = static_cast<long>(alive.size());
    // Shares cap each type at share*total of the current corpus.
    for (QAInstance* q : alive) {
      auto it = cfg.typeShares.find(q->types.detailed);
      if (it == cfg.typeShares.end()) continue;
      double want = it->second * static_cast<double>(total);
      double have = static_cast<double>(counts[q->types.detailed]);
      double p = std::min(1.0, want / have);
      if (hash01(cfg.seed, "typeShares", q->questionId) >= p) keep[q->questionId] = false;
    }
    alive.erase(std::remove_if(alive.begin(), alive.end(),
                               [&](QAInstance* q) { return !keep[q->questionId]; }),
                alive.end());
  }

  std::vector<QAInstance> kept2;
  for (QAInstance* q : alive) kept2.push_back(*q);
  std::vector<QAInstance> out = dedupSimilar(kept2);
  for (auto& q : out) q.isBalanced = true;
  if (report) report->keptCount = static_cast<long>(out.size());
  return out;
}

std::vector<QAInstance> assignSplits(std::vector<QAInstance> corpus, const BalanceConfig& cfg) {
  static const std::vector<std::string> names = {"train", "val", "test", "challenge"};
  if (cfg.splitShares.size() != names.size())
    throw SceneqError("splitShares must carry 4 fractions");
  double sum = 0;
  for (double s : cfg.splitShares) sum += s;
  if (std::abs(sum - 1.0) > 1e-9) throw SceneqError("splitShares must sum to 1");

  std::set<std::string> imageSet;
  for (const auto& q : corpus) imageSet.insert(q.imageId);
  if (imageSet.size() < names.size())
    throw SceneqError("need at least 4 images to split, have " +
                      std::to_string(imageSet.size()));

  std::vector<std::string> images(imageSet.begin(), imageSet.end());
  std::sort(images.begin(), images.end(), [&](const std::string& a, const std::string& b) {
    double ha = hash01(cfg.seed, "split", a), hb = hash01(cfg.seed, "split", b);
    return ha != hb ? ha < hb : a < b;
  });

  std::map<std::string, std::string> splitOf;
  size_t start = 0;
  double acc = 0;
  for (size_t s = 0; s < names.size(); ++s) {
    acc += cfg.splitShares[s];
    size_t end = s + 1 == names.size()
                     ? images.size()
                     : static_cast<size_t>(std::llround(acc * static_cast<double>(images.size())));
    end = std::min(std::max(end, start), images.size());
    for (size_t i = start; i < end; ++i) splitOf[images[i]] = names[s];
    start = end;
  }
  for (auto& q : corpus) q.split = splitOf.at(q.imageId);
  return corpus;
}

}  // namespace sceneq
