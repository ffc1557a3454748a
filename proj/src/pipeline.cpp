#include "sceneq/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "sceneq/jsonl.hpp"

namespace sceneq {

namespace {

std::filesystem::path resolved(const json& j, const std::string& key,
                               const std::filesystem::path& baseDir) {
  std::string s = j.value(key, std::string());
  if (s.empty()) return {};
  std::filesystem::path p(s);
  return p.is_absolute() ? p : baseDir / p;
}

// Manifests carry configuration and counts only. No timestamps: a rerun
// with the same inputs must produce byte-identical files.
void writeManifest(const std::filesystem::path& output, const std::string& stage,
                   const json& config, const json& counts) {
  json m{{"stage", stage}, {"config", config}, {"counts", counts}};
  writeFile(output.string() + ".manifest.json", m.dump(2) + "\n");
}

json generatorConfigJson(const GeneratorConfig& g) {
  return {{"seed", g.seed}, {"maxDepth", g.maxDepth}, {"sitesPerGroup", g.sitesPerGroup}};
}

json balanceConfigJson(const BalanceConfig& b) {
  return {{"b", b.b},
          {"rMin", b.rMin},
          {"rMax", b.rMax},
          {"typeShares", b.typeShares},
          {"splitShares", b.splitShares},
          {"seed", b.seed}};
}

constexpr int kEntailRounds = 3;

}  // namespace

PipelineConfig PipelineConfig::fromFile(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(readFile(path));
  } catch (const std::exception& e) {
    throw SceneqError(path.string() + ": bad config: " + e.what());
  }
  return fromJson(j, path.parent_path());
}

PipelineConfig PipelineConfig::fromJson(const json& j, const std::filesystem::path& baseDir) {
  PipelineConfig cfg;
  cfg.ontologyDir = resolved(j, "ontologyDir", baseDir);
  cfg.graphs = resolved(j, "graphs", baseDir);
  cfg.normalizedGraphs = resolved(j, "normalizedGraphs", baseDir);
  cfg.patterns = resolved(j, "patterns", baseDir);
  cfg.questions = resolved(j, "questions", baseDir);
  cfg.entailments = resolved(j, "entailments", baseDir);
  cfg.balancedQuestions = resolved(j, "balancedQuestions", baseDir);
  cfg.splitQuestions = resolved(j, "splitQuestions", baseDir);
  cfg.predictions = resolved(j, "predictions", baseDir);
  cfg.report = resolved(j, "report", baseDir);
  cfg.marginFraction = j.value("marginFraction", cfg.marginFraction);

  if (j.contains("generator")) {
    const json& g = j.at("generator");
    cfg.generator.seed = g.value("seed", cfg.generator.seed);
    cfg.generator.maxDepth = g.value("maxDepth", cfg.generator.maxDepth);
    cfg.generator.sitesPerGroup = g.value("sitesPerGroup", cfg.generator.sitesPerGroup);
  }
  if (j.contains("balance")) {
    const json& b = j.at("balance");
    cfg.balance.b = b.value("b", cfg.balance.b);
    cfg.balance.rMin = b.value("rMin", cfg.balance.rMin);
    cfg.balance.rMax = b.value("rMax", cfg.balance.rMax);
    cfg.balance.seed = b.value("seed", cfg.balance.seed);
    if (b.contains("typeShares"))
      cfg.balance.typeShares = b.at("typeShares").get<std::map<std::string, double>>();
    if (b.contains("splitShares"))
      cfg.balance.splitShares = b.at("splitShares").get<std::vector<double>>();
  }
  if (j.contains("seed")) {
    cfg.generator.seed = j.at("seed").get<uint64_t>();
    cfg.balance.seed = cfg.generator.seed;
  }
  return cfg;
}

StageResult runNormalize(const PipelineConfig& cfg) {
  Ontology ont = Ontology::load(cfg.ontologyDir);
  NormalizeTables tables = NormalizeTables::load(cfg.ontologyDir);

  JsonlWriter out(cfg.normalizedGraphs);
  long objects = 0, relations = 0, dropped = 0;
  forEachJsonl(cfg.graphs, [&](const json& rec, size_t) {
    SceneGraph g = normalizeGraph(rec, ont, tables, cfg.marginFraction);
    objects += static_cast<long>(g.objects.size());
    relations += static_cast<long>(g.relations.size());
    dropped += g.droppedAnnotations;
    out.write(graphToJson(g));
  });
  out.close();

  json counts{{"images", out.count()},
              {"objects", objects},
              {"relations", relations},
              {"droppedAnnotations", dropped}};
  json config{{"marginFraction", cfg.marginFraction}};
  writeManifest(cfg.normalizedGraphs, "normalize", config, counts);
  return {"normalize", json{{"stage", "normalize"}, {"config", config}, {"counts", counts}}};
}

StageResult runGenerate(const PipelineConfig& cfg) {
  Ontology ont = Ontology::load(cfg.ontologyDir);
  NormalizeTables tables = NormalizeTables::load(cfg.ontologyDir);
  auto graphs = loadGraphCorpus(cfg.normalizedGraphs, ont, true);
  auto patterns = loadPatterns(cfg.patterns);

  GeneratorConfig gcfg = cfg.generator;
  if (gcfg.commonlyUnannotated.empty()) gcfg.commonlyUnannotated = tables.commonlyUnannotated;

  GeneratedCorpus corpus = generateCorpus(graphs, ont, patterns, gcfg);

  JsonlWriter out(cfg.questions);
  for (const auto& q : corpus.questions) out.write(q.toJson());
  out.close();

  std::map<std::string, long> byDetailed, rejectionsByReason;
  for (const auto& q : corpus.questions) byDetailed[q.types.detailed]++;
  for (const auto& r : corpus.rejections) rejectionsByReason[r.reason]++;
  json counts{{"questions", out.count()},
              {"rejections", corpus.rejections.size()},
              {"byDetailed", byDetailed},
              {"rejectionsByReason", rejectionsByReason}};
  json config = generatorConfigJson(gcfg);
  writeManifest(cfg.questions, "generate", config, counts);
  return {"generate", json{{"stage", "generate"}, {"config", config}, {"counts", counts}}};
}

StageResult runEntail(const PipelineConfig& cfg) {
  Ontology ont = Ontology::load(cfg.ontologyDir);
  auto graphs = loadGraphCorpus(cfg.normalizedGraphs, ont, true);
  auto questions = loadQuestions(cfg.questions);
  PlausibilityTable table = buildPlausibility(graphs, ont);
  EntailmentRules rules = EntailmentRules::load(cfg.ontologyDir);

  std::map<std::string, const SceneGraph*> graphOf;
  for (const auto& g : graphs) graphOf[g.imageId] = &g;

  JsonlWriter out(cfg.entailments);
  long members = 0;
  for (const auto& q : questions) {
    auto it = graphOf.find(q.imageId);
    if (it == graphOf.end()) throw SceneqError("no scene graph for image '" + q.imageId + "'");
    EntailedSet set = closure(q, *it->second, ont, table, rules, kEntailRounds);
    if (set.members.empty()) continue;
    members += static_cast<long>(set.members.size());
    out.write(entailedSetToJson(set));
  }
  out.close();

  json counts{{"sets", out.count()}, {"members", members}, {"questions", questions.size()}};
  json config{{"maxRounds", kEntailRounds}};
  writeManifest(cfg.entailments, "entail", config, counts);
  return {"entail", json{{"stage", "entail"}, {"config", config}, {"counts", counts}}};
}

StageResult runBalance(const PipelineConfig& cfg) {
  auto corpus = loadQuestions(cfg.questions);
  BalanceReport report;
  auto kept = rebalance(corpus, cfg.balance, &report);

  JsonlWriter out(cfg.balancedQuestions);
  for (const auto& q : kept) out.write(q.toJson());
  out.close();

  json counts{{"input", report.inputCount},
              {"kept", report.keptCount},
              {"globalGroups", report.globalGroups.size()},
              {"localGroups", report.localGroups.size()}};
  json config = balanceConfigJson(cfg.balance);
  writeManifest(cfg.balancedQuestions, "balance", config, counts);
  return {"balance", json{{"stage", "balance"}, {"config", config}, {"counts", counts}}};
}

StageResult runSplit(const PipelineConfig& cfg) {
  auto corpus = loadQuestions(cfg.balancedQuestions);
  auto assigned = assignSplits(std::move(corpus), cfg.balance);

  JsonlWriter out(cfg.splitQuestions);
  std::map<std::string, long> bySplit;
  for (const auto& q : assigned) {
    bySplit[q.split]++;
    out.write(q.toJson());
  }
  out.close();

  json counts{{"questions", out.count()}, {"bySplit", bySplit}};
  json config{{"splitShares", cfg.balance.splitShares}, {"seed", cfg.balance.seed}};
  writeManifest(cfg.splitQuestions, "split", config, counts);
  return {"split", json{{"stage", "split"}, {"config", config}, {"counts", counts}}};
}

StageResult runEvaluate(const PipelineConfig& cfg) {
  Ontology ont = Ontology::load(cfg.ontologyDir);
  auto graphs = loadGraphCorpus(cfg.normalizedGraphs, ont, true);

  // Evaluate against the most processed corpus available.
  std::filesystem::path goldPath;
  for (const auto& p : {cfg.splitQuestions, cfg.balancedQuestions, cfg.questions})
    if (!p.empty() && std::filesystem::exists(p)) {
      goldPath = p;
      break;
    }
  if (goldPath.empty()) throw SceneqError("no question file to evaluate against");
  auto gold = loadQuestions(goldPath);

  std::vector<EntailedSet> entailments;
  if (!cfg.entailments.empty() && std::filesystem::exists(cfg.entailments))
    entailments = loadEntailments(cfg.entailments);

  auto preds = loadPredictions(cfg.predictions);
  MetricReport report = evaluate(preds, gold, entailments, graphs, ont);

  writeFile(cfg.report, report.toJson().dump(2) + "\n");
  json counts{{"questions", gold.size()},
              {"predictions", preds.size()},
              {"entailedSets", entailments.size()}};
  json config{{"gold", goldPath.filename().string()}};
  writeManifest(cfg.report, "evaluate", config, counts);
  return {"evaluate", json{{"stage", "evaluate"},
                           {"config", config},
                           {"counts", counts},
                           {"metrics", report.toJson()}}};
}

json corpusStats(const std::vector<QAInstance>& corpus) {
  std::map<std::string, long> structural, semantic, detailed, lengths;
  std::set<std::string> questionVocab, answers;
  for (const auto& q : corpus) {
    structural[q.types.structural]++;
    semantic[q.types.semantic]++;
    detailed[q.types.detailed]++;
    std::istringstream words(q.question);
    std::string w;
    long n = 0;
    while (words >> w) {
      ++n;
      questionVocab.insert(toLower(w));
    }
    lengths[std::to_string(n)]++;
    answers.insert(q.answer);
  }
  return {{"questions", corpus.size()},
          {"byStructural", structural},
          {"bySemantic", semantic},
          {"byDetailed", detailed},
          {"lengthHistogram", lengths},
          {"questionVocab", questionVocab.size()},
          {"answerVocab", answers.size()}};
}

std::vector<QAInstance> loadQuestions(const std::filesystem::path& path) {
  std::vector<QAInstance> out;
  forEachJsonl(path, [&](const json& rec, size_t line) {
    try {
      out.push_back(QAInstance::fromJson(rec));
    } catch (const json::exception& e) {
      throw SceneqError(path.string() + ":" + std::to_string(line) + ": bad question: " +
                        e.what());
    }
  });
  return out;
}

std::vector<EntailedSet> loadEntailments(const std::filesystem::path& path) {
  std::vector<EntailedSet> out;
  forEachJsonl(path, [&](const json& rec, size_t line) {
    try {
      out.push_back(entailedSetFromJson(rec));
    } catch (const json::exception& e) {
      throw SceneqError(path.string() + ":" + std::to_string(line) + ": bad entailed set: " +
                        e.what());
    }
  });
  return out;
}

}  // namespace sceneq
