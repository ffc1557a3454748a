// Command line front end for the question pipeline. Each subcommand runs
// one stage against a JSON config file; --input/--output override the
// stage's paths for ad-hoc runs. Exit codes: 0 ok, 1 usage, 2 data error.
#include <iostream>

#include "CLI11.hpp"
#include "sceneq/jsonl.hpp"
#include "sceneq/pipeline.hpp"

using namespace sceneq;

namespace {

struct StageArgs {
  std::string config;
  std::string input, output, report;
  uint64_t seed = 0;
  bool seedSet = false;
};

void addCommon(CLI::App* cmd, StageArgs& args) {
  cmd->add_option("--config", args.config, "pipeline config json")->required();
  cmd->add_option("--input", args.input, "override the stage input path");
  cmd->add_option("--output", args.output, "override the stage output path");
  cmd->add_option("--seed", args.seed, "override generator and balance seeds")
      ->each([&](const std::string&) { args.seedSet = true; });
}

PipelineConfig loadConfig(const StageArgs& args) {
  PipelineConfig cfg = PipelineConfig::fromFile(args.config);
  if (args.seedSet) {
    cfg.generator.seed = args.seed;
    cfg.balance.seed = args.seed;
  }
  return cfg;
}

void printResult(const StageResult& r) { std::cout << r.manifest.dump() << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scene graph question toolkit"};
  app.require_subcommand(1);

  StageArgs normalizeArgs, generateArgs, entailArgs, balanceArgs, splitArgs, evalArgs, runArgs;
  std::string statsPath;

  auto* cmdNormalize =
      app.add_subcommand("normalize", "clean raw graphs and derive positions and globals");
  addCommon(cmdNormalize, normalizeArgs);
  auto* cmdGenerate = app.add_subcommand("generate", "produce questions from normalized graphs");
  addCommon(cmdGenerate, generateArgs);
  auto* cmdEntail = app.add_subcommand("entail", "compute entailed question sets");
  addCommon(cmdEntail, entailArgs);
  auto* cmdBalance = app.add_subcommand("balance", "rebalance answer distributions");
  addCommon(cmdBalance, balanceArgs);
  auto* cmdSplit = app.add_subcommand("split", "assign image-disjoint splits");
  addCommon(cmdSplit, splitArgs);
  auto* cmdEvaluate = app.add_subcommand("evaluate", "score a prediction file");
  addCommon(cmdEvaluate, evalArgs);
  cmdEvaluate->add_option("--report", evalArgs.report, "override the report output path");
  auto* cmdRun = app.add_subcommand("run", "run normalize through split in order");
  addCommon(cmdRun, runArgs);
  auto* cmdStats = app.add_subcommand("stats", "print corpus statistics for a question file");
  cmdStats->add_option("questions", statsPath, "questions jsonl")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmdNormalize->parsed()) {
      PipelineConfig cfg = loadConfig(normalizeArgs);
      if (!normalizeArgs.input.empty()) cfg.graphs = normalizeArgs.input;
      if (!normalizeArgs.output.empty()) cfg.normalizedGraphs = normalizeArgs.output;
      printResult(runNormalize(cfg));
    } else if (cmdGenerate->parsed()) {
      PipelineConfig cfg = loadConfig(generateArgs);
      if (!generateArgs.input.empty()) cfg.normalizedGraphs = generateArgs.input;
      if (!generateArgs.output.empty()) cfg.questions = generateArgs.output;
      printResult(runGenerate(cfg));
    } else if (cmdEntail->parsed()) {
      PipelineConfig cfg = loadConfig(entailArgs);
      if (!entailArgs.input.empty()) cfg.questions = entailArgs.input;
      if (!entailArgs.output.empty()) cfg.entailments = entailArgs.output;
      printResult(runEntail(cfg));
    } else if (cmdBalance->parsed()) {
      PipelineConfig cfg = loadConfig(balanceArgs);
      if (!balanceArgs.input.empty()) cfg.questions = balanceArgs.input;
      if (!balanceArgs.output.empty()) cfg.balancedQuestions = balanceArgs.output;
      printResult(runBalance(cfg));
    } else if (cmdSplit->parsed()) {
      PipelineConfig cfg = loadConfig(splitArgs);
      if (!splitArgs.input.empty()) cfg.balancedQuestions = splitArgs.input;
      if (!splitArgs.output.empty()) cfg.splitQuestions = splitArgs.output;
      printResult(runSplit(cfg));
    } else if (cmdEvaluate->parsed()) {
      PipelineConfig cfg = loadConfig(evalArgs);
      if (!evalArgs.input.empty()) cfg.predictions = evalArgs.input;
      if (!evalArgs.report.empty()) cfg.report = evalArgs.report;
      printResult(runEvaluate(cfg));
    } else if (cmdRun->parsed()) {
      PipelineConfig cfg = loadConfig(runArgs);
      printResult(runNormalize(cfg));
      printResult(runGenerate(cfg));
      printResult(runEntail(cfg));
      printResult(runBalance(cfg));
      printResult(runSplit(cfg));
    } else if (cmdStats->parsed()) {
      std::cout << corpusStats(loadQuestions(statsPath)).dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
