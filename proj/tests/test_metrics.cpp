#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "sceneq/metrics.hpp"

using namespace sceneq;
using testutil::ont;
using testutil::tables;

namespace {

const SceneGraph& fixture() {
  static SceneGraph g = testutil::fixtureGraph();
  return g;
}

QAInstance makeQ(const std::string& id, const std::string& semantic, const std::string& answer,
                 const std::string& image = "fixture1") {
  QAInstance q;
  q.questionId = id;
  q.imageId = image;
  q.question = "Q?";
  q.semantic = semantic;
  q.answer = answer;
  q.fullAnswer = "F.";
  Program p = parseProgram(semantic);
  q.types = classify(p);
  GroupLabel labels = labelGroups(p, q.types);
  q.groupGlobal = labels.global;
  q.groupLocal = labels.local;
  q.annotations = json::object();
  return q;
}

Prediction makeP(const std::string& id, const std::string& answer, json attention = json()) {
  Prediction p;
  p.questionId = id;
  p.answer = answer;
  p.attention = std::move(attention);
  return p;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST_CASE("prediction files load with optional attention") {
  auto dir = testutil::tmpDir("preds");
  writeFile(dir / "p.jsonl",
            "{\"questionId\":\"q1\",\"answer\":\"yes\"}\n"
            "{\"questionId\":\"q2\",\"answer\":\"red\",\"attention\":{\"o1\":0.5}}\n");
  auto preds = loadPredictions(dir / "p.jsonl");
  REQUIRE(preds.size() == 2);
  CHECK(preds[0].questionId == "q1");
  CHECK(preds[0].attention.is_null());
  CHECK(preds[1].attention["o1"] == 0.5);

  writeFile(dir / "bad.jsonl", "{\"questionId\":\"q1\"}\n");
  CHECK_THROWS_WITH_AS(loadPredictions(dir / "bad.jsonl"), doctest::Contains(":1"), SceneqError);
}

TEST_CASE("answer scopes follow the question form") {
  auto scope = [&](const std::string& sem) { return answerScope(makeQ("q", sem, "x"), ont()); };

  CHECK(scope("select: apple/verify color: red") == std::vector<std::string>{"yes", "no"});
  CHECK(scope("select: apple/exist") == std::vector<std::string>{"yes", "no"});
  CHECK(scope("select: apple/select: banana/same color") == std::vector<std::string>{"yes", "no"});
  CHECK(scope("select: apple/choose color: red|green") ==
        std::vector<std::string>{"red", "green"});
  CHECK(scope("select: apple/chooseRel(object,to the left of|to the right of): banana") ==
        std::vector<std::string>{"left", "right"});

  auto commonScope = scope("select: apple/select: banana/common");
  CHECK(contains(commonScope, "color"));
  CHECK(contains(commonScope, "size"));
  CHECK(!contains(commonScope, "position"));

  CHECK(scope("select: apple/select: table/compare size: more") ==
        std::vector<std::string>{"apple", "table"});

  auto relScope = scope("select: table/relate(subject,near): _/query: name");
  CHECK(contains(relScope, "apple"));
  CHECK(contains(relScope, "dog"));
  CHECK(!contains(relScope, "red"));

  auto objScope = scope("select: fruit/query: name");
  CHECK(contains(objScope, "apple"));
  CHECK(contains(objScope, "banana"));
  CHECK(!contains(objScope, "fruit"));
  CHECK(!contains(objScope, "dog"));

  auto attrScope = scope("select: apple/query: color");
  CHECK(contains(attrScope, "red"));
  CHECK(!contains(attrScope, "small"));

  auto globalScope = scope("select: scene/query: weather");
  CHECK(contains(globalScope, "sunny"));
}

TEST_CASE("validity and plausibility predicates") {
  PlausibilityTable table = buildPlausibility({fixture()}, ont());

  QAInstance color = makeQ("q", "select: apple/query: color", "red");
  CHECK(validAnswer(color, "red", ont()));
  CHECK(validAnswer(color, "purple", ont()));
  CHECK(!validAnswer(color, "dog", ont()));
  CHECK(!validAnswer(color, "small", ont()));
  CHECK(plausibleAnswer(color, "red", ont(), table));
  CHECK(!plausibleAnswer(color, "purple", ont(), table));

  QAInstance rel = makeQ("q", "select: apple/chooseRel(object,above|below): banana", "below");
  CHECK(validAnswer(rel, "above", ont()));
  CHECK(!validAnswer(rel, "to the left of", ont()));
  CHECK(plausibleAnswer(rel, "above", ont(), table));  // choose scopes are always plausible

  QAInstance common = makeQ("q", "select: apple/select: banana/common", "size");
  CHECK(plausibleAnswer(common, "size", ont(), table));
  CHECK(validAnswer(common, "material", ont()));
  CHECK(!plausibleAnswer(common, "material", ont(), table));

  QAInstance name = makeQ("q", "select: fruit/query: name", "apple");
  CHECK(plausibleAnswer(name, "apple", ont(), table));
  CHECK(validAnswer(name, "pear", ont()));
  CHECK(!plausibleAnswer(name, "pear", ont(), table));

  QAInstance exist = makeQ("q", "select: bear/exist", "no");
  CHECK(plausibleAnswer(exist, "yes", ont(), table));
  CHECK(plausibleAnswer(exist, "no", ont(), table));
}

TEST_CASE("group divergence matches the quadratic form") {
  std::map<std::string, double> gold = {{"yes", 8}, {"no", 2}};
  CHECK(groupDivergence(gold, {{"yes", 10}, {"no", 0}}) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(groupDivergence(gold, gold) == 0.0);
  // Predicted counts normalize to the gold total before comparing.
  CHECK(groupDivergence(gold, {{"yes", 20}, {"no", 0}}) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(groupDivergence(gold, {{"yes", 4}, {"no", 1}}) == 0.0);
  // Novel answers are charged against the 0.5 floor.
  CHECK(groupDivergence({{"a", 4}}, {{"b", 4}}) == doctest::Approx(36.0));
  // An empty prediction scales to nothing.
  CHECK(groupDivergence({{"a", 4}}, {}) == doctest::Approx(4.0));
}

TEST_CASE("grounding score measures mass on pointed regions") {
  json objs;
  objs["o1"] = testutil::rawObject("apple", 0, 0, 50, 50, {"red"});
  objs["o2"] = testutil::rawObject("banana", 50, 50, 50, 50, {"yellow"});
  SceneGraph g = normalizeGraph(testutil::rawGraph("gimg", 100, 100, objs), ont(), tables(), 0.3);

  QAInstance q = makeQ("q", "select: apple/exist", "yes", "gimg");
  q.annotations["question"] = {{"0:2", "o1"}};
  q.annotations["answer"] = "o2";

  CHECK(groundingScore(makeP("q", "yes", {{"o1", 0.6}}), q, g) == doctest::Approx(0.6));
  CHECK(groundingScore(makeP("q", "yes", {{"o1", 0.2}, {"o2", 0.3}}), q, g) ==
        doctest::Approx(0.5));
  // A 1x1 grid cell covers the image; the boxes cover half of it.
  CHECK(groundingScore(makeP("q", "yes", {{"0,0", 0.8}}), q, g) == doctest::Approx(0.4));
  // 2x2 cells aligned with the boxes count fully.
  CHECK(groundingScore(makeP("q", "yes", {{"0,0", 0.5}, {"1,1", 0.5}}), q, g) ==
        doctest::Approx(1.0));
  // Off-box cells contribute nothing.
  CHECK(groundingScore(makeP("q", "yes", {{"0,1", 0.5}, {"1,0", 0.5}}), q, g) ==
        doctest::Approx(0.0));

  QAInstance unpointed = makeQ("q", "select: apple/exist", "yes", "gimg");
  CHECK(groundingScore(makeP("q", "yes", {{"o1", 1.0}}), unpointed, g) == doctest::Approx(0.0));

  CHECK_THROWS_AS(groundingScore(makeP("q", "yes", {{"ghost", 0.5}}), q, g), SceneqError);
  CHECK_THROWS_AS(groundingScore(makeP("q", "yes", {{"o1", -0.1}}), q, g), SceneqError);
  CHECK_THROWS_AS(groundingScore(makeP("q", "yes", {{"o1", 0.8}, {"o2", 0.4}}), q, g),
                  SceneqError);
}

TEST_CASE("evaluation aggregates accuracy, agreement and distribution") {
  std::vector<QAInstance> gold = {
      makeQ("q1", "select: apple/exist", "yes"),
      makeQ("q2", "select: bear/exist", "no"),
      makeQ("q3", "select: apple/query: color", "red"),
      makeQ("q4", "select: apple/verify color: red", "yes"),
  };
  gold[0].annotations["question"] = {{"3:5", "a1"}};

  std::vector<Prediction> preds = {
      makeP("q1", "yes", {{"a1", 1.0}}),
      makeP("q2", "yes"),
      makeP("q3", "  Red "),  // matching ignores case and padding
  };

  std::vector<EntailedSet> sets(2);
  sets[0].source = "q3";
  sets[0].members = {{"select: apple/verify color: red", "yes"}};  // posed as q4: wrong
  sets[1].source = "q1";
  sets[1].members = {{"select: apple/query: color", "red"},  // posed as q3: right
                     {"select: never/posed", "x"}};

  MetricReport r = evaluate(preds, gold, sets, {fixture()}, ont());

  CHECK(r.overall.pct() == doctest::Approx(50.0));
  CHECK(r.binary.total == 3);
  CHECK(r.binary.pct() == doctest::Approx(100.0 / 3));
  CHECK(r.open.total == 1);
  CHECK(r.open.pct() == doctest::Approx(100.0));
  CHECK(r.byStructural["verify"].total == 3);
  CHECK(r.byStructural["query"].hits == 1);
  CHECK(r.bySemantic["attribute"].total == 2);
  CHECK(r.byDetailed["exist"].total == 2);

  // q4 went unanswered, so it counts against accuracy but not validity.
  CHECK(r.validity == doctest::Approx(75.0));
  CHECK(r.plausibility == doctest::Approx(75.0));

  // q3's one posed member is wrong, q1's one posed member is right.
  REQUIRE(r.consistency.has_value());
  CHECK(*r.consistency == doctest::Approx(50.0));

  // Only the exist group has two gold answers: gold {yes,no}, predicted
  // {yes,yes} -> (2-1)^2/1 + (0-1)^2/1.
  CHECK(r.distribution == doctest::Approx(2.0));

  REQUIRE(r.grounding.has_value());
  CHECK(*r.grounding == doctest::Approx(100.0));

  json j = r.toJson();
  CHECK(j["accuracy"]["overall"]["pct"].get<double>() == doctest::Approx(50.0));
  CHECK(!j["consistency"].is_null());
  CHECK(!j["grounding"].is_null());

  CHECK_THROWS_WITH_AS(evaluate({makeP("mystery", "yes")}, gold, {}, {fixture()}, ont()),
                       doctest::Contains("mystery"), SceneqError);
}

TEST_CASE("evaluation omits metrics whose inputs are absent") {
  std::vector<QAInstance> gold = {makeQ("q1", "select: apple/exist", "yes")};
  MetricReport r = evaluate({makeP("q1", "yes")}, gold, {}, {fixture()}, ont());
  CHECK(!r.consistency.has_value());
  CHECK(!r.grounding.has_value());
  CHECK(r.distribution == 0.0);

  json j = r.toJson();
  CHECK(j["consistency"].is_null());
  CHECK(j["grounding"].is_null());

  std::string tbl = r.table();
  CHECK(tbl.find("n/a") != std::string::npos);
  CHECK(tbl.find("accuracy") != std::string::npos);
}
