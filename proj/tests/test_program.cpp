#include "doctest.h"
#include "helpers.hpp"
#include "sceneq/program.hpp"

using namespace sceneq;
using testutil::ont;

namespace {

const SceneGraph& fixture() {
  static SceneGraph g = testutil::fixtureGraph();
  return g;
}

std::string run(const std::string& prog) {
  ExecResult r = execute(parseProgram(prog), fixture(), ont());
  REQUIRE_MESSAGE(r.ok(), (prog + ": " + (r.error ? r.error->describe() : "no answer")));
  return *r.answer;
}

ExecError runError(const std::string& prog) {
  ExecResult r = execute(parseProgram(prog), fixture(), ont());
  REQUIRE_MESSAGE(r.error.has_value(), (prog + ": expected a domain error, got '" +
                                        (r.answer ? *r.answer : "") + "'"));
  return *r.error;
}

}  // namespace

TEST_CASE("serialize round-trips parse for every op form") {
  const std::vector<std::string> canon = {
      "select: scene/query: weather",
      "select: scene/verify weather: sunny",
      "select: scene/choose weather: sunny|cloudy",
      "select: apple/query: color",
      "select: apple/filter: red/verify size: small",
      "select: apple/verify color: red/verify size: small/and",
      "select: apple/choose color: red|green",
      "select: apple/exist",
      "select: table/relate(subject,on): apple/exist",
      "select: apple/exist/select: banana/exist/or",
      "select: apple/filter: red/exist/select: banana/exist/and",
      "select: fruit/query: name",
      "select: fruit/choose: apple|banana",
      "select: table/relate(subject,near): _/query: name",
      "select: apple/verifyRel(object,on): table",
      "select: apple/chooseRel(object,to the left of|to the right of): banana",
      "select: table/relate(subject,on): _/choose: apple|banana",
      "select: apple/select: table/compare size: more",
      "select: apple/select: table/compare size: less",
      "select: apple/select: banana/common",
      "select: apple/select: banana/same color",
      "select: apple/select: banana/same",
      "select: apple/select: banana/different color",
      "select: allObjs/same color",
      "select: fruit/different color",
      "select: bear/exist/not",
  };
  for (const auto& s : canon) {
    Program p = parseProgram(s);
    CHECK(serializeProgram(p) == s);
    CHECK(parseProgram(serializeProgram(p)) == p);
  }
}

TEST_CASE("parse rejects malformed programs with the step index") {
  auto failsAt = [](const std::string& text, const std::string& needle) {
    try {
      parseProgram(text);
      FAIL_CHECK(text << ": expected a parse error");
    } catch (const SceneqError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos,
                    text << " -> " << e.what());
    }
  };
  failsAt("fly: away", "fly");
  failsAt("select: apple/and", "2");
  failsAt("query: color", "1");
  failsAt("select: apple/choose color: red", "choose");
  failsAt("select: apple/relate(sideways,on): table", "subject|object");
  failsAt("select: apple/query: color/query: color", "3");
  failsAt("select: apple/exist/exist", "3");
  failsAt("", "empty");
}

TEST_CASE("classify matches every catalog row") {
  auto t = [](const std::string& prog) { return classify(parseProgram(prog)); };
  auto is = [&](const std::string& prog, const std::string& st, const std::string& se,
                const std::string& de) {
    TypeTriple tt = t(prog);
    CHECK_MESSAGE((tt == TypeTriple{st, se, de}), prog << " -> " << tt.structural << "/"
                                                       << tt.semantic << "/" << tt.detailed);
  };
  is("select: scene/query: weather", "query", "global", "queryGlobal");
  is("select: scene/verify weather: sunny", "verify", "global", "verifyGlobal");
  is("select: scene/choose weather: sunny|cloudy", "choose", "global", "chooseGlobal");
  is("select: apple/query: color", "query", "attribute", "queryAttr");
  is("select: apple/verify color: red", "verify", "attribute", "verifyAttr");
  is("select: apple/verify color: red/verify size: small/and", "logical", "attribute",
     "verifyAttrs");
  is("select: apple/choose color: red|green", "choose", "attribute", "chooseAttr");
  is("select: apple/exist", "verify", "object", "exist");
  is("select: apple/filter: red/exist", "verify", "object", "exist");
  is("select: table/relate(subject,on): apple/exist", "verify", "relation", "existRel");
  is("select: apple/exist/select: banana/exist/or", "logical", "object", "logicOr");
  is("select: apple/exist/select: banana/exist/and", "logical", "object", "logicAnd");
  is("select: apple/filter: red/exist/select: banana/exist/and", "logical", "attribute",
     "logicAnd");
  is("select: fruit/query: name", "query", "category", "queryObject");
  is("select: fruit/choose: apple|banana", "choose", "category", "chooseObject");
  is("select: table/relate(subject,near): _/query: name", "query", "relation", "queryRel");
  is("select: apple/verifyRel(object,on): table", "verify", "relation", "verifyRel");
  is("select: apple/chooseRel(object,to the left of|to the right of): banana", "choose",
     "relation", "chooseRel");
  is("select: table/relate(subject,on): _/choose: apple|banana", "choose", "relation",
     "chooseObjRel");
  is("select: apple/select: table/compare size: more", "compare", "object", "compare");
  is("select: apple/select: banana/common", "compare", "object", "common");
  is("select: apple/select: banana/same color", "compare", "object", "twoSame");
  is("select: apple/select: banana/different color", "compare", "object", "twoDiff");
  is("select: allObjs/same color", "compare", "object", "allSame");
  is("select: fruit/different color", "compare", "object", "allDiff");
  CHECK_THROWS_AS(classify(parseProgram("select: bear/exist/not")), SceneqError);
}

TEST_CASE("catalog row list is stable and complete") {
  const auto& rows = catalogRows();
  CHECK(rows.size() == 23);
  CHECK(rows.front() == "queryGlobal");
  CHECK(rows.back() == "allDiff");
}

TEST_CASE("execution: attribute and global chains") {
  CHECK(run("select: table/filter: brown/relate(subject,on): apple/query: color") == "red");
  CHECK(run("select: scene/query: location") == "kitchen");
  CHECK(run("select: scene/verify location: kitchen") == "yes");
  CHECK(run("select: scene/verify location: beach") == "no");
  CHECK(run("select: apple/verify color: red") == "yes");
  CHECK(run("select: apple/verify color: yellow") == "no");
  CHECK(run("select: apple/verify color: red/verify size: small/and") == "yes");
  CHECK(run("select: apple/verify color: red/verify size: large/and") == "no");
  CHECK(run("select: apple/choose color: red|green") == "red");
  CHECK(run("select: dog/query: position") == "middle");
  CHECK(run("select: stove/verify position: top") == "yes");
}

TEST_CASE("execution: existence and logic") {
  CHECK(run("select: apple/exist") == "yes");
  CHECK(run("select: bear/exist") == "no");
  CHECK(run("select: apple/filter: red/exist") == "yes");
  CHECK(run("select: apple/filter: green/exist") == "no");
  CHECK(run("select: apple/exist/select: bear/exist/and") == "no");
  CHECK(run("select: apple/exist/select: bear/exist/or") == "yes");
  CHECK(run("select: bear/exist/not") == "yes");
  CHECK(run("select: table/relate(subject,on): apple/exist") == "yes");
  CHECK(run("select: apple/relate(subject,on): banana/exist") == "no");
}

TEST_CASE("execution: relation traversal direction") {
  // near edge: dog (subject) -> table (object)
  CHECK(run("select: table/relate(subject,near): _/query: name") == "dog");
  CHECK(run("select: dog/relate(object,near): _/query: name") == "table");
  CHECK(run("select: banana/verifyRel(object,on): table") == "yes");
  CHECK(run("select: banana/verifyRel(object,on): stove") == "no");
  // geometry: apple left of banana
  CHECK(run("select: apple/chooseRel(object,to the left of|to the right of): banana") == "left");
  CHECK(run("select: banana/chooseRel(object,to the left of|to the right of): apple") == "right");
  CHECK(run("select: stove/chooseRel(object,above|below): table") == "above");
  CHECK(run("select: dog/relate(object,near): _/choose: table|stove") == "table");
  CHECK(runError("select: table/relate(subject,on): _/choose: apple|dog").kind ==
        ExecErrorKind::AmbiguousReference);
}

TEST_CASE("execution: comparisons and sameness") {
  CHECK(run("select: apple/select: table/compare size: more") == "table");
  CHECK(run("select: apple/select: table/compare size: less") == "apple");
  CHECK(run("select: apple/select: banana/common") == "size");
  CHECK(run("select: apple/select: banana/same color") == "no");
  CHECK(run("select: apple/select: banana/same size") == "yes");
  CHECK(run("select: apple/select: banana/same") == "no");
  CHECK(run("select: apple/select: banana/different color") == "yes");
  CHECK(run("select: fruit/same size") == "yes");
  CHECK(run("select: fruit/same color") == "no");
  CHECK(run("select: fruit/different color") == "yes");
  CHECK(run("select: fruit/different size") == "no");
  CHECK(run("select: allObjs/same color") == "no");
}

TEST_CASE("execution: domain errors carry kind and step index") {
  ExecError e = runError("select: fruit/query: name");
  CHECK(e.kind == ExecErrorKind::AmbiguousReference);
  CHECK(e.stepIndex == 2);
  e = runError("select: bear/query: name");
  CHECK(e.kind == ExecErrorKind::EmptySelection);
  e = runError("select: dog/query: material");
  CHECK(e.kind == ExecErrorKind::MissingAttribute);
  e = runError("select: apple/select: stove/compare size: more");
  CHECK(e.kind == ExecErrorKind::MissingAttribute);
}

TEST_CASE("resolveSelection matches execution semantics") {
  auto chain = [](const std::string& prefix) {
    auto steps = parseProgram(prefix + "/exist").steps;
    steps.pop_back();
    return steps;
  };
  CHECK(resolveSelection(chain("select: fruit"), fixture(), ont()) ==
        std::vector<std::string>{"a1", "b1"});
  CHECK(resolveSelection(chain("select: fruit/filter: yellow"), fixture(), ont()) ==
        std::vector<std::string>{"b1"});
  CHECK(resolveSelection(chain("select: table/relate(subject,on): apple"), fixture(), ont()) ==
        std::vector<std::string>{"a1"});
}

TEST_CASE("mainSubject picks the queried concept") {
  auto subj = [](const std::string& s) { return mainSubject(parseProgram(s)); };
  CHECK(subj("select: table/filter: brown/relate(subject,on): apple/query: color") == "apple");
  CHECK(subj("select: scene/query: weather") == "scene");
  CHECK(subj("select: apple/select: banana/same color") == "apple");
  CHECK(subj("select: fruit/query: name") == "fruit");
  CHECK(subj("select: table/relate(subject,near): _/query: name") == "table");
}

TEST_CASE("spatial short forms") {
  CHECK(spatialShortForm("to the left of") == "left");
  CHECK(spatialShortForm("to the right of") == "right");
  CHECK(spatialShortForm("above") == "above");
  CHECK(spatialShortForm("below") == "below");
  CHECK(spatialShortForm("dog") == "dog");
}
