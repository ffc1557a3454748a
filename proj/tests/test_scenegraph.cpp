#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sceneq/scenegraph.hpp"

using namespace sceneq;
using testutil::ont;
using testutil::rawGraph;
using testutil::rawObject;
using testutil::tables;

TEST_CASE("loadGraph resolves names and counts dropped annotations") {
  json objs;
  objs["o1"] = rawObject("puppy", 10, 10, 40, 40, {"Grey", "sparkly"});
  objs["o2"] = rawObject("tabel", 100, 100, 200, 100, {"wooden"},
                         {{"orbiting", "o1"}, {"near", "o1"}, {"under", "o3"}});
  objs["o3"] = rawObject("gizmo", 400, 10, 30, 30);
  SceneGraph g = loadGraph(rawGraph("t", 640, 480, objs), ont());

  REQUIRE(g.objects.count("o1"));
  CHECK(g.objects.at("o1").name == "dog");
  CHECK(g.objects.at("o1").attributes == std::vector<std::string>{"gray"});
  CHECK(g.objects.at("o2").name == "table");
  CHECK_FALSE(g.objects.count("o3"));
  // dropped: the unknown attribute, the unknown predicate, the unknown
  // object and the relation pointing at it
  CHECK(g.droppedAnnotations == 4);
  CHECK(g.hasEdge("o2", "near", "o1"));
  CHECK_FALSE(g.hasEdge("o2", "under", "o3"));
}

TEST_CASE("loadGraph rejects structural problems") {
  json base;
  base["o1"] = rawObject("dog", 10, 10, 40, 40);

  SUBCASE("box outside the image") {
    json objs = base;
    objs["o2"] = rawObject("cat", 600, 400, 100, 100);
    CHECK_THROWS_AS(loadGraph(rawGraph("t", 640, 480, objs), ont()), SceneqError);
  }
  SUBCASE("empty box") {
    json objs = base;
    objs["o2"] = rawObject("cat", 10, 10, 0, 40);
    CHECK_THROWS_AS(loadGraph(rawGraph("t", 640, 480, objs), ont()), SceneqError);
  }
  SUBCASE("relation endpoint that never existed") {
    json objs = base;
    objs["o2"] = rawObject("cat", 100, 100, 40, 40, {}, {{"near", "nope"}});
    CHECK_THROWS_AS(loadGraph(rawGraph("t", 640, 480, objs), ont()), SceneqError);
  }
  SUBCASE("non-positive image size") {
    CHECK_THROWS_AS(loadGraph(rawGraph("t", 0, 480, base), ont()), SceneqError);
  }
}

TEST_CASE("raw spatial edges are ignored and re-derived from geometry") {
  json objs;
  // The raw edge claims the opposite of the geometry; geometry wins.
  objs["l"] = rawObject("apple", 10, 200, 50, 50, {}, {{"to the right of", "r"}});
  objs["r"] = rawObject("banana", 500, 200, 50, 50);
  SceneGraph g = loadGraph(rawGraph("t", 640, 480, objs), ont());
  CHECK(g.relations.empty());
  CHECK(g.droppedAnnotations == 0);
  g = augmentPositions(std::move(g), 0.3);
  CHECK(g.hasEdge("l", "to the left of", "r"));
  CHECK(g.hasEdge("r", "to the right of", "l"));
  CHECK_FALSE(g.hasEdge("l", "to the right of", "r"));
}

TEST_CASE("exclusive attribute clash keeps one value") {
  json objs;
  objs["o1"] = rawObject("apple", 10, 10, 40, 40, {"red", "green", "small"});
  SceneGraph g = loadGraph(rawGraph("t", 640, 480, objs), ont());
  const auto& attrs = g.objects.at("o1").attributes;
  int colors = 0;
  for (const auto& a : attrs) colors += ont().attributeTypeOf(a) == "color";
  CHECK(colors == 1);
  CHECK(g.droppedAnnotations == 1);
}

TEST_CASE("position tags follow the margin rule") {
  // 100x100 image, margin 0.3: centers below 30 or above 70 get border tags.
  auto tagOf = [](double cx, double cy) {
    json objs;
    objs["o1"] = rawObject("apple", cx - 5, cy - 5, 10, 10);
    SceneGraph g = loadGraph(rawGraph("t", 100, 100, objs), ont());
    return augmentPositions(std::move(g), 0.3).objects.at("o1").positions;
  };
  CHECK(tagOf(10, 50) == std::set<std::string>{"left"});
  CHECK(tagOf(90, 50) == std::set<std::string>{"right"});
  CHECK(tagOf(50, 10) == std::set<std::string>{"top"});
  CHECK(tagOf(50, 90) == std::set<std::string>{"bottom"});
  CHECK(tagOf(50, 50) == std::set<std::string>{"middle"});
  CHECK(tagOf(10, 10) == std::set<std::string>{"left", "top"});
}

TEST_CASE("derived spatial relations agree with an interval oracle") {
  // Jittered boxes; the test recomputes expectations with plain interval
  // arithmetic and compares against the derived edge set.
  Rng rng(123);
  for (int round = 0; round < 25; ++round) {
    json objs;
    struct B {
      std::string id;
      double x, y, w, h;
    };
    std::vector<B> boxes;
    for (int i = 0; i < 4; ++i) {
      B b{"o" + std::to_string(i), 1.0 * rng.below(500), 1.0 * rng.below(350),
          20.0 + rng.below(100), 20.0 + rng.below(90)};
      boxes.push_back(b);
      objs[b.id] = rawObject("apple", b.x, b.y, b.w, b.h);
    }
    SceneGraph g =
        augmentPositions(loadGraph(rawGraph("t", 640, 480, objs), ont()), 0.3);
    for (const auto& a : boxes) {
      for (const auto& b : boxes) {
        if (a.id == b.id) continue;
        // Touching intervals count as disjoint, hence <=.
        bool leftOf = a.x + a.w <= b.x;
        bool above = a.y + a.h <= b.y;
        CHECK(g.hasEdge(a.id, "to the left of", b.id) == leftOf);
        CHECK(g.hasEdge(a.id, "above", b.id) == above);
      }
    }
  }
}

TEST_CASE("augmentPositions rejects a bad margin") {
  json objs;
  objs["o1"] = rawObject("apple", 10, 10, 40, 40);
  SceneGraph g = loadGraph(rawGraph("t", 640, 480, objs), ont());
  CHECK_THROWS_AS(augmentPositions(g, 0.0), SceneqError);
  CHECK_THROWS_AS(augmentPositions(g, 0.6), SceneqError);
  CHECK_NOTHROW(augmentPositions(g, 0.5));
}

TEST_CASE("sameness flags cover shared attribute types") {
  json objs;
  objs["a"] = rawObject("apple", 10, 10, 40, 40, {"red", "small"});
  objs["b"] = rawObject("banana", 100, 10, 40, 40, {"yellow", "small"});
  SceneGraph g = augmentSameness(loadGraph(rawGraph("t", 640, 480, objs), ont()), ont());
  bool sawColor = false, sawSize = false;
  for (const auto& f : g.sameness) {
    if (f.type == "color") {
      sawColor = true;
      CHECK_FALSE(f.same);
    }
    if (f.type == "size") {
      sawSize = true;
      CHECK(f.same);
    }
    CHECK(f.a < f.b);
  }
  CHECK(sawColor);
  CHECK(sawSize);
}

TEST_CASE("global inference follows the trigger table") {
  auto build = [&](std::vector<std::string> names) {
    json objs;
    double x = 10;
    for (size_t i = 0; i < names.size(); ++i) {
      objs["o" + std::to_string(i)] = rawObject(names[i], x, 10, 40, 40);
      x += 60;
    }
    return inferGlobals(loadGraph(rawGraph("t", 640, 480, objs), ont()),
                        tables().triggers);
  };
  SceneGraph sunny = build({"sun", "dog"});
  CHECK(sunny.globals.at("weather") == "sunny");
  SceneGraph conflict = build({"sun", "cloud"});
  CHECK_FALSE(conflict.globals.count("weather"));
  SceneGraph kitchen = build({"stove", "refrigerator"});
  CHECK(kitchen.globals.at("location") == "kitchen");
}

TEST_CASE("uniqueness distinguishes absent from unannotated") {
  SceneGraph g = testutil::fixtureGraph();
  const auto& unann = tables().commonlyUnannotated;
  CHECK(uniqueness(g, ont(), unann, "apple") == Uniqueness::Unique);
  CHECK(uniqueness(g, ont(), unann, "fruit") == Uniqueness::Multiple);
  CHECK(uniqueness(g, ont(), unann, "bear") == Uniqueness::Absent);
  CHECK(uniqueness(g, ont(), unann, "wall") == Uniqueness::Unknown);
  CHECK(countMatching(g, ont(), "fruit") == 2);
  CHECK(countMatching(g, ont(), "food") == 2);
  CHECK(countMatching(g, ont(), "appliance") == 1);
}

TEST_CASE("edge pruning honors the rule table") {
  json objs;
  objs["m"] = rawObject("man", 10, 10, 60, 200, {}, {{"wearing", "d"}, {"wearing", "s"}});
  objs["d"] = rawObject("dog", 100, 300, 60, 50);
  objs["s"] = rawObject("shirt", 20, 50, 40, 60);
  SceneGraph g = pruneEdges(loadGraph(rawGraph("t", 640, 480, objs), ont()), ont(),
                            tables().pruneRules);
  CHECK_FALSE(g.hasEdge("m", "wearing", "d"));
  CHECK(g.hasEdge("m", "wearing", "s"));
}

TEST_CASE("normalized graphs round-trip through json") {
  SceneGraph g = testutil::fixtureGraph();
  SceneGraph back = graphFromNormalizedJson(graphToJson(g), ont());
  CHECK(back.imageId == g.imageId);
  CHECK(back.objects.size() == g.objects.size());
  for (const auto& [id, o] : g.objects) {
    REQUIRE(back.objects.count(id));
    CHECK(back.objects.at(id).name == o.name);
    CHECK(back.objects.at(id).attributes == o.attributes);
    CHECK(back.objects.at(id).positions == o.positions);
  }
  CHECK(back.relations == g.relations);
  CHECK(back.globals == g.globals);
  CHECK(back.droppedAnnotations == g.droppedAnnotations);
  CHECK(back.sameness.size() == g.sameness.size());
}

TEST_CASE("plausibility counts lift to categories and cover positions") {
  SceneGraph g = testutil::fixtureGraph();
  PlausibilityTable t = buildPlausibility({g}, ont());
  CHECK(t.count("apple", "red") == 1);
  CHECK(t.count("fruit", "red") >= 1);
  CHECK(t.count("food", "yellow") >= 1);
  CHECK(t.count("apple", "blue") == 0);
  // relation co-occurrence, both directions
  CHECK(t.count("apple", "table") >= 1);
  CHECK(t.count("table", "apple") >= 1);
  // derived position tags count as values
  CHECK(t.count("stove", "top") >= 1);
  // scene globals
  CHECK(t.count("scene", "kitchen") == 1);
  CHECK(plausible(ont(), t, "apple", "red"));
  CHECK_FALSE(plausible(ont(), t, "apple", "blue"));
}
