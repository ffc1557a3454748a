#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "sceneq/jsonl.hpp"
#include "sceneq/ontology.hpp"

using namespace sceneq;
using testutil::ont;

namespace {

struct BundleFiles {
  std::string concepts =
      "{\"id\": \"apple\", \"kind\": \"object\", \"category\": \"fruit\", \"article\": \"an\"}\n"
      "{\"id\": \"pear\", \"kind\": \"object\", \"category\": \"fruit\"}\n"
      "{\"id\": \"red\", \"kind\": \"attribute\", \"category\": \"color\"}\n"
      "{\"id\": \"green\", \"kind\": \"attribute\", \"category\": \"color\"}\n";
  std::string hierarchy =
      "object,entity\nattribute,entity\nfruit,object\ncolor,attribute\n";
  std::string attributeTypes = "color,exclusive\n";
  std::string exclusions;
  std::string stopwords;
  std::string typos;
};

std::filesystem::path writeBundle(const std::string& name, const BundleFiles& f) {
  auto dir = testutil::tmpDir("ontology_" + name);
  writeFile(dir / "concepts.jsonl", f.concepts);
  writeFile(dir / "hierarchy.csv", f.hierarchy);
  writeFile(dir / "attribute_types.csv", f.attributeTypes);
  writeFile(dir / "exclusions.csv", f.exclusions);
  writeFile(dir / "stopwords.txt", f.stopwords);
  writeFile(dir / "typos.csv", f.typos);
  return dir;
}

}  // namespace

TEST_CASE("shipped bundle loads and answers basic lookups") {
  const Ontology& o = ont();
  REQUIRE(o.find("apple") != nullptr);
  CHECK(o.at("apple").kind == ConceptKind::Object);
  CHECK(o.find("no-such-id") == nullptr);
  try {
    o.at("no-such-id");
    FAIL("expected a lookup error");
  } catch (const SceneqError& e) {
    CHECK(std::string(e.what()).find("no-such-id") != std::string::npos);
  }
  CHECK(o.root() == "entity");
  CHECK(o.isCategory("fruit"));
  CHECK_FALSE(o.isCategory("apple"));
  CHECK(o.isKnownName("apple"));
  CHECK(o.isKnownName("fruit"));
  CHECK_FALSE(o.isKnownName("zeppelin"));
}

TEST_CASE("token normalization handles case, synonyms, typos and stop words") {
  const Ontology& o = ont();
  CHECK(o.normalizeToken("Grey") == "gray");
  CHECK(o.normalizeToken("puppy") == "dog");
  CHECK(o.normalizeToken("couch") == "sofa");
  CHECK(o.normalizeToken("  Fridge ") == "refrigerator");
  CHECK(o.normalizeToken("a dog") == "dog");
  CHECK(o.normalizeToken("tabel") == "table");
  CHECK(o.normalizeToken("on top of") == "on");
  CHECK(o.normalizeToken("the big dog") == std::nullopt);
  CHECK(o.normalizeToken("zeppelin") == std::nullopt);
}

TEST_CASE("token normalization is idempotent over the whole vocabulary") {
  const Ontology& o = ont();
  for (const auto& [id, c] : o.concepts()) {
    auto once = o.normalizeToken(id);
    REQUIRE(once == id);
    for (const auto& syn : c.synonyms) {
      auto viaSyn = o.normalizeToken(syn);
      REQUIRE(viaSyn == id);
      CHECK(o.normalizeToken(*viaSyn) == viaSyn);
    }
  }
}

TEST_CASE("category membership and hierarchy walks") {
  const Ontology& o = ont();
  auto fruit = o.categoryMembers("fruit");
  CHECK(std::find(fruit.begin(), fruit.end(), "apple") != fruit.end());
  CHECK(std::find(fruit.begin(), fruit.end(), "banana") != fruit.end());
  // The category twin concept lives under its parent, never under itself.
  CHECK(std::find(fruit.begin(), fruit.end(), "fruit") == fruit.end());
  CHECK(o.categoryMembers("color").size() == 10);

  auto anc = o.ancestorsOf("apple");
  auto has = [&](const std::string& s) {
    return std::find(anc.begin(), anc.end(), s) != anc.end();
  };
  CHECK(has("fruit"));
  CHECK(has("food"));
  CHECK(has("object"));
  CHECK(has("entity"));
  CHECK(o.parentOf("fruit") == "food");

  CHECK(o.conceptMatches("apple", "apple"));
  CHECK(o.conceptMatches("apple", "fruit"));
  CHECK(o.conceptMatches("apple", "food"));
  CHECK_FALSE(o.conceptMatches("apple", "vegetable"));
  CHECK_FALSE(o.conceptMatches("apple", "banana"));
}

TEST_CASE("attribute type metadata") {
  const Ontology& o = ont();
  CHECK(o.attributeTypeOf("red") == "color");
  CHECK(o.attributeTypeOf("wooden") == "material");
  const AttributeType* size = o.attributeType("size");
  REQUIRE(size != nullptr);
  CHECK(size->exclusive);
  CHECK(size->ordering == std::vector<std::string>{"small", "medium", "large"});
  CHECK(size->moreWord == "larger");
  CHECK(size->lessWord == "smaller");
  const AttributeType* pos = o.attributeType("position");
  REQUIRE(pos != nullptr);
  CHECK_FALSE(pos->exclusive);
  CHECK(o.attributeType("no-such-type") == nullptr);
  CHECK_THROWS_AS(o.attributeTypeOf("apple"), SceneqError);
}

TEST_CASE("exclusions are symmetric") {
  const Ontology& o = ont();
  CHECK(o.excluded("gray", "white"));
  CHECK(o.excluded("white", "gray"));
  CHECK_FALSE(o.excluded("red", "blue"));
}

TEST_CASE("surface helpers: plural and article") {
  const Ontology& o = ont();
  CHECK(o.pluralOf("dog") == "dogs");
  CHECK(o.pluralOf("sheep") == "sheep");
  CHECK(o.pluralOf("box") == "boxes");
  CHECK(o.pluralOf("furniture") == "pieces of furniture");
  CHECK(o.pluralOf("person") == "people");
  // Hierarchy-only names fall back to a regular plural.
  CHECK(o.pluralOf("spatial") == "spatials");
  CHECK(o.articleFor("apple") == "an ");
  CHECK(o.articleFor("dog") == "a ");
  CHECK(o.articleFor("bread") == "");
}

TEST_CASE("bundle validation rejects malformed inputs") {
  BundleFiles ok;
  CHECK_NOTHROW(Ontology::load(writeBundle("ok", ok)));

  SUBCASE("duplicate concept id") {
    BundleFiles f;
    f.concepts += "{\"id\": \"apple\", \"kind\": \"object\", \"category\": \"fruit\"}\n";
    CHECK_THROWS_AS(Ontology::load(writeBundle("dup", f)), SceneqError);
  }
  SUBCASE("concept category missing from the hierarchy") {
    BundleFiles f;
    f.concepts += "{\"id\": \"carrot\", \"kind\": \"object\", \"category\": \"vegetable\"}\n";
    CHECK_THROWS_AS(Ontology::load(writeBundle("nocat", f)), SceneqError);
  }
  SUBCASE("hierarchy cycle") {
    BundleFiles f;
    f.hierarchy = "object,entity\nattribute,entity\nfruit,snack\nsnack,fruit\ncolor,attribute\n";
    CHECK_THROWS_AS(Ontology::load(writeBundle("cycle", f)), SceneqError);
  }
  SUBCASE("two hierarchy roots") {
    BundleFiles f;
    f.hierarchy = "object,entity\nattribute,world\nfruit,object\ncolor,attribute\n";
    CHECK_THROWS_AS(Ontology::load(writeBundle("tworoots", f)), SceneqError);
  }
  SUBCASE("attribute category without type metadata") {
    BundleFiles f;
    f.concepts += "{\"id\": \"small\", \"kind\": \"attribute\", \"category\": \"size\"}\n";
    f.hierarchy += "size,attribute\n";
    CHECK_THROWS_AS(Ontology::load(writeBundle("notype", f)), SceneqError);
  }
  SUBCASE("ordering over a value that is not a member") {
    BundleFiles f;
    f.attributeTypes = "color,exclusive,red|blue,redder|bluer\n";
    CHECK_THROWS_AS(Ontology::load(writeBundle("badorder", f)), SceneqError);
  }
  SUBCASE("reserved word as concept id") {
    BundleFiles f;
    f.concepts += "{\"id\": \"scene\", \"kind\": \"object\", \"category\": \"fruit\"}\n";
    CHECK_THROWS_AS(Ontology::load(writeBundle("reserved", f)), SceneqError);
  }
  SUBCASE("weather and location stay legal as attribute type names") {
    BundleFiles f;
    f.concepts += "{\"id\": \"sunny\", \"kind\": \"attribute\", \"category\": \"weather\"}\n";
    f.hierarchy += "weather,attribute\n";
    f.attributeTypes += "weather,exclusive\n";
    CHECK_NOTHROW(Ontology::load(writeBundle("weather", f)));
  }
}
