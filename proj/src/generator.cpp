#include "sceneq/generator.hpp"

#include <algorithm>
#include <cctype>

#include "sceneq/balancing.hpp"
#include "sceneq/jsonl.hpp"

namespace sceneq {

namespace {

const std::map<std::string, std::string>& posPhrases() {
  static const std::map<std::string, std::string> m = {{"left", "on the left"},
                                                       {"right", "on the right"},
                                                       {"top", "at the top"},
                                                       {"bottom", "at the bottom"},
                                                       {"middle", "in the middle"}};
  return m;
}

std::string posPhrase(const std::string& tag) {
  auto it = posPhrases().find(tag);
  if (it == posPhrases().end()) throw SceneqError("unknown position tag '" + tag + "'");
  return it->second;
}

bool vowelStart(const std::string& w) {
  for (char c : w) {
    if (!std::isalpha(static_cast<unsigned char>(c))) continue;
    char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return l == 'a' || l == 'e' || l == 'i' || l == 'o' || l == 'u';
  }
  return false;
}

// Article for an arbitrary phrase: the ontology decides for known leading
// concepts, a vowel heuristic covers category names and compounds.
std::string articleForPhrase(const Ontology& ont, const std::string& phrase) {
  std::string first = split(phrase, ' ')[0];
  if (ont.find(first)) return ont.articleFor(first);
  return vowelStart(first) ? "an " : "a ";
}

std::string indefinitePhrase(const Ontology& ont, const std::string& phrase) {
  return articleForPhrase(ont, phrase) + phrase;
}

// Word-level containment; multi-word needles match as a token sequence.
bool mentionsValue(const std::string& surface, const std::string& value) {
  if (value.empty()) return false;
  auto tokens = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (std::isalnum(static_cast<unsigned char>(c)))
        cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      else if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  };
  auto hay = tokens(surface);
  auto needle = tokens(value);
  if (needle.empty() || hay.size() < needle.size()) return false;
  for (size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool all = true;
    for (size_t j = 0; j < needle.size(); ++j)
      if (hay[i + j] != needle[j]) {
        all = false;
        break;
      }
    if (all) return true;
  }
  return false;
}

std::string capitalizeFirst(std::string s) {
  for (char& c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      break;
    }
    if (!std::isspace(static_cast<unsigned char>(c))) break;
  }
  return s;
}

Step makeSelect(const std::string& what) { return Step{Op::Select, "", {what}, ""}; }
Step makeFilter(const std::string& attr) { return Step{Op::Filter, "", {attr}, ""}; }
Step makeRelate(const std::string& dir, const std::string& rel, const std::string& target) {
  return Step{Op::Relate, rel, {target}, dir};
}

std::string chainText(const std::vector<Step>& steps) {
  return serializeProgram(Program{steps});
}

}  // namespace

std::vector<Pattern> loadPatterns(const std::filesystem::path& path) {
  std::vector<Pattern> out;
  const auto& rows = catalogRows();
  forEachJsonl(path, [&](const json& rec, size_t line) {
    Pattern p;
    try {
      p.group = rec.at("group").get<std::string>();
      p.program = rec.at("program").get<std::string>();
      for (const auto& t : rec.at("texts")) p.texts.push_back(t.get<std::string>());
      p.shortAnswer = rec.at("short").get<std::string>();
      p.longAnswer = rec.value("long", "");
      p.longYes = rec.value("longYes", "");
      p.longNo = rec.value("longNo", "");
      if (rec.contains("constraints"))
        for (const auto& c : rec.at("constraints")) p.constraints.push_back(c.get<std::string>());
    } catch (const json::exception& e) {
      throw SceneqError(path.string() + ":" + std::to_string(line) + ": bad pattern: " + e.what());
    }
    if (std::find(rows.begin(), rows.end(), p.group) == rows.end())
      throw SceneqError(path.string() + ":" + std::to_string(line) + ": unknown group '" +
                        p.group + "'");
    if (p.texts.empty())
      throw SceneqError(path.string() + ":" + std::to_string(line) + ": pattern has no texts");
    if (p.longAnswer.empty() && (p.longYes.empty() || p.longNo.empty()))
      throw SceneqError(path.string() + ":" + std::to_string(line) +
                        ": pattern needs long or longYes+longNo");
    out.push_back(std::move(p));
  });
  if (out.empty()) throw SceneqError(path.string() + ": no patterns");
  return out;
}

std::vector<Reference> buildReferences(const SceneGraph& g, const Ontology& ont,
                                       const std::string& target, int maxDepth) {
  const SGObject& obj = g.object(target);
  const std::string& c = obj.name;
  std::vector<Reference> out;

  auto tryAdd = [&](const std::vector<Step>& steps, const std::string& surface,
                    const std::string& indef, std::set<std::string> mentions, int depth,
                    bool direct) {
    auto ids = resolveSelection(steps, g, ont);
    if (ids.size() != 1 || ids[0] != target) return;
    Reference r;
    r.target = target;
    r.direct = direct;
    r.surface = surface;
    r.indefinite = indef;
    r.prefix = chainText(steps);
    r.mentions = std::move(mentions);
    r.depth = depth;
    out.push_back(std::move(r));
  };

  tryAdd({makeSelect(c)}, "the " + c, ont.articleFor(c) + c, {c}, 0, true);

  if (maxDepth >= 1) {
    for (const auto& a : obj.attributes)
      tryAdd({makeSelect(c), makeFilter(a)}, "the " + a + " " + c,
             articleForPhrase(ont, a) + a + " " + c, {c, a}, 1, false);
    for (const auto& p : obj.positions)
      tryAdd({makeSelect(c), makeFilter(p)}, "the " + c + " " + posPhrase(p),
             ont.articleFor(c) + c + " " + posPhrase(p), {c, p}, 1, false);
    for (const auto& cat : ont.ancestorsOf(c)) {
      if (cat == ont.root() || cat == c) continue;
      if (ont.parentOf(cat) == ont.root()) continue;  // kind buckets are not names
      tryAdd({makeSelect(cat)}, "the " + cat, indefinitePhrase(ont, cat), {cat}, 1, false);
    }
  }

  if (maxDepth >= 2) {
    for (const auto& r : g.relations) {
      bool isSubj = r.subject == target;
      bool isObj = r.object == target;
      if (isSubj == isObj) continue;  // skip self loops too
      const std::string& anchorId = isSubj ? r.object : r.subject;
      for (const auto& aref : buildReferences(g, ont, anchorId, 1)) {
        std::vector<Step> steps;
        for (const auto& seg : split(aref.prefix, '/'))
          steps.push_back(trim(seg).rfind("filter", 0) == 0
                              ? makeFilter(trim(split(seg, ':')[1]))
                              : makeSelect(trim(split(seg, ':')[1])));
        std::set<std::string> mentions = aref.mentions;
        mentions.insert(c);
        mentions.insert(r.predicate);
        if (isSubj) {
          steps.push_back(makeRelate("subject", r.predicate, c));
          tryAdd(steps, "the " + c + " " + r.predicate + " " + aref.surface,
                 ont.articleFor(c) + c + " " + r.predicate + " " + aref.surface, mentions, 2,
                 false);
        } else {
          steps.push_back(makeRelate("object", r.predicate, c));
          tryAdd(steps, "the " + c + " that " + aref.surface + " is " + r.predicate,
                 ont.articleFor(c) + c + " that " + aref.surface + " is " + r.predicate, mentions,
                 2, false);
        }
      }
    }
  }

  std::sort(out.begin(), out.end(), [](const Reference& a, const Reference& b) {
    return std::tie(a.depth, a.prefix) < std::tie(b.depth, b.prefix);
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Reference& a, const Reference& b) { return a.prefix == b.prefix; }),
            out.end());
  return out;
}

std::string selectDecoy(const SceneGraph& g, const Ontology& ont, const PlausibilityTable& table,
                        const std::string& subject, const std::string& truth,
                        const std::vector<std::string>& trueNow, Rng& rng) {
  (void)g;
  const Concept& t = ont.at(truth);
  std::vector<std::string> pool = t.kind == ConceptKind::Attribute
                                      ? ont.categoryMembers(ont.attributeTypeOf(truth))
                                      : ont.categoryMembers(t.category);
  std::vector<std::pair<std::string, long>> weighted;
  long total = 0;
  for (const auto& cand : pool) {
    if (cand == truth) continue;
    if (ont.excluded(cand, truth)) continue;
    if (std::find(trueNow.begin(), trueNow.end(), cand) != trueNow.end()) continue;
    long w = table.count(subject, cand);
    if (w < 1) continue;
    weighted.push_back({cand, w});
    total += w;
  }
  if (weighted.empty())
    throw NoDecoyAvailable("no plausible decoy for '" + truth + "' on '" + subject + "'");
  long x = static_cast<long>(rng.below(static_cast<uint64_t>(total)));
  for (const auto& [cand, w] : weighted) {
    x -= w;
    if (x < 0) return cand;
  }
  return weighted.back().first;  // unreachable
}

json QAInstance::toJson() const {
  json j{{"question", question},
         {"semantic", semantic},
         {"answer", answer},
         {"fullAnswer", fullAnswer},
         {"types",
          {{"structural", types.structural},
           {"semantic", types.semantic},
           {"detailed", types.detailed}}},
         {"groups", {{"global", groupGlobal}, {"local", groupLocal}}},
         {"annotations", annotations},
         {"imageId", imageId},
         {"questionId", questionId}};
  if (isBalanced) j["isBalanced"] = true;
  if (!split.empty()) j["split"] = split;
  return j;
}

QAInstance QAInstance::fromJson(const json& rec) {
  QAInstance q;
  try {
    q.questionId = rec.at("questionId").get<std::string>();
    q.imageId = rec.at("imageId").get<std::string>();
    q.question = rec.at("question").get<std::string>();
    q.semantic = rec.at("semantic").get<std::string>();
    q.answer = rec.at("answer").get<std::string>();
    q.fullAnswer = rec.at("fullAnswer").get<std::string>();
    q.types.structural = rec.at("types").at("structural").get<std::string>();
    q.types.semantic = rec.at("types").at("semantic").get<std::string>();
    q.types.detailed = rec.at("types").at("detailed").get<std::string>();
    q.groupGlobal = rec.at("groups").at("global").get<std::string>();
    q.groupLocal = rec.at("groups").at("local").get<std::string>();
    q.annotations = rec.at("annotations");
    q.isBalanced = rec.value("isBalanced", false);
    q.split = rec.value("split", "");
  } catch (const json::exception& e) {
    throw SceneqError(std::string("bad question record: ") + e.what());
  }
  return q;
}

namespace {

// Resolves [optional] segments (kept with p=0.5) and (a|b) alternates.
// Applies to text templates only; program templates use their parentheses
// for step arguments.
std::string resolveChoices(const std::string& tmpl, Rng& rng) {
  std::string out;
  for (size_t i = 0; i < tmpl.size(); ++i) {
    char ch = tmpl[i];
    if (ch == '[') {
      size_t end = tmpl.find(']', i);
      if (end == std::string::npos) throw SceneqError("unclosed [ in template: " + tmpl);
      std::string inner = tmpl.substr(i + 1, end - i - 1);
      if (rng.chance(0.5)) out += inner;
      i = end;
    } else if (ch == '(') {
      size_t end = tmpl.find(')', i);
      if (end == std::string::npos) throw SceneqError("unclosed ( in template: " + tmpl);
      auto alts = split(tmpl.substr(i + 1, end - i - 1), '|');
      out += rng.pick(alts);
      i = end;
    } else {
      out += ch;
    }
  }
  // Collapse doubled spaces left by dropped optionals.
  std::string clean;
  for (char ch : out)
    if (ch != ' ' || clean.empty() || clean.back() != ' ') clean += ch;
  // A dropped optional can leave a space before punctuation.
  std::string final;
  for (char ch : clean) {
    if ((ch == '?' || ch == '.' || ch == ',') && !final.empty() && final.back() == ' ')
      final.pop_back();
    final += ch;
  }
  return trim(final);
}

std::string substituteAll(const std::string& tmpl, const std::map<std::string, std::string>& holes,
                          const char* what) {
  std::string out;
  for (size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '<') {
      out += tmpl[i];
      continue;
    }
    size_t end = tmpl.find('>', i);
    if (end == std::string::npos) throw SceneqError(std::string("unclosed hole in ") + what);
    std::string name = tmpl.substr(i + 1, end - i - 1);
    auto it = holes.find(name);
    if (it == holes.end())
      throw SceneqError(std::string(what) + " hole <" + name + "> has no binding");
    out += it->second;
    i = end;
  }
  return out;
}

// Substitutes holes token-wise so each hole's word span is known. Spans are
// whitespace-token indices, end exclusive.
std::string substituteTracked(const std::string& resolved,
                              const std::map<std::string, std::string>& holes,
                              std::map<std::string, std::pair<int, int>>& spans) {
  std::vector<std::string> words;
  for (const auto& token : split(resolved, ' ')) {
    if (token.empty()) continue;
    size_t open = token.find('<');
    if (open == std::string::npos) {
      words.push_back(token);
      continue;
    }
    size_t close = token.find('>', open);
    if (close == std::string::npos) throw SceneqError("unclosed hole in text: " + resolved);
    std::string name = token.substr(open + 1, close - open - 1);
    auto it = holes.find(name);
    if (it == holes.end()) throw SceneqError("text hole <" + name + "> has no binding");
    std::string prefix = token.substr(0, open);
    std::string suffix = token.substr(close + 1);
    std::vector<std::string> valueWords;
    for (const auto& w : split(it->second, ' '))
      if (!w.empty()) valueWords.push_back(w);
    if (valueWords.empty()) valueWords.push_back("");
    valueWords.front() = prefix + valueWords.front();
    valueWords.back() += suffix;
    int start = static_cast<int>(words.size());
    for (const auto& w : valueWords) words.push_back(w);
    spans[name] = {start, static_cast<int>(words.size())};
  }
  // Article agreement after substitution: a -> an before vowel sounds.
  for (size_t i = 0; i + 1 < words.size(); ++i) {
    bool lower = words[i] == "a", upper = words[i] == "A";
    if ((lower || upper) && vowelStart(words[i + 1])) words[i] = lower ? "an" : "An";
    if ((words[i] == "an" || words[i] == "An") && !vowelStart(words[i + 1]))
      words[i] = words[i] == "an" ? "a" : "A";
  }
  return join(words, " ");
}

}  // namespace

InstantiateResult instantiate(const SceneGraph& g, const Ontology& ont, const Pattern& pattern,
                              const Binding& binding, Rng& rng) {
  std::string progText = substituteAll(pattern.program, binding.holes, "program");
  Program prog = parseProgram(progText);

  ExecResult res = execute(prog, g, ont);
  if (!res.ok()) {
    bool finalQuery = prog.steps.back().op == Op::Query;
    if (finalQuery && res.error->kind == ExecErrorKind::AmbiguousReference &&
        res.error->stepIndex == static_cast<int>(prog.steps.size()))
      return {std::nullopt, "multiple valid answers"};
    return {std::nullopt, res.error->describe()};
  }
  const std::string& answer = *res.answer;

  // Choice-style finals present the alternatives in the question, so the
  // answer word appearing in a reference reveals nothing extra; the probed
  // values still must not.
  Op last = prog.steps.back().op;
  bool answerIsAlternative = last == Op::Choose || last == Op::ChooseRel || last == Op::Compare;
  for (const auto& [hole, oid] : binding.holeObjects) {
    (void)oid;
    const std::string& surface = binding.holes.at(hole);
    if (!answerIsAlternative && mentionsValue(surface, answer))
      return {std::nullopt, "discloses answer"};
    if (hole == "tDef") continue;  // the verified target slot names its probe by construction
    for (const auto& pv : binding.probed)
      if (mentionsValue(surface, pv)) return {std::nullopt, "repeats information"};
  }

  TypeTriple types = classify(prog);
  if (types.detailed != pattern.group)
    throw SceneqError("pattern group '" + pattern.group + "' produced a '" + types.detailed +
                      "' program: " + progText);
  GroupLabel labels = labelGroups(prog, types);

  std::string text = resolveChoices(rng.pick(pattern.texts), rng);
  std::map<std::string, std::pair<int, int>> spans;
  std::string question = capitalizeFirst(substituteTracked(text, binding.holes, spans));

  std::map<std::string, std::string> full = binding.holes;
  full["answer"] = answer;
  full["answerShort"] = spatialShortForm(answer);
  full["answerIndef"] = answer == "yes" || answer == "no" ? answer : indefinitePhrase(ont, answer);
  const std::string& longTmpl = answer == "yes"   ? (pattern.longYes.empty() ? pattern.longAnswer
                                                                             : pattern.longYes)
                                : answer == "no"  ? (pattern.longNo.empty() ? pattern.longAnswer
                                                                            : pattern.longNo)
                                                  : pattern.longAnswer;
  if (longTmpl.empty())
    throw SceneqError("pattern '" + pattern.group + "' has no long answer for '" + answer + "'");
  std::string fullAnswer = capitalizeFirst(
      substituteAll(resolveChoices(longTmpl, rng), full, "long answer"));

  QAInstance q;
  q.imageId = g.imageId;
  q.question = question;
  q.semantic = serializeProgram(prog);
  q.answer = answer;
  q.fullAnswer = fullAnswer;
  q.types = types;
  q.groupGlobal = labels.global;
  q.groupLocal = labels.local;
  q.annotations = json::object();
  json qSpans = json::object();
  for (const auto& [hole, oid] : binding.holeObjects) {
    auto it = spans.find(hole);
    if (it == spans.end()) continue;  // hole unused by the chosen text
    qSpans[std::to_string(it->second.first) + ":" + std::to_string(it->second.second)] = oid;
  }
  q.annotations["question"] = qSpans;
  if (!binding.answerObject.empty()) q.annotations["answer"] = binding.answerObject;
  return {q, ""};
}

namespace {

// ---- site enumeration ------------------------------------------------

using RefMap = std::map<std::string, std::vector<Reference>>;

void addRefHoles(Binding& b, const std::string& key, const std::string& surfaceHole,
                 const Reference& ref, const SceneGraph& g, const Ontology& ont) {
  const std::string& name = g.object(ref.target).name;
  b.holes[key + "Prog"] = ref.prefix;
  b.holes[surfaceHole] = ref.surface;
  b.holes[surfaceHole + "Short"] = "the " + name;
  if (surfaceHole == "s") {
    b.holes["sIndef"] = ref.indefinite;
    b.holes["sName"] = name;
    b.holes["sPl"] = ont.pluralOf(name);
  }
  b.holeObjects[surfaceHole] = ref.target;
}

const Reference& pickRef(const std::vector<Reference>& refs, Rng& rng) { return rng.pick(refs); }

// Object categories usable as question nouns: every member is an object
// concept and the category sits below the kind buckets.
std::vector<std::string> questionCategories(const Ontology& ont) {
  std::set<std::string> cats;
  for (const auto& [id, c] : ont.concepts()) {
    if (c.kind != ConceptKind::Object) continue;
    for (const auto& anc : ont.ancestorsOf(id)) {
      if (anc == ont.root() || ont.parentOf(anc) == ont.root()) continue;
      cats.insert(anc);
    }
  }
  std::vector<std::string> out(cats.begin(), cats.end());
  return out;
}

std::map<std::string, std::vector<std::string>> typedValues(const SGObject& o,
                                                            const Ontology& ont) {
  std::map<std::string, std::vector<std::string>> vals;
  for (const auto& a : o.attributes) vals[ont.attributeTypeOf(a)].push_back(a);
  if (!o.positions.empty())
    vals["position"].assign(o.positions.begin(), o.positions.end());
  return vals;
}

std::string oppositeSide(const std::string& p) {
  if (p == "left") return "right";
  if (p == "right") return "left";
  if (p == "top") return "bottom";
  if (p == "bottom") return "top";
  return "";
}

struct SiteContext {
  const SceneGraph& g;
  const Ontology& ont;
  const PlausibilityTable& table;
  const RefMap& refs;
  const std::set<std::string>& unannotated;

  // Absence is only assertable for reliably annotated names.
  bool provablyAbsent(const std::string& name) const {
    return !unannotated.count(name) && countMatching(g, ont, name) == 0;
  }
};

std::vector<Binding> sitesQueryGlobal(const SiteContext& cx, Rng&) {
  std::vector<Binding> out;
  for (const auto& [field, value] : cx.g.globals) {
    (void)value;
    Binding b;
    b.holes["field"] = field;
    b.tags["field"] = field;
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Binding> sitesVerifyGlobal(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  for (const auto& [field, value] : cx.g.globals) {
    Binding yes;
    yes.holes["field"] = field;
    yes.holes["gv"] = value;
    yes.holes["gvIndef"] = indefinitePhrase(cx.ont, value);
    yes.tags["field"] = field;
    out.push_back(yes);
    try {
      std::string decoy = selectDecoy(cx.g, cx.ont, cx.table, "scene", value, {value}, rng);
      Binding no = yes;
      no.holes["gv"] = decoy;
      no.holes["gvIndef"] = indefinitePhrase(cx.ont, decoy);
      out.push_back(std::move(no));
    } catch (const NoDecoyAvailable&) {
    }
  }
  return out;
}

std::vector<Binding> sitesChooseGlobal(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  for (const auto& [field, value] : cx.g.globals) {
    try {
      std::string decoy = selectDecoy(cx.g, cx.ont, cx.table, "scene", value, {value}, rng);
      Binding b;
      b.holes["field"] = field;
      b.tags["field"] = field;
      std::string cA = std::min(value, decoy), cB = std::max(value, decoy);
      b.holes["cA"] = cA;
      b.holes["cB"] = cB;
      std::string x = value, y = decoy;
      if (rng.chance(0.5)) std::swap(x, y);
      b.holes["x"] = x;
      b.holes["y"] = y;
      b.holes["xIndef"] = indefinitePhrase(cx.ont, x);
      b.holes["yIndef"] = indefinitePhrase(cx.ont, y);
      out.push_back(std::move(b));
    } catch (const NoDecoyAvailable&) {
    }
  }
  return out;
}

std::vector<Binding> sitesQueryAttr(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  for (const auto& [oid, refs] : cx.refs) {
    const SGObject& o = cx.g.object(oid);
    for (const auto& [type, vals] : typedValues(o, cx.ont)) {
      (void)vals;
      Binding b;
      addRefHoles(b, "s", "s", pickRef(refs, rng), cx.g, cx.ont);
      b.holes["type"] = type;
      b.tags["type"] = type;
      out.push_back(std::move(b));
    }
  }
  return out;
}

std::vector<Binding> sitesVerifyAttr(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  for (const auto& [oid, refs] : cx.refs) {
    const SGObject& o = cx.g.object(oid);
    for (const auto& [type, vals] : typedValues(o, cx.ont)) {
      std::string truth = rng.pick(vals);
      auto push = [&](const std::string& attr) {
        Binding b;
        addRefHoles(b, "s", "s", pickRef(refs, rng), cx.g, cx.ont);
        b.holes["type"] = type;
        b.holes["attr"] = attr;
        if (type == "position") b.holes["attrPos"] = posPhrase(attr);
        b.tags["type"] = type;
        b.probed = {attr};
        out.push_back(std::move(b));
      };
      push(truth);
      if (type == "position") {
        std::string opp = oppositeSide(truth);
        if (!opp.empty() && !o.positions.count(opp)) push(opp);
      } else {
        try {
          push(selectDecoy(cx.g, cx.ont, cx.table, o.name, truth, vals, rng));
        } catch (const NoDecoyAvailable&) {
        }
      }
    }
  }
  return out;
}

std::vector<Binding> sitesVerifyAttrs(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  for (const auto& [oid, refs] : cx.refs) {
    const SGObject& o = cx.g.object(oid);
    auto vals = typedValues(o, cx.ont);
    std::vector<std::string> types;
    for (const auto& [type, vs] : vals) {
      (void)vs;
      if (type != "position") types.push_back(type);
    }
    for (size_t i = 0; i < types.size(); ++i)
      for (size_t j = i + 1; j < types.size(); ++j) {
        std::string a1 = rng.pick(vals[types[i]]);
        std::string a2 = rng.pick(vals[types[j]]);
        auto push = [&](const std::string& v1, const std::string& v2) {
          Binding b;
          addRefHoles(b, "s", "s", pickRef(refs, rng), cx.g, cx.ont);
          b.holes["t1"] = types[i];
          b.holes["t2"] = types[j];
          b.holes["a1"] = v1;
          b.holes["a2"] = v2;
          b.probed = {v1, v2};
          out.push_back(std::move(b));
        };
        push(a1, a2);
        bool decoyFirst = rng.chance(0.5);
        try {
          if (decoyFirst)
            push(selectDecoy(cx.g, cx.ont, cx.table, o.name, a1, vals[types[i]], rng), a2);
          else
            push(a1, selectDecoy(cx.g, cx.ont, cx.table, o.name, a2, vals[types[j]], rng));
        } catch (const NoDecoyAvailable&) {
        }
      }
  }
  return out;
}

std::vector<Binding> sitesChooseAttr(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  for (const auto& [oid, refs] : cx.refs) {
    const SGObject& o = cx.g.object(oid);
    for (const auto& [type, vals] : typedValues(o, cx.ont)) {
      std::string truth, decoy;
      if (type == "position") {
        bool left = o.positions.count("left"), right = o.positions.count("right");
        if (left == right) continue;  // needs exactly one horizontal side
        truth = left ? "left" : "right";
        decoy = oppositeSide(truth);
      } else {
        truth = rng.pick(vals);
        try {
          decoy = selectDecoy(cx.g, cx.ont, cx.table, o.name, truth, vals, rng);
        } catch (const NoDecoyAvailable&) {
          continue;
        }
      }
      Binding b;
      addRefHoles(b, "s", "s", pickRef(refs, rng), cx.g, cx.ont);
      b.holes["type"] = type;
      b.holes["cA"] = std::min(truth, decoy);
      b.holes["cB"] = std::max(truth, decoy);
      std::string x = truth, y = decoy;
      if (rng.chance(0.5)) std::swap(x, y);
      b.holes["x"] = x;
      b.holes["y"] = y;
      b.tags["type"] = type;
      b.probed = {truth, decoy};
      out.push_back(std::move(b));
    }
  }
  return out;
}

// Existence chains shared by exist / logicAnd / logicOr: a bare or filtered
// concept selection plus its surface forms and the graph truth.
struct ExistChain {
  std::string name;  // concept or category
  std::string attr;  // optional filter
  bool isCategory = false;
  bool truth = false;
  std::string chain, n, nIndef, nPl;
};

std::vector<ExistChain> existChains(const SiteContext& cx) {
  std::vector<ExistChain> out;
  std::set<std::string> present;
  for (const auto& [oid, o] : cx.g.objects) {
    (void)oid;
    present.insert(o.name);
  }
  auto add = [&](const std::string& name, const std::string& attr, bool isCat, bool truth) {
    ExistChain c;
    c.name = name;
    c.attr = attr;
    c.isCategory = isCat;
    c.truth = truth;
    c.chain = "select: " + name + (attr.empty() ? "" : "/filter: " + attr);
    std::string phrase = attr.empty() ? name : attr + " " + name;
    c.n = phrase;
    c.nIndef = indefinitePhrase(cx.ont, phrase);
    c.nPl = attr.empty() ? cx.ont.pluralOf(name) : attr + " " + cx.ont.pluralOf(name);
    out.push_back(std::move(c));
  };

  for (const auto& name : present) {
    add(name, "", false, true);
    std::set<std::string> held;
    for (const auto& [oid, o] : cx.g.objects) {
      (void)oid;
      if (o.name != name) continue;
      for (const auto& a : o.attributes) held.insert(a);
    }
    for (const auto& a : held) add(name, a, false, true);
    // Plausible attribute no instance holds.
    for (const auto& type : cx.ont.attributeTypeNames()) {
      if (type == "position") continue;
      for (const auto& v : cx.ont.categoryMembers(type)) {
        if (held.count(v)) continue;
        if (cx.table.count(name, v) < 1) continue;
        add(name, v, false, false);
        break;  // one false filter per type is plenty
      }
    }
    // First provably absent sibling.
    const Concept& c = cx.ont.at(name);
    for (const auto& sib : cx.ont.categoryMembers(c.category)) {
      if (sib == name || !cx.provablyAbsent(sib)) continue;
      add(sib, "", false, false);
      break;
    }
  }
  for (const auto& cat : questionCategories(cx.ont)) {
    size_t n = countMatching(cx.g, cx.ont, cat);
    if (n == 0 && cx.unannotated.count(cat)) continue;
    add(cat, "", true, n > 0);
  }
  return out;
}

std::vector<Binding> sitesExist(const SiteContext& cx, Rng&) {
  std::vector<Binding> out;
  for (const auto& c : existChains(cx)) {
    Binding b;
    b.holes["cat"] = c.name;
    if (!c.attr.empty()) b.holes["attr"] = c.attr;
    b.holes["n"] = c.n;
    b.holes["nIndef"] = c.nIndef;
    b.holes["nPl"] = c.nPl;
    b.tags["filtered"] = c.attr.empty() ? "no" : "yes";
    b.tags["level"] = c.isCategory ? "cat" : "concept";
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Binding> sitesLogic(const SiteContext& cx, Rng& rng, bool) {
  std::vector<Binding> out;
  auto chains = existChains(cx);
  rng.shuffle(chains);
  for (size_t i = 0; i + 1 < chains.size(); i += 2) {
    const ExistChain& c1 = chains[i];
    const ExistChain& c2 = chains[i + 1];
    if (c1.name == c2.name) continue;
    if (c1.isCategory || c2.isCategory) continue;  // category mentions read badly with articles
    Binding b;
    b.holes["chain1"] = c1.chain;
    b.holes["chain2"] = c2.chain;
    b.holes["c1Indef"] = c1.nIndef;
    b.holes["c2Indef"] = c2.nIndef;
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Binding> sitesQueryObject(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  for (const auto& cat : questionCategories(cx.ont)) {
    std::vector<std::string> members;
    for (const auto& [oid, o] : cx.g.objects)
      if (cx.ont.conceptMatches(o.name, cat)) members.push_back(oid);
    if (members.empty()) continue;
    Binding b;
    b.holes["cat"] = cat;
    b.tags["filtered"] = "no";
    if (members.size() == 1) b.answerObject = members[0];
    out.push_back(std::move(b));
    // Filtered flavor when an attribute narrows the set to one object.
    if (members.size() < 2) continue;
    std::map<std::string, std::vector<std::string>> byAttr;
    for (const auto& oid : members)
      for (const auto& a : cx.g.object(oid).attributes) byAttr[a].push_back(oid);
    std::vector<std::string> narrows;
    for (const auto& [a, ids] : byAttr)
      if (ids.size() == 1) narrows.push_back(a);
    if (narrows.empty()) continue;
    std::string attr = rng.pick(narrows);
    Binding f;
    f.holes["cat"] = cat;
    f.holes["attr"] = attr;
    f.tags["filtered"] = "yes";
    f.answerObject = byAttr[attr][0];
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Binding> sitesChooseObject(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  for (const auto& cat : questionCategories(cx.ont)) {
    std::vector<std::string> members;
    for (const auto& [oid, o] : cx.g.objects)
      if (cx.ont.conceptMatches(o.name, cat)) members.push_back(oid);
    if (members.size() != 1) continue;
    const std::string& truth = cx.g.object(members[0]).name;
    if (truth == cat) continue;
    std::string decoy;
    try {
      decoy = selectDecoy(cx.g, cx.ont, cx.table, cat, truth, {truth}, rng);
    } catch (const NoDecoyAvailable&) {
      continue;
    }
    Binding b;
    b.holes["cat"] = cat;
    b.holes["cA"] = std::min(truth, decoy);
    b.holes["cB"] = std::max(truth, decoy);
    std::string x = truth, y = decoy;
    if (rng.chance(0.5)) std::swap(x, y);
    b.holes["x"] = x;
    b.holes["y"] = y;
    b.holes["xIndef"] = indefinitePhrase(cx.ont, x);
    b.holes["yIndef"] = indefinitePhrase(cx.ont, y);
    b.probed = {b.holes["cA"], b.holes["cB"]};
    b.answerObject = members[0];
    out.push_back(std::move(b));
  }
  return out;
}

// Relation sites shared by queryRel / chooseObjRel / existRel: one edge,
// anchored at one endpoint, querying the other side.
struct RelSite {
  std::string anchorId, rel, dir;       // dir: side the queried objects occupy
  std::vector<std::string> candidates;  // object ids on the queried side
};

std::vector<RelSite> relationSites(const SiteContext& cx) {
  std::map<std::tuple<std::string, std::string, std::string>, std::set<std::string>> grouped;
  for (const auto& r : cx.g.relations) {
    grouped[{r.object, r.predicate, "subject"}].insert(r.subject);
    grouped[{r.subject, r.predicate, "object"}].insert(r.object);
  }
  std::vector<RelSite> out;
  for (const auto& [key, cands] : grouped) {
    const auto& [anchor, rel, dir] = key;
    if (!cx.refs.count(anchor)) continue;
    out.push_back({anchor, rel, dir, {cands.begin(), cands.end()}});
  }
  return out;
}

std::vector<Binding> sitesQueryRel(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  for (const auto& site : relationSites(cx)) {
    Binding b;
    addRefHoles(b, "a", "anchor", pickRef(cx.refs.at(site.anchorId), rng), cx.g, cx.ont);
    b.holes["rel"] = site.rel;
    b.holes["relTxt"] = site.rel;
    b.tags["dir"] = site.dir;
    if (site.candidates.size() == 1) b.answerObject = site.candidates[0];
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Binding> sitesExistRel(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  for (const auto& site : relationSites(cx)) {
    if (site.dir != "subject") continue;  // "is there X <rel> the anchor"
    const std::string& anchorName = cx.g.object(site.anchorId).name;
    std::vector<std::string> trueNames;
    for (const auto& cid : site.candidates) trueNames.push_back(cx.g.object(cid).name);
    std::string truth = rng.pick(trueNames);
    auto push = [&](const std::string& cat) {
      // A "no" answer must be provable, not an annotation gap.
      if (std::find(trueNames.begin(), trueNames.end(), cat) == trueNames.end() &&
          cx.unannotated.count(cat))
        return;
      Binding b;
      addRefHoles(b, "a", "anchor", pickRef(cx.refs.at(site.anchorId), rng), cx.g, cx.ont);
      b.holes["rel"] = site.rel;
      b.holes["relTxt"] = site.rel;
      b.holes["cat"] = cat;
      b.holes["n"] = cat;
      b.holes["nIndef"] = indefinitePhrase(cx.ont, cat);
      b.probed = {cat};
      out.push_back(std::move(b));
    };
    push(truth);
    try {
      push(selectDecoy(cx.g, cx.ont, cx.table, anchorName, truth, trueNames, rng));
    } catch (const NoDecoyAvailable&) {
    }
  }
  return out;
}

std::vector<Binding> sitesVerifyRel(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  std::map<std::string, std::vector<std::string>> bySubjectRel;
  for (const auto& r : cx.g.relations)
    bySubjectRel[r.subject + "\x1f" + r.predicate].push_back(cx.g.object(r.object).name);
  for (const auto& [key, targets] : bySubjectRel) {
    auto parts = split(key, '\x1f');
    const std::string& oid = parts[0];
    const std::string& rel = parts[1];
    if (!cx.refs.count(oid)) continue;
    const SGObject& o = cx.g.object(oid);
    auto push = [&](const std::string& target) {
      if (countMatching(cx.g, cx.ont, target) != 1) return;  // "the <t>" must be unique
      Binding b;
      addRefHoles(b, "s", "s", pickRef(cx.refs.at(oid), rng), cx.g, cx.ont);
      b.holes["rel"] = rel;
      b.holes["relTxt"] = rel;
      b.holes["t"] = target;
      b.holes["tDef"] = "the " + target;
      for (const auto& [tid, to] : cx.g.objects)
        if (to.name == target) b.holeObjects["tDef"] = tid;
      b.probed = {target};
      out.push_back(std::move(b));
    };
    std::string truth = rng.pick(targets);
    push(truth);
    try {
      push(selectDecoy(cx.g, cx.ont, cx.table, o.name, truth, targets, rng));
    } catch (const NoDecoyAvailable&) {
    }
  }
  return out;
}

std::vector<Binding> sitesChooseRel(const SiteContext& cx, Rng& rng) {
  static const std::map<std::string, std::string> inverse = {
      {"to the left of", "to the right of"},
      {"to the right of", "to the left of"},
      {"above", "below"},
      {"below", "above"}};
  std::vector<Binding> out;
  for (const auto& r : cx.g.relations) {
    auto inv = inverse.find(r.predicate);
    if (inv == inverse.end()) continue;
    if (!cx.refs.count(r.subject)) continue;
    const std::string& target = cx.g.object(r.object).name;
    if (countMatching(cx.g, cx.ont, target) != 1) continue;
    // The opposite relation must genuinely not hold for the pair.
    if (cx.g.hasEdge(r.subject, inv->second, r.object)) continue;
    Binding b;
    addRefHoles(b, "s", "s", pickRef(cx.refs.at(r.subject), rng), cx.g, cx.ont);
    std::string r1 = std::min(r.predicate, inv->second);
    std::string r2 = std::max(r.predicate, inv->second);
    b.holes["r1"] = r1;
    b.holes["r2"] = r2;
    b.holes["t"] = target;
    b.holes["tDef"] = "the " + target;
    b.holeObjects["tDef"] = r.object;
    std::string x = r.predicate, y = inv->second;
    if (rng.chance(0.5)) std::swap(x, y);
    bool horizontal = startsWith(r.predicate, "to the");
    if (horizontal) {
      b.holes["xShort"] = spatialShortForm(x);
      b.holes["yShort"] = spatialShortForm(y);
    } else {
      b.holes["xRel"] = x;
      b.holes["yRel"] = y;
    }
    b.tags["axis"] = horizontal ? "lr" : "ud";
    b.probed = {spatialShortForm(r1), spatialShortForm(r2)};
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Binding> sitesChooseObjRel(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  for (const auto& site : relationSites(cx)) {
    if (site.dir != "subject" || site.candidates.size() != 1) continue;
    const std::string& anchorName = cx.g.object(site.anchorId).name;
    const std::string& truth = cx.g.object(site.candidates[0]).name;
    std::string decoy;
    try {
      decoy = selectDecoy(cx.g, cx.ont, cx.table, anchorName, truth, {truth}, rng);
    } catch (const NoDecoyAvailable&) {
      continue;
    }
    Binding b;
    addRefHoles(b, "a", "anchor", pickRef(cx.refs.at(site.anchorId), rng), cx.g, cx.ont);
    b.holes["rel"] = site.rel;
    b.holes["relTxt"] = site.rel;
    b.holes["cA"] = std::min(truth, decoy);
    b.holes["cB"] = std::max(truth, decoy);
    std::string x = truth, y = decoy;
    if (rng.chance(0.5)) std::swap(x, y);
    b.holes["x"] = x;
    b.holes["y"] = y;
    b.holes["xIndef"] = indefinitePhrase(cx.ont, x);
    b.holes["yIndef"] = indefinitePhrase(cx.ont, y);
    b.probed = {b.holes["cA"], b.holes["cB"]};
    b.answerObject = site.candidates[0];
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Binding> sitesCompare(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  std::vector<std::string> oids;
  for (const auto& [oid, refs] : cx.refs) {
    (void)refs;
    oids.push_back(oid);
  }
  for (const auto& typeName : cx.ont.attributeTypeNames()) {
    const AttributeType* t = cx.ont.attributeType(typeName);
    if (t->ordering.empty()) continue;
    auto rank = [&](const std::string& oid) -> int {
      auto vals = typedValues(cx.g.object(oid), cx.ont);
      auto it = vals.find(typeName);
      if (it == vals.end() || it->second.size() != 1) return -1;
      auto pos = std::find(t->ordering.begin(), t->ordering.end(), it->second[0]);
      return pos == t->ordering.end() ? -1 : static_cast<int>(pos - t->ordering.begin());
    };
    for (size_t i = 0; i < oids.size(); ++i)
      for (size_t j = i + 1; j < oids.size(); ++j) {
        int r1 = rank(oids[i]), r2 = rank(oids[j]);
        if (r1 < 0 || r2 < 0 || r1 == r2) continue;
        if (cx.g.object(oids[i]).name == cx.g.object(oids[j]).name) continue;
        Binding b;
        addRefHoles(b, "s", "s", pickRef(cx.refs.at(oids[i]), rng), cx.g, cx.ont);
        addRefHoles(b, "b", "t", pickRef(cx.refs.at(oids[j]), rng), cx.g, cx.ont);
        b.holes["type"] = typeName;
        bool more = rng.chance(0.5);
        b.holes["pol"] = more ? "more" : "less";
        b.holes["more"] = more ? t->moreWord : t->lessWord;
        bool firstWins = more ? r1 > r2 : r1 < r2;
        b.answerObject = firstWins ? oids[i] : oids[j];
        out.push_back(std::move(b));
      }
  }
  return out;
}

std::vector<Binding> sitesCommon(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  std::vector<std::string> oids;
  for (const auto& [oid, refs] : cx.refs) {
    (void)refs;
    oids.push_back(oid);
  }
  for (size_t i = 0; i < oids.size(); ++i)
    for (size_t j = i + 1; j < oids.size(); ++j) {
      auto v1 = typedValues(cx.g.object(oids[i]), cx.ont);
      auto v2 = typedValues(cx.g.object(oids[j]), cx.ont);
      std::string sharedValue;
      for (const auto& [type, vals] : v1) {
        if (type == "position") continue;
        auto it = v2.find(type);
        if (it == v2.end() || vals.size() != 1 || it->second.size() != 1) continue;
        if (vals[0] == it->second[0]) {
          sharedValue = vals[0];  // smallest type wins: map iterates sorted
          break;
        }
      }
      if (sharedValue.empty()) continue;
      if (cx.g.object(oids[i]).name == cx.g.object(oids[j]).name) continue;
      Binding b;
      addRefHoles(b, "s", "s", pickRef(cx.refs.at(oids[i]), rng), cx.g, cx.ont);
      addRefHoles(b, "b", "t", pickRef(cx.refs.at(oids[j]), rng), cx.g, cx.ont);
      b.probed = {sharedValue};
      out.push_back(std::move(b));
    }
  return out;
}

std::vector<Binding> sitesTwoSameDiff(const SiteContext& cx, Rng& rng) {
  std::vector<Binding> out;
  std::vector<std::string> oids;
  for (const auto& [oid, refs] : cx.refs) {
    (void)refs;
    oids.push_back(oid);
  }
  for (size_t i = 0; i < oids.size(); ++i)
    for (size_t j = i + 1; j < oids.size(); ++j) {
      const SGObject& o1 = cx.g.object(oids[i]);
      const SGObject& o2 = cx.g.object(oids[j]);
      auto v1 = typedValues(o1, cx.ont);
      auto v2 = typedValues(o2, cx.ont);
      bool anyShared = false;
      for (const auto& [type, vals] : v1) {
        if (type == "position") continue;
        auto it = v2.find(type);
        if (it == v2.end() || vals.size() != 1 || it->second.size() != 1) continue;
        anyShared = true;
        Binding b;
        addRefHoles(b, "s", "s", pickRef(cx.refs.at(oids[i]), rng), cx.g, cx.ont);
        addRefHoles(b, "b", "t", pickRef(cx.refs.at(oids[j]), rng), cx.g, cx.ont);
        b.holes["type"] = type;
        b.holes["typePl"] = type + "s";
        b.tags["typed"] = "yes";
        b.probed = {vals[0], it->second[0]};
        out.push_back(std::move(b));
      }
      if (anyShared) {
        Binding b;
        addRefHoles(b, "s", "s", pickRef(cx.refs.at(oids[i]), rng), cx.g, cx.ont);
        addRefHoles(b, "b", "t", pickRef(cx.refs.at(oids[j]), rng), cx.g, cx.ont);
        b.tags["typed"] = "no";
        for (const auto& [type, vals] : v1) {
          (void)type;
          for (const auto& v : vals) b.probed.insert(v);
        }
        for (const auto& [type, vals] : v2) {
          (void)type;
          for (const auto& v : vals) b.probed.insert(v);
        }
        out.push_back(std::move(b));
      }
    }
  return out;
}

std::vector<Binding> sitesAllSameDiff(const SiteContext& cx, Rng&) {
  std::vector<Binding> out;
  auto scopes = questionCategories(cx.ont);
  scopes.push_back("allObjs");
  for (const auto& cat : scopes) {
    std::vector<const SGObject*> members;
    for (const auto& [oid, o] : cx.g.objects)
      if (cat == "allObjs" || cx.ont.conceptMatches(o.name, cat)) members.push_back(&o);
    if (members.size() < 2) continue;
    for (const auto& type : cx.ont.attributeTypeNames()) {
      if (type == "position") continue;
      bool allHave = true;
      std::set<std::string> probed;
      for (const auto* o : members) {
        auto vals = typedValues(*o, cx.ont);
        auto it = vals.find(type);
        if (it == vals.end() || it->second.size() != 1) {
          allHave = false;
          break;
        }
        probed.insert(it->second[0]);
      }
      if (!allHave) continue;
      Binding b;
      b.holes["cat"] = cat;
      if (cat != "allObjs") b.holes["catPl"] = cx.ont.pluralOf(cat);
      b.holes["type"] = type;
      b.holes["typePl"] = type + "s";
      b.tags["scope"] = cat == "allObjs" ? "all" : "cat";
      b.probed = probed;
      out.push_back(std::move(b));
    }
  }
  return out;
}

std::vector<Binding> enumerateSites(const std::string& group, const SiteContext& cx, Rng& rng) {
  if (group == "queryGlobal") return sitesQueryGlobal(cx, rng);
  if (group == "verifyGlobal") return sitesVerifyGlobal(cx, rng);
  if (group == "chooseGlobal") return sitesChooseGlobal(cx, rng);
  if (group == "queryAttr") return sitesQueryAttr(cx, rng);
  if (group == "verifyAttr") return sitesVerifyAttr(cx, rng);
  if (group == "verifyAttrs") return sitesVerifyAttrs(cx, rng);
  if (group == "chooseAttr") return sitesChooseAttr(cx, rng);
  if (group == "exist") return sitesExist(cx, rng);
  if (group == "existRel") return sitesExistRel(cx, rng);
  if (group == "logicOr") return sitesLogic(cx, rng, false);
  if (group == "logicAnd") return sitesLogic(cx, rng, true);
  if (group == "queryObject") return sitesQueryObject(cx, rng);
  if (group == "chooseObject") return sitesChooseObject(cx, rng);
  if (group == "queryRel") return sitesQueryRel(cx, rng);
  if (group == "verifyRel") return sitesVerifyRel(cx, rng);
  if (group == "chooseRel") return sitesChooseRel(cx, rng);
  if (group == "chooseObjRel") return sitesChooseObjRel(cx, rng);
  if (group == "compare") return sitesCompare(cx, rng);
  if (group == "common") return sitesCommon(cx, rng);
  if (group == "twoSame" || group == "twoDiff") return sitesTwoSameDiff(cx, rng);
  if (group == "allSame" || group == "allDiff") return sitesAllSameDiff(cx, rng);
  throw SceneqError("no site builder for group '" + group + "'");
}

bool constraintsSatisfied(const Pattern& p, const std::map<std::string, std::string>& tags) {
  for (const auto& c : p.constraints) {
    size_t neq = c.find("!=");
    size_t eq = c.find('=');
    if (neq != std::string::npos) {
      auto it = tags.find(c.substr(0, neq));
      if (it != tags.end() && it->second == c.substr(neq + 2)) return false;
    } else if (eq != std::string::npos) {
      auto it = tags.find(c.substr(0, eq));
      if (it == tags.end() || it->second != c.substr(eq + 1)) return false;
    } else {
      throw SceneqError("bad constraint '" + c + "'");
    }
  }
  return true;
}

}  // namespace

GeneratedCorpus generateForGraph(const SceneGraph& g, const Ontology& ont,
                                 const PlausibilityTable& table,
                                 const std::vector<Pattern>& patterns,
                                 const GeneratorConfig& cfg) {
  GeneratedCorpus out;
  Rng imgRng = Rng(cfg.seed).stream(g.imageId);

  RefMap refs;
  for (const auto& [oid, o] : g.objects) {
    (void)o;
    auto r = buildReferences(g, ont, oid, cfg.maxDepth);
    if (!r.empty()) refs[oid] = std::move(r);
  }
  SiteContext cx{g, ont, table, refs, cfg.commonlyUnannotated};

  std::map<std::string, std::vector<const Pattern*>> byGroup;
  for (const auto& p : patterns) byGroup[p.group].push_back(&p);

  long counter = 0;
  for (const auto& group : catalogRows()) {
    auto pats = byGroup.find(group);
    if (pats == byGroup.end()) continue;
    Rng rng = imgRng.stream(group);
    std::vector<Binding> sites = enumerateSites(group, cx, rng);
    rng.shuffle(sites);
    if (sites.size() > static_cast<size_t>(cfg.sitesPerGroup))
      sites.resize(static_cast<size_t>(cfg.sitesPerGroup));
    for (const auto& binding : sites) {
      std::vector<const Pattern*> apps;
      for (const Pattern* p : pats->second)
        if (constraintsSatisfied(*p, binding.tags)) apps.push_back(p);
      if (apps.empty()) continue;
      const Pattern* p = rng.pick(apps);
      auto r = instantiate(g, ont, *p, binding, rng);
      if (r.instance) {
        r.instance->questionId = g.imageId + "-q" + std::to_string(++counter);
        out.questions.push_back(std::move(*r.instance));
      } else {
        out.rejections.push_back({g.imageId, group, r.rejectReason});
      }
    }
  }
  return out;
}

GeneratedCorpus generateCorpus(const std::vector<SceneGraph>& graphs, const Ontology& ont,
                               const std::vector<Pattern>& patterns, const GeneratorConfig& cfg) {
  PlausibilityTable table = buildPlausibility(graphs, ont);
  GeneratedCorpus out;
  for (const auto& g : graphs) {
    GeneratedCorpus one = generateForGraph(g, ont, table, patterns, cfg);
    out.questions.insert(out.questions.end(), std::make_move_iterator(one.questions.begin()),
                         std::make_move_iterator(one.questions.end()));
    out.rejections.insert(out.rejections.end(), one.rejections.begin(), one.rejections.end());
  }
  return out;
}

}  // namespace sceneq
