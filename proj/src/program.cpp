#include "sceneq/program.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace sceneq {

namespace {

struct OpInfo {
  Op op;
  const char* name;
};

const OpInfo kOps[] = {
    {Op::Select, "select"},   {Op::Filter, "filter"},       {Op::Relate, "relate"},
    {Op::VerifyAttr, "verify"}, {Op::VerifyRel, "verifyRel"}, {Op::Query, "query"},
    {Op::Choose, "choose"},   {Op::ChooseRel, "chooseRel"}, {Op::Exist, "exist"},
    {Op::And, "and"},         {Op::Or, "or"},               {Op::Not, "not"},
    {Op::Compare, "compare"}, {Op::Common, "common"},       {Op::Same, "same"},
    {Op::Different, "different"},
};

const char* opName(Op op) {
  for (const auto& o : kOps)
    if (o.op == op) return o.name;
  return "?";
}

std::optional<Op> opFromName(const std::string& name) {
  for (const auto& o : kOps)
    if (name == o.name) return o.op;
  return std::nullopt;
}

[[noreturn]] void parseFail(const std::string& msg, size_t step) {
  throw SceneqError(msg + " (step " + std::to_string(step) + ")");
}

// Simulated stack entry kinds for parse-time checking.  The discipline is
// shared with the executor: value-producing ops read the topmost selection
// without consuming it, so one selection can support several verifications
// combined by and/or.
enum class TKind { Set, Scene, Value };

void typeCheck(const std::vector<Step>& steps) {
  std::vector<TKind> stack;
  auto topSet = [&](bool allowScene) -> int {
    for (int i = static_cast<int>(stack.size()) - 1; i >= 0; --i) {
      if (stack[static_cast<size_t>(i)] == TKind::Set) return i;
      if (allowScene && stack[static_cast<size_t>(i)] == TKind::Scene) return i;
    }
    return -1;
  };
  auto countKind = [&](TKind k) {
    return std::count(stack.begin(), stack.end(), k);
  };
  auto popTwoSets = [&](const char* what, size_t idx) {
    int n = 0;
    for (int i = static_cast<int>(stack.size()) - 1; i >= 0 && n < 2; --i) {
      if (stack[static_cast<size_t>(i)] == TKind::Set) {
        stack.erase(stack.begin() + i);
        ++n;
      }
    }
    if (n < 2) parseFail(std::string(what) + " requires two selections", idx);
  };

  for (size_t i = 0; i < steps.size(); ++i) {
    const Step& s = steps[i];
    size_t idx = i + 1;
    switch (s.op) {
      case Op::Select:
        stack.push_back(s.operands[0] == "scene" ? TKind::Scene : TKind::Set);
        break;
      case Op::Filter:
      case Op::Relate: {
        int t = topSet(false);
        if (t < 0) parseFail(std::string(opName(s.op)) + " requires a selection", idx);
        break;  // replaces in place
      }
      case Op::VerifyAttr:
      case Op::Query:
      case Op::Choose: {
        int t = topSet(true);
        if (t < 0) parseFail(std::string(opName(s.op)) + " requires a selection", idx);
        stack.push_back(TKind::Value);
        break;
      }
      case Op::VerifyRel:
      case Op::ChooseRel:
      case Op::Exist: {
        int t = topSet(false);
        if (t < 0) parseFail(std::string(opName(s.op)) + " requires a selection", idx);
        stack.push_back(TKind::Value);
        break;
      }
      case Op::And:
      case Op::Or: {
        if (countKind(TKind::Value) < 2)
          parseFail(std::string(opName(s.op)) + " requires two boolean operands", idx);
        int n = 0;
        for (int j = static_cast<int>(stack.size()) - 1; j >= 0 && n < 2; --j) {
          if (stack[static_cast<size_t>(j)] == TKind::Value) {
            stack.erase(stack.begin() + j);
            ++n;
          }
        }
        stack.push_back(TKind::Value);
        break;
      }
      case Op::Not:
        if (countKind(TKind::Value) < 1) parseFail("not requires a boolean operand", idx);
        break;  // replaces in place
      case Op::Compare:
        popTwoSets("compare", idx);
        stack.push_back(TKind::Value);
        break;
      case Op::Common:
        popTwoSets("common", idx);
        stack.push_back(TKind::Value);
        break;
      case Op::Same:
      case Op::Different: {
        long sets = countKind(TKind::Set);
        if (sets >= 2) {
          popTwoSets(opName(s.op), idx);
        } else if (sets == 1) {
          stack.erase(stack.begin() + topSet(false));
        } else {
          parseFail(std::string(opName(s.op)) + " requires a selection", idx);
        }
        stack.push_back(TKind::Value);
        break;
      }
    }
  }
  long values = std::count(stack.begin(), stack.end(), TKind::Value);
  if (values == 0) parseFail("program yields no result", steps.size());
  if (values > 1) parseFail("program leaves unused results", steps.size());
  Op lastOp = steps.back().op;
  if (lastOp == Op::Select || lastOp == Op::Filter || lastOp == Op::Relate)
    parseFail("final step must produce an answer", steps.size());
}

}  // namespace

Program parseProgram(const std::string& text) {
  Program p;
  auto segments = split(text, '/');
  if (trim(text).empty()) throw SceneqError("empty program");
  for (size_t i = 0; i < segments.size(); ++i) {
    size_t idx = i + 1;
    std::string seg = trim(segments[i]);
    if (seg.empty()) parseFail("empty step", idx);

    Step step;
    std::string head = seg;  // part before ':'
    std::string operandPart;
    // The first ':' outside parentheses separates operands.
    int depth = 0;
    size_t colon = std::string::npos;
    for (size_t c = 0; c < seg.size(); ++c) {
      if (seg[c] == '(') ++depth;
      else if (seg[c] == ')') --depth;
      else if (seg[c] == ':' && depth == 0) {
        colon = c;
        break;
      }
    }
    if (colon != std::string::npos) {
      head = trim(seg.substr(0, colon));
      operandPart = trim(seg.substr(colon + 1));
      if (operandPart.empty()) parseFail("missing operand after ':'", idx);
    }

    std::string argPart;
    size_t open = head.find('(');
    if (open != std::string::npos) {
      size_t close = head.rfind(')');
      if (close == std::string::npos || close < open) parseFail("unbalanced parentheses", idx);
      argPart = trim(head.substr(open + 1, close - open - 1));
      head = trim(head.substr(0, open) + head.substr(close + 1));
    }

    auto headWords = splitTrimmed(head, ' ');
    std::string opWord = headWords.empty() ? "" : headWords[0];
    auto op = opFromName(opWord);
    if (!op) parseFail("unknown operation '" + opWord + "'", idx);
    step.op = *op;
    if (headWords.size() > 1) {
      std::vector<std::string> rest(headWords.begin() + 1, headWords.end());
      step.typeArg = join(rest, " ");
    }
    if (!operandPart.empty()) {
      step.operands = splitTrimmed(operandPart, '|');
      for (const auto& o : step.operands)
        if (o.empty()) parseFail("empty operand", idx);
    }

    auto needArgs = [&](size_t n, const char* what) {
      auto args = splitTrimmed(argPart, ',');
      if (argPart.empty() || args.size() != n) parseFail(std::string("expected ") + what, idx);
      return args;
    };
    auto noArgs = [&]() {
      if (!argPart.empty()) parseFail("unexpected parenthesized arguments", idx);
    };
    auto noType = [&]() {
      if (!step.typeArg.empty()) parseFail("unexpected type argument", idx);
    };
    auto operandCount = [&](size_t n) {
      if (step.operands.size() != n)
        parseFail(std::string(opName(step.op)) + " expects " + std::to_string(n) +
                      " operand(s), got " + std::to_string(step.operands.size()),
                  idx);
    };

    switch (step.op) {
      case Op::Select:
      case Op::Filter:
        noArgs();
        noType();
        operandCount(1);
        break;
      case Op::Relate:
      case Op::VerifyRel: {
        auto args = needArgs(2, "(direction,relation)");
        step.direction = args[0];
        step.typeArg = args[1];
        if (step.direction != "subject" && step.direction != "object")
          parseFail("direction must be subject|object", idx);
        operandCount(1);
        break;
      }
      case Op::VerifyAttr:
        noArgs();
        if (step.typeArg.empty()) parseFail("verify requires a type argument", idx);
        operandCount(1);
        break;
      case Op::Query:
        noArgs();
        if (step.typeArg.empty()) {
          operandCount(1);
          step.typeArg = step.operands[0];
          step.operands.clear();
        } else if (!step.operands.empty()) {
          parseFail("query takes a single type", idx);
        }
        break;
      case Op::Choose:
        noArgs();
        operandCount(2);
        break;
      case Op::ChooseRel: {
        auto args = needArgs(2, "(direction,rel1|rel2)");
        step.direction = args[0];
        if (step.direction != "subject" && step.direction != "object")
          parseFail("direction must be subject|object", idx);
        auto rels = splitTrimmed(args[1], '|');
        if (rels.size() != 2) parseFail("chooseRel requires two relations", idx);
        operandCount(1);
        step.operands = {rels[0], rels[1], step.operands[0]};
        break;
      }
      case Op::Exist:
      case Op::And:
      case Op::Or:
      case Op::Not:
      case Op::Common:
        noArgs();
        noType();
        operandCount(0);
        break;
      case Op::Compare:
        noArgs();
        if (step.typeArg.empty()) parseFail("compare requires a type argument", idx);
        if (step.operands.empty()) step.operands = {"more"};
        operandCount(1);
        if (step.operands[0] != "more" && step.operands[0] != "less")
          parseFail("compare polarity must be more|less", idx);
        break;
      case Op::Same:
      case Op::Different:
        noArgs();
        operandCount(0);
        break;
    }
    p.steps.push_back(step);
  }

  typeCheck(p.steps);
  return p;
}

std::string serializeProgram(const Program& p) {
  std::vector<std::string> parts;
  for (const auto& s : p.steps) {
    std::string out = opName(s.op);
    switch (s.op) {
      case Op::Select:
      case Op::Filter:
        out += ": " + s.operands[0];
        break;
      case Op::Relate:
      case Op::VerifyRel:
        out += "(" + s.direction + "," + s.typeArg + "): " + s.operands[0];
        break;
      case Op::VerifyAttr:
        out += " " + s.typeArg + ": " + s.operands[0];
        break;
      case Op::Query:
        out += ": " + s.typeArg;
        break;
      case Op::Choose:
        if (!s.typeArg.empty()) out += " " + s.typeArg;
        out += ": " + s.operands[0] + "|" + s.operands[1];
        break;
      case Op::ChooseRel:
        out += "(" + s.direction + "," + s.operands[0] + "|" + s.operands[1] +
               "): " + s.operands[2];
        break;
      case Op::Compare:
        out += " " + s.typeArg + ": " + s.operands[0];
        break;
      case Op::Same:
      case Op::Different:
        if (!s.typeArg.empty()) out += " " + s.typeArg;
        break;
      case Op::Exist:
      case Op::And:
      case Op::Or:
      case Op::Not:
      case Op::Common:
        break;
    }
    parts.push_back(out);
  }
  return join(parts, "/");
}

std::string ExecError::describe() const {
  const char* k = kind == ExecErrorKind::AmbiguousReference ? "AmbiguousReference"
                  : kind == ExecErrorKind::EmptySelection   ? "EmptySelection"
                                                            : "MissingAttribute";
  return std::string(k) + " at step " + std::to_string(stepIndex) +
         (detail.empty() ? "" : ": " + detail);
}

std::string spatialShortForm(const std::string& relationId) {
  static const std::map<std::string, std::string> kShort = {
      {"to the left of", "left"},
      {"to the right of", "right"},
      {"in front of", "front"},
      {"on top of", "top"},
  };
  auto it = kShort.find(relationId);
  return it == kShort.end() ? relationId : it->second;
}

namespace {

void requireKnownName(const Ontology& ont, const std::string& name, const char* what) {
  if (!ont.isKnownName(name)) throw SceneqError(std::string(what) + " '" + name + "' unknown");
}

std::vector<std::string> selectIds(const SceneGraph& g, const Ontology& ont,
                                   const std::string& what) {
  if (what != "allObjs") requireKnownName(ont, what, "select target");
  std::vector<std::string> ids;
  for (const auto& [id, o] : g.objects)
    if (what == "allObjs" || ont.conceptMatches(o.name, what)) ids.push_back(id);
  return ids;
}

bool attributeHolds(const SGObject& o, const Concept& c) {
  if (c.category == "position") return o.positions.count(c.id) > 0;
  return std::find(o.attributes.begin(), o.attributes.end(), c.id) != o.attributes.end();
}

std::vector<std::string> filterIds(const SceneGraph& g, const Ontology& ont,
                                   const std::vector<std::string>& from, const std::string& a) {
  const Concept* c = ont.find(a);
  if (!c || c->kind != ConceptKind::Attribute)
    throw SceneqError("filter value '" + a + "' is not an attribute");
  std::vector<std::string> kept;
  for (const auto& id : from)
    if (attributeHolds(g.object(id), *c)) kept.push_back(id);
  return kept;
}

std::vector<std::string> relateIds(const SceneGraph& g, const Ontology& ont,
                                   const std::vector<std::string>& from,
                                   const std::string& direction, const std::string& rel,
                                   const std::string& target) {
  requireKnownName(ont, rel, "relation");
  if (target != "_") requireKnownName(ont, target, "relate target");
  std::vector<std::string> out;
  for (const auto& r : g.relations) {
    if (r.predicate != rel) continue;
    const std::string& anchor = direction == "subject" ? r.object : r.subject;
    const std::string& candidate = direction == "subject" ? r.subject : r.object;
    if (std::find(from.begin(), from.end(), anchor) == from.end()) continue;
    if (target != "_" && !ont.conceptMatches(g.object(candidate).name, target)) continue;
    out.push_back(candidate);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct Val {
  enum Kind { Set, Scene, Bool, Str } kind;
  std::vector<std::string> ids;  // sorted object ids
  bool b = false;
  std::string s;
};

struct ExecFail {
  ExecError err;
};

[[noreturn]] void fail(ExecErrorKind kind, size_t step, const std::string& detail) {
  throw ExecFail{ExecError{kind, static_cast<int>(step), detail}};
}

class Executor {
 public:
  Executor(const SceneGraph& g, const Ontology& ont) : g_(g), ont_(ont) {}

  std::string run(const Program& p) {
    for (size_t i = 0; i < p.steps.size(); ++i) step(p.steps[i], i + 1);
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
      if (it->kind == Val::Bool) return it->b ? "yes" : "no";
      if (it->kind == Val::Str) return it->s;
    }
    throw SceneqError("program yielded no result");  // unreachable after typeCheck
  }

 private:
  const SceneGraph& g_;
  const Ontology& ont_;
  std::vector<Val> stack_;

  int topSelection(bool allowScene) {
    for (int i = static_cast<int>(stack_.size()) - 1; i >= 0; --i) {
      Val::Kind k = stack_[static_cast<size_t>(i)].kind;
      if (k == Val::Set || (allowScene && k == Val::Scene)) return i;
    }
    throw SceneqError("no selection on stack");  // unreachable after typeCheck
  }

  const SGObject& single(const Val& v, size_t idx, const std::string& what) {
    if (v.ids.empty()) fail(ExecErrorKind::EmptySelection, idx, what + " matches nothing");
    if (v.ids.size() > 1)
      fail(ExecErrorKind::AmbiguousReference, idx,
           what + " matches " + std::to_string(v.ids.size()) + " objects");
    return g_.object(v.ids[0]);
  }

  void requireKnown(const std::string& name, const char* what) {
    requireKnownName(ont_, name, what);
  }

  bool holdsValue(const SGObject& o, const std::string& type, const std::string& value,
                  size_t idx) {
    if (type == "position") return o.positions.count(value) > 0;
    const Concept* c = ont_.find(value);
    if (!c || c->kind != ConceptKind::Attribute)
      throw SceneqError("'" + value + "' is not an attribute");
    if (type != ont_.attributeTypeOf(value))
      throw SceneqError("attribute '" + value + "' is not of type '" + type + "'");
    (void)idx;
    return std::find(o.attributes.begin(), o.attributes.end(), value) != o.attributes.end();
  }

  // Unique value of an attribute type on an object; position tags included.
  std::optional<std::string> uniqueValueOf(const SGObject& o, const std::string& type, size_t idx,
                                           bool failOnMulti) {
    std::vector<std::string> found;
    if (type == "position") {
      found.assign(o.positions.begin(), o.positions.end());
    } else {
      if (!ont_.attributeType(type)) throw SceneqError("unknown attribute type '" + type + "'");
      for (const auto& a : o.attributes)
        if (ont_.attributeTypeOf(a) == type) found.push_back(a);
    }
    if (found.empty()) return std::nullopt;
    if (found.size() > 1) {
      if (failOnMulti)
        fail(ExecErrorKind::AmbiguousReference, idx,
             "object '" + o.id + "' has several " + type + " values");
      return std::nullopt;
    }
    return found[0];
  }

  std::vector<std::string> relatedIds(const std::vector<std::string>& from,
                                      const std::string& direction, const std::string& rel,
                                      const std::string& target) {
    return relateIds(g_, ont_, from, direction, rel, target);
  }

  std::string globalValue(const std::string& field, size_t idx) {
    if (field != "weather" && field != "location")
      throw SceneqError("scene selection supports weather|location, not '" + field + "'");
    auto it = g_.globals.find(field);
    if (it == g_.globals.end())
      fail(ExecErrorKind::MissingAttribute, idx, "scene has no " + field);
    return it->second;
  }

  void popTwoBools(bool& lower, bool& upper) {
    int found = 0;
    for (int i = static_cast<int>(stack_.size()) - 1; i >= 0 && found < 2; --i) {
      if (stack_[static_cast<size_t>(i)].kind == Val::Bool) {
        (found == 0 ? upper : lower) = stack_[static_cast<size_t>(i)].b;
        stack_.erase(stack_.begin() + i);
        ++found;
      }
    }
    if (found < 2) throw SceneqError("missing boolean operands");  // unreachable
  }

  void popTwoSets(Val& first, Val& second) {
    std::vector<Val> got;
    for (int i = static_cast<int>(stack_.size()) - 1; i >= 0 && got.size() < 2; --i) {
      if (stack_[static_cast<size_t>(i)].kind == Val::Set) {
        got.push_back(stack_[static_cast<size_t>(i)]);
        stack_.erase(stack_.begin() + i);
      }
    }
    if (got.size() < 2) throw SceneqError("missing selections");  // unreachable
    second = got[0];                                              // upper = later branch
    first = got[1];
  }

  void step(const Step& s, size_t idx) {
    switch (s.op) {
      case Op::Select: {
        const std::string& what = s.operands[0];
        if (what == "scene") {
          stack_.push_back({Val::Scene, {}, false, ""});
          return;
        }
        Val v{Val::Set, selectIds(g_, ont_, what), false, ""};
        stack_.push_back(v);
        return;
      }
      case Op::Filter: {
        Val& v = stack_[static_cast<size_t>(topSelection(false))];
        v.ids = filterIds(g_, ont_, v.ids, s.operands[0]);
        return;
      }
      case Op::Relate: {
        Val& v = stack_[static_cast<size_t>(topSelection(false))];
        v.ids = relatedIds(v.ids, s.direction, s.typeArg, s.operands[0]);
        return;
      }
      case Op::VerifyAttr: {
        Val& v = stack_[static_cast<size_t>(topSelection(true))];
        bool result;
        if (v.kind == Val::Scene) {
          result = globalValue(s.typeArg, idx) == s.operands[0];
        } else {
          const SGObject& o = single(v, idx, "selection");
          result = holdsValue(o, s.typeArg, s.operands[0], idx);
        }
        stack_.push_back({Val::Bool, {}, result, ""});
        return;
      }
      case Op::VerifyRel: {
        Val& v = stack_[static_cast<size_t>(topSelection(false))];
        const SGObject& o = single(v, idx, "selection");
        bool result = !relatedIds({o.id}, s.direction, s.typeArg, s.operands[0]).empty();
        stack_.push_back({Val::Bool, {}, result, ""});
        return;
      }
      case Op::Exist: {
        Val& v = stack_[static_cast<size_t>(topSelection(false))];
        stack_.push_back({Val::Bool, {}, !v.ids.empty(), ""});
        return;
      }
      case Op::Query: {
        Val& v = stack_[static_cast<size_t>(topSelection(true))];
        std::string result;
        if (v.kind == Val::Scene) {
          result = globalValue(s.typeArg, idx);
        } else {
          const SGObject& o = single(v, idx, "selection");
          if (s.typeArg == "name") {
            result = o.name;
          } else {
            auto val = uniqueValueOf(o, s.typeArg, idx, true);
            if (!val)
              fail(ExecErrorKind::MissingAttribute, idx,
                   "object '" + o.id + "' has no " + s.typeArg);
            result = *val;
          }
        }
        stack_.push_back({Val::Str, {}, false, result});
        return;
      }
      case Op::Choose: {
        Val& v = stack_[static_cast<size_t>(topSelection(true))];
        const std::string& a = s.operands[0];
        const std::string& b = s.operands[1];
        std::string result;
        if (v.kind == Val::Scene) {
          std::string val = globalValue(s.typeArg, idx);
          if (val == a) result = a;
          else if (val == b) result = b;
          else fail(ExecErrorKind::MissingAttribute, idx, "neither alternative holds");
        } else {
          const SGObject& o = single(v, idx, "selection");
          bool ha, hb;
          if (s.typeArg.empty()) {
            requireKnown(a, "choose alternative");
            requireKnown(b, "choose alternative");
            ha = ont_.conceptMatches(o.name, a);
            hb = ont_.conceptMatches(o.name, b);
          } else {
            ha = holdsValue(o, s.typeArg, a, idx);
            hb = holdsValue(o, s.typeArg, b, idx);
          }
          if (ha && hb) fail(ExecErrorKind::AmbiguousReference, idx, "both alternatives hold");
          if (!ha && !hb) fail(ExecErrorKind::MissingAttribute, idx, "neither alternative holds");
          result = ha ? a : b;
        }
        stack_.push_back({Val::Str, {}, false, result});
        return;
      }
      case Op::ChooseRel: {
        Val& v = stack_[static_cast<size_t>(topSelection(false))];
        const SGObject& o = single(v, idx, "selection");
        bool h1 = !relatedIds({o.id}, s.direction, s.operands[0], s.operands[2]).empty();
        bool h2 = !relatedIds({o.id}, s.direction, s.operands[1], s.operands[2]).empty();
        if (h1 && h2) fail(ExecErrorKind::AmbiguousReference, idx, "both relations hold");
        if (!h1 && !h2) fail(ExecErrorKind::MissingAttribute, idx, "neither relation holds");
        stack_.push_back({Val::Str, {}, false, spatialShortForm(h1 ? s.operands[0] : s.operands[1])});
        return;
      }
      case Op::And:
      case Op::Or: {
        bool lower = false, upper = false;
        popTwoBools(lower, upper);
        bool r = s.op == Op::And ? (lower && upper) : (lower || upper);
        stack_.push_back({Val::Bool, {}, r, ""});
        return;
      }
      case Op::Not: {
        for (int i = static_cast<int>(stack_.size()) - 1; i >= 0; --i) {
          if (stack_[static_cast<size_t>(i)].kind == Val::Bool) {
            stack_[static_cast<size_t>(i)].b = !stack_[static_cast<size_t>(i)].b;
            return;
          }
        }
        throw SceneqError("missing boolean operand");  // unreachable
      }
      case Op::Compare: {
        Val first, second;
        popTwoSets(first, second);
        const SGObject& o1 = single(first, idx, "first selection");
        const SGObject& o2 = single(second, idx, "second selection");
        const AttributeType* t = ont_.attributeType(s.typeArg);
        if (!t) throw SceneqError("unknown attribute type '" + s.typeArg + "'");
        if (t->ordering.empty())
          throw SceneqError("attribute type '" + s.typeArg + "' has no ordering");
        auto rank = [&](const SGObject& o) -> int {
          auto val = uniqueValueOf(o, s.typeArg, idx, true);
          if (!val)
            fail(ExecErrorKind::MissingAttribute, idx, "object '" + o.id + "' has no " + s.typeArg);
          auto it = std::find(t->ordering.begin(), t->ordering.end(), *val);
          if (it == t->ordering.end())
            fail(ExecErrorKind::MissingAttribute, idx, "value '" + *val + "' is not comparable");
          return static_cast<int>(it - t->ordering.begin());
        };
        int r1 = rank(o1), r2 = rank(o2);
        if (r1 == r2) fail(ExecErrorKind::AmbiguousReference, idx, "comparison is a tie");
        bool firstWins = s.operands[0] == "more" ? r1 > r2 : r1 < r2;
        stack_.push_back({Val::Str, {}, false, firstWins ? o1.name : o2.name});
        return;
      }
      case Op::Common: {
        Val first, second;
        popTwoSets(first, second);
        const SGObject& o1 = single(first, idx, "first selection");
        const SGObject& o2 = single(second, idx, "second selection");
        std::vector<std::string> shared;
        for (const auto& type : ont_.attributeTypeNames()) {
          if (type == "position") continue;
          auto v1 = uniqueValueOf(o1, type, idx, false);
          auto v2 = uniqueValueOf(o2, type, idx, false);
          if (v1 && v2 && *v1 == *v2) shared.push_back(type);
        }
        if (shared.empty())
          fail(ExecErrorKind::MissingAttribute, idx, "objects share no attribute");
        stack_.push_back({Val::Str, {}, false, *std::min_element(shared.begin(), shared.end())});
        return;
      }
      case Op::Same:
      case Op::Different: {
        long sets = std::count_if(stack_.begin(), stack_.end(),
                                  [](const Val& v) { return v.kind == Val::Set; });
        std::vector<const SGObject*> group;
        if (sets >= 2) {
          Val first, second;
          popTwoSets(first, second);
          group.push_back(&single(first, idx, "first selection"));
          group.push_back(&single(second, idx, "second selection"));
        } else {
          int t = topSelection(false);
          Val v = stack_[static_cast<size_t>(t)];
          stack_.erase(stack_.begin() + t);
          if (v.ids.size() < 2)
            fail(ExecErrorKind::EmptySelection, idx, "needs at least two objects");
          for (const auto& id : v.ids) group.push_back(&g_.object(id));
        }
        bool result;
        if (!s.typeArg.empty()) {
          std::vector<std::string> values;
          for (const auto* o : group) {
            auto val = uniqueValueOf(*o, s.typeArg, idx, true);
            if (!val)
              fail(ExecErrorKind::MissingAttribute, idx,
                   "object '" + o->id + "' has no " + s.typeArg);
            values.push_back(*val);
          }
          result = computeSameness(values, s.op == Op::Same);
        } else if (group.size() == 2 && sets >= 2) {
          // All attribute types comparable on both objects.
          std::vector<std::string> types;
          for (const auto& type : ont_.attributeTypeNames()) {
            if (type == "position") continue;
            if (uniqueValueOf(*group[0], type, idx, false) &&
                uniqueValueOf(*group[1], type, idx, false))
              types.push_back(type);
          }
          if (types.empty())
            fail(ExecErrorKind::MissingAttribute, idx, "objects share no comparable attribute");
          result = true;
          for (const auto& type : types) {
            bool eq = *uniqueValueOf(*group[0], type, idx, false) ==
                      *uniqueValueOf(*group[1], type, idx, false);
            if (s.op == Op::Same ? !eq : eq) {
              result = false;
              break;
            }
          }
        } else {
          // Single selection, no type: compare concept names.
          std::vector<std::string> names;
          for (const auto* o : group) names.push_back(o->name);
          result = computeSameness(names, s.op == Op::Same);
        }
        stack_.push_back({Val::Bool, {}, result, ""});
        return;
      }
    }
  }

  static bool computeSameness(const std::vector<std::string>& values, bool wantSame) {
    if (wantSame) {
      for (const auto& v : values)
        if (v != values[0]) return false;
      return true;
    }
    std::set<std::string> uniq(values.begin(), values.end());
    return uniq.size() == values.size();
  }
};

}  // namespace

ExecResult execute(const Program& p, const SceneGraph& g, const Ontology& ont) {
  try {
    Executor ex(g, ont);
    return ExecResult{ex.run(p), std::nullopt};
  } catch (const ExecFail& f) {
    return ExecResult{std::nullopt, f.err};
  }
}

std::vector<std::string> resolveSelection(const std::vector<Step>& steps, const SceneGraph& g,
                                          const Ontology& ont) {
  std::vector<std::string> ids;
  for (size_t i = 0; i < steps.size(); ++i) {
    const Step& s = steps[i];
    switch (s.op) {
      case Op::Select:
        if (i != 0) throw SceneqError("selection chain may only start with select");
        if (s.operands[0] == "scene") throw SceneqError("selection chain cannot target the scene");
        ids = selectIds(g, ont, s.operands[0]);
        break;
      case Op::Filter:
        ids = filterIds(g, ont, ids, s.operands[0]);
        break;
      case Op::Relate:
        ids = relateIds(g, ont, ids, s.direction, s.typeArg, s.operands[0]);
        break;
      default:
        throw SceneqError("selection chain admits only select/filter/relate");
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

namespace {

struct Branch {
  std::string selectOperand;
  std::vector<const Step*> steps;  // excluding the select
  bool hasRelate = false;
  const Step* lastRelate = nullptr;
  int verifies = 0;
  bool endsWithExist = false;
  bool endsWithVerify = false;
};

std::vector<Branch> splitBranches(const Program& p) {
  std::vector<Branch> branches;
  for (const auto& s : p.steps) {
    if (s.op == Op::Select) {
      branches.push_back({s.operands[0], {}, false, nullptr, 0, false, false});
      continue;
    }
    if (branches.empty()) throw SceneqError("program does not start with select");
    Branch& b = branches.back();
    b.steps.push_back(&s);
    if (s.op == Op::Relate) {
      b.hasRelate = true;
      b.lastRelate = &s;
    }
    if (s.op == Op::VerifyAttr) ++b.verifies;
    // Logical combiners belong to the whole program, not to the branch they
    // happen to follow, so they do not change what the branch "ends with".
    if (s.op != Op::And && s.op != Op::Or && s.op != Op::Not) {
      b.endsWithExist = s.op == Op::Exist;
      b.endsWithVerify = s.op == Op::VerifyAttr;
    }
  }
  return branches;
}

TypeTriple row(const std::string& structural, const std::string& semantic,
               const std::string& detailed) {
  return {structural, semantic, detailed};
}

}  // namespace

const std::vector<std::string>& catalogRows() {
  static const std::vector<std::string> kRows = {
      "queryGlobal", "verifyGlobal", "chooseGlobal", "queryAttr",  "verifyAttr", "verifyAttrs",
      "chooseAttr",  "exist",        "existRel",     "logicOr",    "logicAnd",   "queryObject",
      "chooseObject", "queryRel",    "verifyRel",    "chooseRel",  "chooseObjRel", "compare",
      "common",      "twoSame",      "twoDiff",      "allSame",    "allDiff"};
  return kRows;
}

TypeTriple classify(const Program& p) {
  if (p.steps.empty()) throw SceneqError("empty program");
  auto branches = splitBranches(p);
  const Step& last = p.steps.back();
  auto unmatched = [&]() -> TypeTriple {
    throw SceneqError("program matches no catalog row: " + serializeProgram(p));
  };

  bool sceneFirst = branches.size() == 1 && branches[0].selectOperand == "scene";

  switch (last.op) {
    case Op::Query: {
      if (branches.size() != 1) return unmatched();
      if (sceneFirst) return row("query", "global", "queryGlobal");
      const Branch& b = branches[0];
      if (last.typeArg == "name") {
        if (b.lastRelate && b.lastRelate->operands[0] == "_")
          return row("query", "relation", "queryRel");
        return row("query", "category", "queryObject");
      }
      return row("query", "attribute", "queryAttr");
    }
    case Op::VerifyAttr: {
      if (branches.size() != 1 || branches[0].verifies != 1) return unmatched();
      if (sceneFirst) return row("verify", "global", "verifyGlobal");
      return row("verify", "attribute", "verifyAttr");
    }
    case Op::Exist: {
      if (branches.size() != 1) return unmatched();
      return branches[0].hasRelate ? row("verify", "relation", "existRel")
                                   : row("verify", "object", "exist");
    }
    case Op::And:
    case Op::Or: {
      bool allVerify = true, allExist = true;
      int totalVerifies = 0;
      for (const auto& b : branches) {
        if (!b.endsWithVerify) allVerify = false;
        if (!b.endsWithExist) allExist = false;
        totalVerifies += b.verifies;
      }
      if (last.op == Op::And && allVerify && totalVerifies >= 2)
        return row("logical", "attribute", "verifyAttrs");
      if (allExist && branches.size() == 2) {
        bool anyAttr = false;
        for (const auto& s : p.steps)
          if (s.op == Op::Filter) anyAttr = true;
        std::string sem = anyAttr ? "attribute" : "object";
        return last.op == Op::And ? row("logical", sem, "logicAnd")
                                  : row("logical", sem, "logicOr");
      }
      return unmatched();
    }
    case Op::Choose: {
      if (sceneFirst) return row("choose", "global", "chooseGlobal");
      if (!last.typeArg.empty()) return row("choose", "attribute", "chooseAttr");
      const Branch& b = branches.back();
      if (b.lastRelate && b.lastRelate->operands[0] == "_")
        return row("choose", "relation", "chooseObjRel");
      return row("choose", "category", "chooseObject");
    }
    case Op::ChooseRel:
      return row("choose", "relation", "chooseRel");
    case Op::VerifyRel:
      return row("verify", "relation", "verifyRel");
    case Op::Compare:
      return row("compare", "object", "compare");
    case Op::Common:
      return row("compare", "object", "common");
    case Op::Same:
      return branches.size() >= 2 ? row("compare", "object", "twoSame")
                                  : row("compare", "object", "allSame");
    case Op::Different:
      return branches.size() >= 2 ? row("compare", "object", "twoDiff")
                                  : row("compare", "object", "allDiff");
    default:
      return unmatched();
  }
}

std::string mainSubject(const Program& p) {
  std::string cur;
  for (const auto& s : p.steps) {
    if (s.op == Op::Select) {
      if (!cur.empty()) break;  // first branch only
      cur = s.operands[0] == "scene" ? "scene" : s.operands[0];
      continue;
    }
    if (cur.empty()) break;
    if (s.op == Op::Relate && s.operands[0] != "_") cur = s.operands[0];
  }
  if (cur.empty()) throw SceneqError("program has no selection");
  return cur;
}

}  // namespace sceneq
