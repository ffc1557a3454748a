#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sceneq/ontology.hpp"
#include "sceneq/scenegraph.hpp"

namespace sceneq {

// One step of the reasoning DSL. Textual form of a step:
//   opName [ '(' args ')' ] [ typeArg ] [ ':' operand ('|' operand)* ]
// joined by '/'. Examples:
//   select: table / filter: white / relate(subject,on): apple / query: color
//   select: apple / choose color: red|green
//   select: scene / query: weather
// Field usage by op:
//   select           operands[0] = concept | category | scene | allObjs
//   filter           operands[0] = attribute or position value
//   relate           direction, typeArg = relation, operands[0] = target ("_" = any)
//   verify           typeArg = attribute type | weather | location, operands[0] = value
//   verifyRel        direction, typeArg = relation, operands[0] = target
//   query            typeArg = attribute type | name | position | weather | location
//   choose           typeArg optional (as verify), operands = {a, b}
//   chooseRel        direction, operands = {rel1, rel2, target}
//   compare          typeArg = attribute type, operands[0] = more | less
//   same/different   typeArg optional attribute type
//   exist/and/or/not/common  bare
enum class Op {
  Select,
  Filter,
  Relate,
  VerifyAttr,
  VerifyRel,
  Query,
  Choose,
  ChooseRel,
  Exist,
  And,
  Or,
  Not,
  Compare,
  Common,
  Same,
  Different
};

struct Step {
  Op op = Op::Select;
  std::string typeArg;
  std::vector<std::string> operands;
  std::string direction;  // subject | object, for relate/verifyRel/chooseRel
  bool operator==(const Step&) const = default;
};

struct Program {
  std::vector<Step> steps;
  bool operator==(const Program&) const = default;
};

// Throws SceneqError on malformed text; messages carry the 1-based step
// index. Performs stack type checking so execution can only fail with the
// domain outcomes below, never with arity or type errors.
Program parseProgram(const std::string& text);

std::string serializeProgram(const Program& p);

// Expected, non-bug outcomes of running a program against a graph. They
// mark a question as ungenerable for that scene.
enum class ExecErrorKind { AmbiguousReference, EmptySelection, MissingAttribute };

struct ExecError {
  ExecErrorKind kind;
  int stepIndex = 0;  // 1-based
  std::string detail;
  std::string describe() const;
};

struct ExecResult {
  std::optional<std::string> answer;  // booleans surface as "yes"/"no"
  std::optional<ExecError> error;
  bool ok() const { return answer.has_value(); }
};

// Runs the program. Unknown concept/type/relation names inside the program
// throw SceneqError (bad data); resolvable programs return an answer or one
// of the three domain errors.
ExecResult execute(const Program& p, const SceneGraph& g, const Ontology& ont);

// Runs a bare select/filter/relate chain and returns the matched object
// ids, sorted. Reference prefixes are validated with this before use.
std::vector<std::string> resolveSelection(const std::vector<Step>& steps, const SceneGraph& g,
                                          const Ontology& ont);

struct TypeTriple {
  std::string structural;  // verify | query | choose | logical | compare
  std::string semantic;    // object | attribute | category | relation | global
  std::string detailed;    // catalog row name
  bool operator==(const TypeTriple&) const = default;
};

// Matches the step shape against the catalog rows (filter/relate chains are
// transparent). Throws SceneqError when no row matches.
TypeTriple classify(const Program& p);

// Names of all catalog rows, in canonical order.
const std::vector<std::string>& catalogRows();

// Concept whose final operation consumes the question's selection: the last
// concrete select/relate target of the first branch ("scene" for scene
// questions). Used for group labels and plausibility subjects.
std::string mainSubject(const Program& p);

// Short answer surface for relation-valued answers ("to the left of" ->
// "left"). Identity for everything else.
std::string spatialShortForm(const std::string& relationId);

}  // namespace sceneq
