#pragma once

// Query algebra for the embedded store's SPARQL subset. Not installed.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vrdf/sparql.hpp"
#include "vrdf/term.hpp"

namespace vrdf::sparql {

/// Variable reference by slot index into a row.
struct Var {
  std::size_t slot;
};

using TermOrVar = std::variant<Term, Var>;

struct Path {
  enum class Kind { link, inverse, sequence, alternative, zero_or_more, one_or_more, zero_or_one };
  Kind kind = Kind::link;
  std::optional<Term> iri;  // link
  std::vector<Path> parts;  // inverse/modifiers: 1; sequence/alternative: n
};

struct TriplePattern {
  TermOrVar subject;
  std::variant<Var, Path> predicate;
  TermOrVar object;
};

struct GroupPattern;
struct Query;

struct Expr {
  enum class Kind { constant, variable, unary, binary, call, aggregate, exists, in };
  Kind kind = Kind::constant;
  std::string op;  // operator, upper-cased function name, or IRI for casts
  std::optional<Term> constant;
  std::size_t slot = 0;
  std::vector<Expr> args;
  bool distinct = false;
  bool negated = false;          // NOT EXISTS / NOT IN
  bool count_star = false;
  std::string separator = " ";  // GROUP_CONCAT
  std::shared_ptr<GroupPattern> pattern;  // EXISTS
};

struct Element {
  enum class Kind { triples, filter, optional, minus, union_, bind, graph, subquery, group, values };
  Kind kind = Kind::triples;
  std::vector<TriplePattern> triples;
  Expr expr;
  std::size_t slot = 0;  // BIND target
  std::vector<GroupPattern> groups;
  std::optional<TermOrVar> graph_name;
  std::shared_ptr<Query> subquery;
  std::vector<std::size_t> value_slots;
  std::vector<std::vector<std::optional<Term>>> value_rows;
};

struct GroupPattern {
  std::vector<Element> elements;
};

struct Projection {
  std::size_t slot;
  std::optional<Expr> expr;
};

struct OrderKey {
  Expr expr;
  bool descending = false;
};

struct Query {
  enum class Form { select, ask };
  Form form = Form::select;
  bool distinct = false;
  bool select_all = false;
  std::vector<Projection> projection;
  GroupPattern where;
  std::vector<Expr> group_by;
  std::vector<Expr> having;
  std::vector<OrderKey> order_by;
  std::optional<std::size_t> limit;
  std::size_t offset = 0;
  /// Slots visible to SELECT * (user-named variables of this query level).
  std::vector<std::size_t> visible;
};

/// A parsed query plus its variable table. Slots are shared across nested
/// sub-selects; scoping is enforced at evaluation by projecting.
struct ParsedQuery {
  Query query;
  std::vector<std::string> var_names;
};

ParsedQuery parse_query(std::string_view text);

/// Read access used by the evaluator. `graph == nullptr` selects the default graph.
class QuadSource {
 public:
  using Visitor = std::function<void(const Term& s, const Term& p, const Term& o)>;
  virtual ~QuadSource() = default;
  virtual void match(const Term* s, const Term* p, const Term* o, const Term* graph,
                     const Visitor& visit) const = 0;
  virtual std::vector<Term> named_graphs() const = 0;
};

SelectResult evaluate(const ParsedQuery& query, const QuadSource& source);

}  // namespace vrdf::sparql
