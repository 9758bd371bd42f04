#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "lexer.hpp"
#include "sparql_ast.hpp"
#include "vrdf/error.hpp"
#include "vrdf/rdf_io.hpp"
#include "vrdf/vocab.hpp"

namespace vrdf::sparql {

using syntax::Tok;
using syntax::Token;
using syntax::TokenStream;

namespace {

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  return s;
}

const std::set<std::string>& builtin_functions() {
  static const std::set<std::string> names = {
      "STR",       "LANG",      "LANGMATCHES", "DATATYPE",  "BOUND",     "IRI",      "URI",
      "ABS",       "CEIL",      "FLOOR",       "ROUND",     "CONCAT",    "SUBSTR",   "STRLEN",
      "REPLACE",   "UCASE",     "LCASE",       "CONTAINS",  "STRSTARTS", "STRENDS",  "STRBEFORE",
      "STRAFTER",  "COALESCE",  "IF",          "STRLANG",   "STRDT",     "SAMETERM", "ISIRI",
      "ISURI",     "ISBLANK",   "ISLITERAL",   "ISNUMERIC", "REGEX",     "YEAR",     "MONTH",
      "DAY",       "ENCODE_FOR_URI"};
  return names;
}

const std::set<std::string>& aggregate_functions() {
  static const std::set<std::string> names = {"COUNT", "SUM", "MIN", "MAX", "AVG", "SAMPLE", "GROUP_CONCAT"};
  return names;
}

/// Shared machinery for queries and updates: prologue, terms, triples.
class Parser {
 public:
  explicit Parser(std::string_view text) : ts_(text) {}

  // ---- query ----------------------------------------------------------------

  ParsedQuery parse_query() {
    prologue();
    ParsedQuery pq;
    levels_.emplace_back();
    if (ts_.accept_keyword("ASK")) {
      pq.query.form = Query::Form::ask;
      ts_.accept_keyword("WHERE");
      pq.query.where = group_graph_pattern();
      solution_modifiers(pq.query);
    } else if (ts_.peek().is_keyword("SELECT")) {
      pq.query = select_query(true);
    } else {
      ts_.fail("expected SELECT or ASK, found " + syntax::describe(ts_.peek()));
    }
    if (!ts_.at_end()) ts_.fail("unexpected trailing " + syntax::describe(ts_.peek()));
    pq.var_names = var_names_;
    return pq;
  }

  // ---- update ---------------------------------------------------------------

  std::vector<UpdateOperation> parse_update() {
    std::vector<UpdateOperation> ops;
    for (;;) {
      prologue();
      if (ts_.at_end()) break;
      const Token& t = ts_.peek();
      UpdateOperation op{UpdateOperation::Kind::insert_data, {}};
      if (t.is_keyword("INSERT") || t.is_keyword("DELETE")) {
        bool insert = t.is_keyword("INSERT");
        Token kw = ts_.next();
        if (!ts_.accept_keyword("DATA")) {
          throw DisallowedUpdate("only INSERT DATA and DELETE DATA are accepted; found " +
                                 upper(kw.text) + " " + syntax::describe(ts_.peek()) + " at line " +
                                 std::to_string(kw.line));
        }
        op.kind = insert ? UpdateOperation::Kind::insert_data : UpdateOperation::Kind::delete_data;
        quad_data(op.quads, !insert);
      } else if (t.kind == Tok::name) {
        static const std::set<std::string> other = {"LOAD", "CLEAR", "DROP", "CREATE", "ADD",
                                                    "MOVE", "COPY",  "WITH"};
        if (other.count(upper(t.text))) {
          throw DisallowedUpdate("only INSERT DATA and DELETE DATA are accepted; found " + upper(t.text));
        }
        ts_.fail("expected INSERT DATA or DELETE DATA, found " + syntax::describe(t));
      } else {
        ts_.fail("expected INSERT DATA or DELETE DATA, found " + syntax::describe(t));
      }
      ops.push_back(std::move(op));
      if (!ts_.accept_punct(";")) break;
    }
    if (!ts_.at_end()) ts_.fail("unexpected " + syntax::describe(ts_.peek()));
    return ops;
  }

 private:
  // ---- prologue and terms -----------------------------------------------------

  void prologue() {
    for (;;) {
      if (ts_.accept_keyword("PREFIX")) {
        Token p = ts_.next();
        if (p.kind != Tok::pname || p.text.find(':') != p.text.size() - 1) ts_.fail("expected prefix name", p);
        Token iri = ts_.next();
        if (iri.kind != Tok::iri) ts_.fail("expected IRI", iri);
        prefixes_[p.text.substr(0, p.text.size() - 1)] = syntax::resolve_iri(base_, iri.text);
      } else if (ts_.accept_keyword("BASE")) {
        Token iri = ts_.next();
        if (iri.kind != Tok::iri) ts_.fail("expected IRI", iri);
        base_ = syntax::resolve_iri(base_, iri.text);
      } else {
        return;
      }
    }
  }

  Term iri_from(const Token& t) {
    std::string value = t.kind == Tok::pname ? syntax::expand_pname(t, prefixes_, ts_) : syntax::resolve_iri(base_, t.text);
    try {
      return Term::iri(std::move(value));
    } catch (const InvalidTerm& e) {
      ts_.fail(e.what(), t);
    }
  }

  Term literal_from(const Token& s) {
    try {
      if (ts_.peek().kind == Tok::langtag) return Term::lang_literal(s.text, ts_.next().text);
      if (ts_.accept_punct("^^")) {
        Token dt = ts_.next();
        if (dt.kind != Tok::iri && dt.kind != Tok::pname) ts_.fail("expected datatype IRI", dt);
        return Term::literal(s.text, iri_from(dt).value());
      }
      return Term::literal(s.text);
    } catch (const InvalidTerm& e) {
      ts_.fail(e.what(), s);
    }
  }

  /// Literal or IRI constant at the current position, if any.
  std::optional<Term> constant() {
    const Token& t = ts_.peek();
    switch (t.kind) {
      case Tok::iri:
      case Tok::pname:
        return iri_from(ts_.next());
      case Tok::string:
        return literal_from(ts_.next());
      case Tok::integer:
        return Term::literal(ts_.next().text, vocab::xsd::integer);
      case Tok::decimal:
        return Term::literal(ts_.next().text, vocab::xsd::decimal);
      case Tok::double_:
        return Term::literal(ts_.next().text, vocab::xsd::double_);
      case Tok::name:
        if (t.text == "true" || t.text == "false") return Term::literal(ts_.next().text, vocab::xsd::boolean);
        return std::nullopt;
      default:
        return std::nullopt;
    }
  }

  // ---- update data blocks ---------------------------------------------------------

  void quad_data(std::vector<Quad>& out, bool is_delete) {
    ts_.expect_punct("{");
    ground_triples(out, std::nullopt, is_delete);
    while (!ts_.accept_punct("}")) {
      if (ts_.accept_keyword("GRAPH")) {
        Token g = ts_.next();
        if (g.kind != Tok::iri && g.kind != Tok::pname) ts_.fail("expected graph IRI", g);
        Term graph = iri_from(g);
        ts_.expect_punct("{");
        ground_triples(out, graph, is_delete);
        ts_.expect_punct("}");
        ts_.accept_punct(".");
        ground_triples(out, std::nullopt, is_delete);
      } else {
        ts_.fail("expected triple, GRAPH block or '}', found " + syntax::describe(ts_.peek()));
      }
    }
  }

  Term data_term(bool allow_literal, bool is_delete) {
    Token t = ts_.peek();
    if (t.kind == Tok::var) ts_.fail("variables are not allowed in data blocks", t);
    if (t.kind == Tok::blank) {
      if (is_delete) ts_.fail("blank nodes are not allowed in DELETE DATA", t);
      ts_.next();
      return Term::blank(t.text);
    }
    if (t.is_punct("[")) ts_.fail("anonymous blank nodes are not supported in data blocks", t);
    auto c = constant();
    if (!c) ts_.fail("expected RDF term, found " + syntax::describe(t), t);
    if (c->is_literal() && !allow_literal) ts_.fail("literal not allowed in this position", t);
    return *c;
  }

  void ground_triples(std::vector<Quad>& out, const std::optional<Term>& graph, bool is_delete) {
    for (;;) {
      const Token& t = ts_.peek();
      if (t.is_punct("}") || t.is_keyword("GRAPH") || t.kind == Tok::end) return;
      Term s = data_term(false, is_delete);
      for (;;) {
        Token pt = ts_.peek();
        Term p = (pt.kind == Tok::name && pt.text == "a") ? (ts_.next(), Term::iri(vocab::rdf::type))
                                                         : data_term(false, is_delete);
        if (!p.is_iri()) ts_.fail("predicate must be an IRI", pt);
        do {
          Term o = data_term(true, is_delete);
          out.emplace_back(s, p, std::move(o), graph);
        } while (ts_.accept_punct(","));
        if (!ts_.accept_punct(";")) break;
        while (ts_.accept_punct(";")) {
        }
        const Token& n = ts_.peek();
        if (n.is_punct(".") || n.is_punct("}")) break;
      }
      if (!ts_.accept_punct(".")) return;
    }
  }

  // ---- variables ----------------------------------------------------------------

  std::size_t slot_for(const std::string& name, bool user_visible = true) {
    auto it = slots_.find(name);
    std::size_t slot;
    if (it == slots_.end()) {
      slot = var_names_.size();
      slots_.emplace(name, slot);
      var_names_.push_back(name);
    } else {
      slot = it->second;
    }
    if (user_visible && !levels_.empty()) levels_.back().insert(slot);
    return slot;
  }

  std::size_t fresh_var() {
    return slot_for("_:anon" + std::to_string(++anon_counter_), false);
  }

  // ---- SELECT ---------------------------------------------------------------------

  Query select_query(bool top_level) {
    Query q;
    ts_.expect_keyword("SELECT");
    if (ts_.accept_keyword("DISTINCT")) {
      q.distinct = true;
    } else {
      ts_.accept_keyword("REDUCED");
    }
    std::vector<std::size_t> projected;
    if (ts_.accept_punct("*")) {
      q.select_all = true;
    } else {
      for (;;) {
        const Token& t = ts_.peek();
        if (t.kind == Tok::var) {
          std::size_t s = slot_for(ts_.next().text, false);
          q.projection.push_back({s, std::nullopt});
          projected.push_back(s);
        } else if (t.is_punct("(")) {
          ts_.next();
          Expr e = expression();
          ts_.expect_keyword("AS");
          Token v = ts_.next();
          if (v.kind != Tok::var) ts_.fail("expected variable after AS", v);
          std::size_t s = slot_for(v.text, false);
          ts_.expect_punct(")");
          q.projection.push_back({s, std::move(e)});
          projected.push_back(s);
        } else {
          break;
        }
      }
      if (q.projection.empty()) ts_.fail("expected projection, found " + syntax::describe(ts_.peek()));
    }
    if (ts_.peek().is_keyword("FROM")) ts_.fail("FROM clauses are not supported");
    if (!top_level) levels_.emplace_back();
    ts_.accept_keyword("WHERE");
    q.where = group_graph_pattern();
    solution_modifiers(q);
    q.visible.assign(levels_.back().begin(), levels_.back().end());
    if (!top_level) {
      levels_.pop_back();
      if (q.select_all) {
        for (auto s : q.visible) levels_.back().insert(s);
      } else {
        for (auto s : projected) levels_.back().insert(s);
      }
    } else {
      for (auto s : projected) levels_.back().insert(s);
    }
    return q;
  }

  void solution_modifiers(Query& q) {
    if (ts_.accept_keyword("GROUP")) {
      ts_.expect_keyword("BY");
      for (;;) {
        const Token& t = ts_.peek();
        if (t.kind == Tok::var) {
          q.group_by.push_back(var_expr(slot_for(ts_.next().text)));
        } else if (t.is_punct("(")) {
          ts_.next();
          Expr e = expression();
          if (ts_.accept_keyword("AS")) ts_.fail("GROUP BY ... AS is not supported");
          ts_.expect_punct(")");
          q.group_by.push_back(std::move(e));
        } else if (t.kind == Tok::name && !t.is_keyword("HAVING") && !t.is_keyword("ORDER") &&
                   !t.is_keyword("LIMIT") && !t.is_keyword("OFFSET")) {
          q.group_by.push_back(primary());
        } else {
          break;
        }
      }
      if (q.group_by.empty()) ts_.fail("expected GROUP BY condition");
    }
    if (ts_.accept_keyword("HAVING")) {
      do {
        q.having.push_back(constraint());
      } while (ts_.peek().is_punct("(") || (ts_.peek().kind == Tok::name && !ts_.peek().is_keyword("ORDER") &&
                                               !ts_.peek().is_keyword("LIMIT") && !ts_.peek().is_keyword("OFFSET")));
    }
    if (ts_.accept_keyword("ORDER")) {
      ts_.expect_keyword("BY");
      for (;;) {
        const Token& t = ts_.peek();
        if (t.is_keyword("ASC") || t.is_keyword("DESC")) {
          bool desc = t.is_keyword("DESC");
          ts_.next();
          ts_.expect_punct("(");
          Expr e = expression();
          ts_.expect_punct(")");
          q.order_by.push_back({std::move(e), desc});
        } else if (t.kind == Tok::var) {
          q.order_by.push_back({var_expr(slot_for(ts_.next().text)), false});
        } else if (t.is_punct("(")) {
          q.order_by.push_back({constraint(), false});
        } else if (t.kind == Tok::name && !t.is_keyword("LIMIT") && !t.is_keyword("OFFSET")) {
          q.order_by.push_back({primary(), false});
        } else {
          break;
        }
      }
      if (q.order_by.empty()) ts_.fail("expected ORDER BY condition");
    }
    for (int i = 0; i < 2; ++i) {
      if (ts_.accept_keyword("LIMIT")) {
        Token n = ts_.next();
        if (n.kind != Tok::integer || n.text[0] == '-') ts_.fail("expected non-negative integer", n);
        q.limit = std::stoull(n.text);
      } else if (ts_.accept_keyword("OFFSET")) {
        Token n = ts_.next();
        if (n.kind != Tok::integer || n.text[0] == '-') ts_.fail("expected non-negative integer", n);
        q.offset = std::stoull(n.text);
      }
    }
  }

  // ---- graph patterns -----------------------------------------------------------

  GroupPattern group_graph_pattern() {
    ts_.expect_punct("{");
    GroupPattern g;
    if (ts_.peek().is_keyword("SELECT")) {
      Element e;
      e.kind = Element::Kind::subquery;
      e.subquery = std::make_shared<Query>(select_query(false));
      g.elements.push_back(std::move(e));
      ts_.expect_punct("}");
      return g;
    }
    for (;;) {
      const Token& t = ts_.peek();
      if (t.is_punct("}")) {
        ts_.next();
        return g;
      }
      if (t.kind == Tok::end) ts_.fail("unterminated group pattern");
      if (t.is_punct("{")) {
        GroupPattern first = group_graph_pattern();
        if (ts_.peek().is_keyword("UNION")) {
          Element e;
          e.kind = Element::Kind::union_;
          e.groups.push_back(std::move(first));
          while (ts_.accept_keyword("UNION")) e.groups.push_back(group_graph_pattern());
          g.elements.push_back(std::move(e));
        } else {
          Element e;
          e.kind = Element::Kind::group;
          e.groups.push_back(std::move(first));
          g.elements.push_back(std::move(e));
        }
      } else if (t.is_keyword("OPTIONAL") || t.is_keyword("MINUS")) {
        bool optional = t.is_keyword("OPTIONAL");
        ts_.next();
        Element e;
        e.kind = optional ? Element::Kind::optional : Element::Kind::minus;
        e.groups.push_back(group_graph_pattern());
        g.elements.push_back(std::move(e));
      } else if (t.is_keyword("GRAPH")) {
        ts_.next();
        Element e;
        e.kind = Element::Kind::graph;
        e.graph_name = var_or_iri();
        e.groups.push_back(group_graph_pattern());
        g.elements.push_back(std::move(e));
      } else if (t.is_keyword("FILTER")) {
        ts_.next();
        Element e;
        e.kind = Element::Kind::filter;
        e.expr = constraint();
        g.elements.push_back(std::move(e));
      } else if (t.is_keyword("BIND")) {
        ts_.next();
        ts_.expect_punct("(");
        Element e;
        e.kind = Element::Kind::bind;
        e.expr = expression();
        ts_.expect_keyword("AS");
        Token v = ts_.next();
        if (v.kind != Tok::var) ts_.fail("expected variable after AS", v);
        e.slot = slot_for(v.text);
        ts_.expect_punct(")");
        g.elements.push_back(std::move(e));
      } else if (t.is_keyword("VALUES")) {
        ts_.next();
        g.elements.push_back(values_block());
      } else if (t.is_keyword("SERVICE")) {
        ts_.fail("SERVICE is not supported");
      } else {
        Element e;
        e.kind = Element::Kind::triples;
        triples_same_subject(e.triples);
        if (!g.elements.empty() && g.elements.back().kind == Element::Kind::triples) {
          auto& prev = g.elements.back().triples;
          prev.insert(prev.end(), e.triples.begin(), e.triples.end());
        } else {
          g.elements.push_back(std::move(e));
        }
      }
      ts_.accept_punct(".");
    }
  }

  Element values_block() {
    Element e;
    e.kind = Element::Kind::values;
    bool multi = ts_.accept_punct("(");
    if (multi) {
      while (!ts_.accept_punct(")")) {
        Token v = ts_.next();
        if (v.kind != Tok::var) ts_.fail("expected variable in VALUES", v);
        e.value_slots.push_back(slot_for(v.text));
      }
    } else {
      Token v = ts_.next();
      if (v.kind != Tok::var) ts_.fail("expected variable in VALUES", v);
      e.value_slots.push_back(slot_for(v.text));
    }
    ts_.expect_punct("{");
    auto value = [&]() -> std::optional<Term> {
      if (ts_.accept_keyword("UNDEF")) return std::nullopt;
      auto c = constant();
      if (!c) ts_.fail("expected data value in VALUES");
      return c;
    };
    while (!ts_.accept_punct("}")) {
      std::vector<std::optional<Term>> row;
      if (multi) {
        ts_.expect_punct("(");
        while (!ts_.accept_punct(")")) row.push_back(value());
        if (row.size() != e.value_slots.size()) ts_.fail("VALUES row has wrong arity");
      } else {
        row.push_back(value());
      }
      e.value_rows.push_back(std::move(row));
    }
    return e;
  }

  TermOrVar var_or_iri() {
    Token t = ts_.next();
    if (t.kind == Tok::var) return Var{slot_for(t.text)};
    if (t.kind == Tok::iri || t.kind == Tok::pname) return iri_from(t);
    ts_.fail("expected variable or IRI, found " + syntax::describe(t), t);
  }

  TermOrVar node(std::vector<TriplePattern>& out) {
    const Token& t = ts_.peek();
    if (t.kind == Tok::var) return Var{slot_for(ts_.next().text)};
    if (t.kind == Tok::blank) return Var{slot_for("_:" + ts_.next().text, false)};
    if (t.is_punct("[")) {
      ts_.next();
      Var v{fresh_var()};
      if (!ts_.accept_punct("]")) {
        property_list(v, out);
        ts_.expect_punct("]");
      }
      return v;
    }
    if (t.is_punct("(")) {
      ts_.next();
      std::vector<TermOrVar> items;
      while (!ts_.accept_punct(")")) items.push_back(node(out));
      TermOrVar head = Term::iri(vocab::rdf::nil);
      for (auto it = items.rbegin(); it != items.rend(); ++it) {
        Var cell{fresh_var()};
        out.push_back({cell, link(vocab::rdf::first), *it});
        out.push_back({cell, link(vocab::rdf::rest), head});
        head = cell;
      }
      return head;
    }
    auto c = constant();
    if (!c) ts_.fail("expected RDF term or variable, found " + syntax::describe(t), t);
    return *c;
  }

  static Path link(const std::string& iri) {
    Path p;
    p.kind = Path::Kind::link;
    p.iri = Term::iri(iri);
    return p;
  }

  void triples_same_subject(std::vector<TriplePattern>& out) {
    bool bracketed = ts_.peek().is_punct("[") || ts_.peek().is_punct("(");
    TermOrVar s = node(out);
    const Token& n = ts_.peek();
    if (bracketed && (n.is_punct(".") || n.is_punct("}"))) return;
    property_list(s, out);
  }

  void property_list(const TermOrVar& subject, std::vector<TriplePattern>& out) {
    for (;;) {
      std::variant<Var, Path> pred = verb();
      do {
        TermOrVar o = node(out);
        out.push_back({subject, pred, std::move(o)});
      } while (ts_.accept_punct(","));
      if (!ts_.accept_punct(";")) return;
      while (ts_.accept_punct(";")) {
      }
      const Token& n = ts_.peek();
      if (n.is_punct(".") || n.is_punct("}") || n.is_punct("]")) return;
    }
  }

  std::variant<Var, Path> verb() {
    const Token& t = ts_.peek();
    if (t.kind == Tok::var) return Var{slot_for(ts_.next().text)};
    return path_alternative();
  }

  Path path_alternative() {
    Path first = path_sequence();
    if (!ts_.peek().is_punct("|")) return first;
    Path alt;
    alt.kind = Path::Kind::alternative;
    alt.parts.push_back(std::move(first));
    while (ts_.accept_punct("|")) alt.parts.push_back(path_sequence());
    return alt;
  }

  Path path_sequence() {
    Path first = path_elt_or_inverse();
    if (!ts_.peek().is_punct("/")) return first;
    Path seq;
    seq.kind = Path::Kind::sequence;
    seq.parts.push_back(std::move(first));
    while (ts_.accept_punct("/")) seq.parts.push_back(path_elt_or_inverse());
    return seq;
  }

  Path path_elt_or_inverse() {
    if (ts_.accept_punct("^")) {
      Path inv;
      inv.kind = Path::Kind::inverse;
      inv.parts.push_back(path_elt());
      return inv;
    }
    return path_elt();
  }

  Path path_elt() {
    Path primary;
    const Token& t = ts_.peek();
    if (t.kind == Tok::name && t.text == "a") {
      ts_.next();
      primary = link(vocab::rdf::type);
    } else if (t.kind == Tok::iri || t.kind == Tok::pname) {
      primary.kind = Path::Kind::link;
      primary.iri = iri_from(ts_.next());
    } else if (t.is_punct("(")) {
      ts_.next();
      primary = path_alternative();
      ts_.expect_punct(")");
    } else if (t.is_punct("!")) {
      ts_.fail("negated property sets are not supported");
    } else {
      ts_.fail("expected predicate or property path, found " + syntax::describe(t), t);
    }
    const Token& m = ts_.peek();
    Path::Kind mod;
    if (m.is_punct("*")) {
      mod = Path::Kind::zero_or_more;
    } else if (m.is_punct("+")) {
      mod = Path::Kind::one_or_more;
    } else if (m.is_punct("?")) {
      mod = Path::Kind::zero_or_one;
    } else {
      return primary;
    }
    ts_.next();
    Path wrapped;
    wrapped.kind = mod;
    wrapped.parts.push_back(std::move(primary));
    return wrapped;
  }

  // ---- expressions ----------------------------------------------------------------

  static Expr var_expr(std::size_t slot) {
    Expr e;
    e.kind = Expr::Kind::variable;
    e.slot = slot;
    return e;
  }

  static Expr binary(std::string op, Expr l, Expr r) {
    Expr e;
    e.kind = Expr::Kind::binary;
    e.op = std::move(op);
    e.args.push_back(std::move(l));
    e.args.push_back(std::move(r));
    return e;
  }

  Expr constraint() {
    if (ts_.peek().is_punct("(")) {
      ts_.next();
      Expr e = expression();
      ts_.expect_punct(")");
      return e;
    }
    return primary();
  }

  Expr expression() {
    Expr l = and_expr();
    while (ts_.accept_punct("||")) l = binary("||", std::move(l), and_expr());
    return l;
  }

  Expr and_expr() {
    Expr l = relational();
    while (ts_.accept_punct("&&")) l = binary("&&", std::move(l), relational());
    return l;
  }

  Expr relational() {
    Expr l = additive();
    const Token& t = ts_.peek();
    static const std::set<std::string> ops = {"=", "!=", "<", ">", "<=", ">="};
    if (t.kind == Tok::punct && ops.count(t.text)) {
      std::string op = ts_.next().text;
      return binary(op, std::move(l), additive());
    }
    bool negated = false;
    if (t.is_keyword("NOT") && ts_.peek(1).is_keyword("IN")) {
      ts_.next();
      negated = true;
    }
    if (ts_.accept_keyword("IN")) {
      Expr e;
      e.kind = Expr::Kind::in;
      e.negated = negated;
      e.args.push_back(std::move(l));
      ts_.expect_punct("(");
      if (!ts_.accept_punct(")")) {
        do {
          e.args.push_back(expression());
        } while (ts_.accept_punct(","));
        ts_.expect_punct(")");
      }
      return e;
    }
    return l;
  }

  Expr additive() {
    Expr l = multiplicative();
    for (;;) {
      const Token& t = ts_.peek();
      if (t.is_punct("+") || t.is_punct("-")) {
        std::string op = ts_.next().text;
        l = binary(op, std::move(l), multiplicative());
      } else if ((t.kind == Tok::integer || t.kind == Tok::decimal || t.kind == Tok::double_) &&
                 (t.text[0] == '+' || t.text[0] == '-')) {
        // "?a -1" lexed as a signed literal.
        Token n = ts_.next();
        Tok kind = n.kind;
        std::string op(1, n.text[0]);
        Expr r;
        r.kind = Expr::Kind::constant;
        const std::string& dt = kind == Tok::integer ? vocab::xsd::integer
                                : kind == Tok::decimal ? vocab::xsd::decimal
                                                       : vocab::xsd::double_;
        r.constant = Term::literal(n.text.substr(1), dt);
        l = binary(op, std::move(l), std::move(r));
      } else {
        return l;
      }
    }
  }

  Expr multiplicative() {
    Expr l = unary();
    for (;;) {
      const Token& t = ts_.peek();
      if (t.is_punct("*") || t.is_punct("/")) {
        std::string op = ts_.next().text;
        l = binary(op, std::move(l), unary());
      } else {
        return l;
      }
    }
  }

  Expr unary() {
    const Token& t = ts_.peek();
    if (t.is_punct("!") || t.is_punct("-") || t.is_punct("+")) {
      std::string op = ts_.next().text;
      Expr e;
      e.kind = Expr::Kind::unary;
      e.op = op;
      e.args.push_back(primary());
      return e;
    }
    return primary();
  }

  Expr primary() {
    const Token& t = ts_.peek();
    if (t.is_punct("(")) {
      ts_.next();
      Expr e = expression();
      ts_.expect_punct(")");
      return e;
    }
    if (t.kind == Tok::var) return var_expr(slot_for(ts_.next().text));
    if (t.kind == Tok::name && !(t.text == "true" || t.text == "false")) return builtin_call();
    if ((t.kind == Tok::iri || t.kind == Tok::pname) && ts_.peek(1).is_punct("(")) {
      Term fn = iri_from(ts_.next());
      Expr e;
      e.kind = Expr::Kind::call;
      e.op = fn.value();
      ts_.expect_punct("(");
      if (!ts_.accept_punct(")")) {
        do {
          e.args.push_back(expression());
        } while (ts_.accept_punct(","));
        ts_.expect_punct(")");
      }
      return e;
    }
    auto c = constant();
    if (!c) ts_.fail("expected expression, found " + syntax::describe(t), t);
    Expr e;
    e.kind = Expr::Kind::constant;
    e.constant = std::move(c);
    return e;
  }

  Expr builtin_call() {
    Token name = ts_.next();
    std::string fn = upper(name.text);
    if (fn == "NOT" || fn == "EXISTS") {
      Expr e;
      e.kind = Expr::Kind::exists;
      if (fn == "NOT") {
        ts_.expect_keyword("EXISTS");
        e.negated = true;
      }
      e.pattern = std::make_shared<GroupPattern>(group_graph_pattern());
      return e;
    }
    if (aggregate_functions().count(fn)) {
      Expr e;
      e.kind = Expr::Kind::aggregate;
      e.op = fn;
      ts_.expect_punct("(");
      e.distinct = ts_.accept_keyword("DISTINCT");
      if (fn == "COUNT" && ts_.accept_punct("*")) {
        e.count_star = true;
      } else {
        e.args.push_back(expression());
      }
      if (fn == "GROUP_CONCAT" && ts_.accept_punct(";")) {
        ts_.expect_keyword("SEPARATOR");
        ts_.expect_punct("=");
        Token s = ts_.next();
        if (s.kind != Tok::string) ts_.fail("expected separator string", s);
        e.separator = s.text;
      }
      ts_.expect_punct(")");
      return e;
    }
    if (!builtin_functions().count(fn)) ts_.fail("unknown function " + name.text, name);
    Expr e;
    e.kind = Expr::Kind::call;
    e.op = fn;
    ts_.expect_punct("(");
    if (fn == "BOUND") {
      Token v = ts_.next();
      if (v.kind != Tok::var) ts_.fail("BOUND expects a variable", v);
      e.args.push_back(var_expr(slot_for(v.text)));
      ts_.expect_punct(")");
      return e;
    }
    if (!ts_.accept_punct(")")) {
      do {
        e.args.push_back(expression());
      } while (ts_.accept_punct(","));
      ts_.expect_punct(")");
    }
    return e;
  }

  TokenStream ts_;
  std::string base_;
  std::map<std::string, std::string> prefixes_;
  std::map<std::string, std::size_t> slots_;
  std::vector<std::string> var_names_;
  std::vector<std::set<std::size_t>> levels_;
  std::size_t anon_counter_ = 0;
};

}  // namespace

ParsedQuery parse_query(std::string_view text) { return Parser(text).parse_query(); }

}  // namespace vrdf::sparql

namespace vrdf {

std::vector<UpdateOperation> parse_update(std::string_view text) {
  return sparql::Parser(text).parse_update();
}

std::vector<std::string> query_variables(std::string_view query) {
  auto pq = sparql::parse_query(query);
  std::vector<std::string> out;
  for (const auto& p : pq.query.projection) out.push_back(pq.var_names[p.slot]);
  return out;
}

bool is_ask_query(std::string_view query) {
  return sparql::parse_query(query).query.form == sparql::Query::Form::ask;
}

std::string to_data_update(UpdateOperation::Kind kind, const QuadSet& quads) {
  if (quads.empty()) return {};
  // Keyed by graph string; the default graph ("") sorts first.
  std::map<std::string, std::vector<std::string>> by_graph;
  for (const auto& q : quads) {
    by_graph[q.graph ? q.graph->to_string() : std::string()].push_back(
        q.subject.to_string() + ' ' + q.predicate.to_string() + ' ' + q.object.to_string() + " .");
  }
  std::string out = kind == UpdateOperation::Kind::insert_data ? "INSERT DATA {" : "DELETE DATA {";
  for (auto& [graph, lines] : by_graph) {
    std::sort(lines.begin(), lines.end());
    if (!graph.empty()) out += " GRAPH " + graph + " {";
    for (const auto& l : lines) out += ' ' + l;
    if (!graph.empty()) out += " }";
  }
  out += " }";
  return out;
}

}  // namespace vrdf
