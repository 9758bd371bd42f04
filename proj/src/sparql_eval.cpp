#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <unordered_set>

#include "lexer.hpp"
#include "sparql_ast.hpp"
#include "vrdf/error.hpp"
#include "vrdf/vocab.hpp"

namespace vrdf::sparql {

namespace {

using Row = std::vector<std::optional<Term>>;
using Rows = std::vector<Row>;
// nullopt doubles as "unbound" and "expression error"; SPARQL treats both the
// same way at every place a value is consumed.
using Value = std::optional<Term>;

namespace xsd = vocab::xsd;

const Term& true_term() {
  static const Term t = Term::literal("true", xsd::boolean);
  return t;
}
const Term& false_term() {
  static const Term t = Term::literal("false", xsd::boolean);
  return t;
}
Term boolean(bool b) { return b ? true_term() : false_term(); }

// ---- numerics -----------------------------------------------------------------

struct Num {
  enum Kind { integer = 0, decimal = 1, float_ = 2, double_ = 3 } kind;
  long long i = 0;
  double d = 0;
  double as_double() const { return kind == integer ? static_cast<double>(i) : d; }
};

bool is_integer_type(const std::string& dt) {
  static const std::set<std::string> types = {
      xsd::integer,
      std::string(xsd::ns) + "int",
      std::string(xsd::ns) + "long",
      std::string(xsd::ns) + "short",
      std::string(xsd::ns) + "byte",
      std::string(xsd::ns) + "nonNegativeInteger",
      std::string(xsd::ns) + "nonPositiveInteger",
      std::string(xsd::ns) + "positiveInteger",
      std::string(xsd::ns) + "negativeInteger",
      std::string(xsd::ns) + "unsignedInt",
      std::string(xsd::ns) + "unsignedLong",
      std::string(xsd::ns) + "unsignedShort",
      std::string(xsd::ns) + "unsignedByte"};
  return types.count(dt) > 0;
}

std::optional<long long> parse_integer(std::string_view s) {
  if (!s.empty() && s[0] == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_decimal(std::string_view s) {
  static const std::regex re(R"([+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+))");
  std::string str(s);
  if (!std::regex_match(str, re)) return std::nullopt;
  return std::strtod(str.c_str(), nullptr);
}

std::optional<double> parse_double(std::string_view s) {
  if (s == "INF" || s == "+INF") return HUGE_VAL;
  if (s == "-INF") return -HUGE_VAL;
  if (s == "NaN") return std::nan("");
  static const std::regex re(R"([+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?)");
  std::string str(s);
  if (!std::regex_match(str, re)) return std::nullopt;
  return std::strtod(str.c_str(), nullptr);
}

std::optional<Num> numeric(const Value& v) {
  if (!v || !v->is_literal()) return std::nullopt;
  const std::string& dt = v->datatype();
  Num n{Num::integer};
  if (is_integer_type(dt)) {
    auto i = parse_integer(v->value());
    if (!i) return std::nullopt;
    n.i = *i;
  } else if (dt == xsd::decimal) {
    auto d = parse_decimal(v->value());
    if (!d) return std::nullopt;
    n.kind = Num::decimal;
    n.d = *d;
  } else if (dt == xsd::double_ || dt == xsd::float_) {
    auto d = parse_double(v->value());
    if (!d) return std::nullopt;
    n.kind = dt == xsd::double_ ? Num::double_ : Num::float_;
    n.d = *d;
  } else {
    return std::nullopt;
  }
  return n;
}

std::string format_double(double d) {
  if (std::isnan(d)) return "NaN";
  if (std::isinf(d)) return d > 0 ? "INF" : "-INF";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, res.ptr);
}

Term make_num(const Num& n) {
  switch (n.kind) {
    case Num::integer:
      return Term::literal(std::to_string(n.i), xsd::integer);
    case Num::decimal: {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, n.d, std::chars_format::fixed);
      std::string s(buf, res.ptr);
      if (s.find('.') == std::string::npos) s += ".0";
      return Term::literal(s, xsd::decimal);
    }
    case Num::float_:
      return Term::literal(format_double(n.d), xsd::float_);
    case Num::double_:
      return Term::literal(format_double(n.d), xsd::double_);
  }
  return Term::literal("0", xsd::integer);
}

Num promote(Num n, Num::Kind kind) {
  if (n.kind == Num::integer && kind != Num::integer) n.d = static_cast<double>(n.i);
  n.kind = std::max(n.kind, kind);
  return n;
}

std::optional<Num> arith(const std::string& op, Num a, Num b) {
  Num::Kind kind = std::max(a.kind, b.kind);
  if (op == "/" && kind == Num::integer) kind = Num::decimal;
  a = promote(a, kind);
  b = promote(b, kind);
  Num r{kind};
  if (kind == Num::integer) {
    long long out = 0;
    bool overflow = false;
    if (op == "+") overflow = __builtin_add_overflow(a.i, b.i, &out);
    if (op == "-") overflow = __builtin_sub_overflow(a.i, b.i, &out);
    if (op == "*") overflow = __builtin_mul_overflow(a.i, b.i, &out);
    if (overflow) return std::nullopt;
    r.i = out;
    return r;
  }
  if (op == "+") r.d = a.d + b.d;
  if (op == "-") r.d = a.d - b.d;
  if (op == "*") r.d = a.d * b.d;
  if (op == "/") {
    if (b.d == 0 && kind == Num::decimal) return std::nullopt;
    r.d = a.d / b.d;
  }
  return r;
}

// ---- strings --------------------------------------------------------------------

bool is_string_literal(const Term& t) {
  return t.is_literal() && (t.datatype() == xsd::string || t.datatype() == vocab::rdf::langString);
}

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 1;
    if (i + len > s.size()) len = 1;
    char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string utf8_encode(std::u32string_view s) {
  std::string out;
  for (char32_t c : s) syntax::append_utf8(out, c);
  return out;
}

/// Literal sharing the language tag (if any) of `like`.
Term string_like(std::string value, const Term& like) {
  if (!like.language().empty()) return Term::lang_literal(std::move(value), like.language());
  return Term::literal(std::move(value));
}

/// Argument compatibility for STRSTARTS and friends.
bool compatible(const Term& a, const Term& b) {
  return b.language().empty() || a.language() == b.language();
}

std::string ascii_lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// ---- comparison ------------------------------------------------------------------

std::optional<bool> ebv(const Value& v) {
  if (!v || !v->is_literal()) return std::nullopt;
  const std::string& dt = v->datatype();
  if (dt == xsd::boolean) {
    if (v->value() == "true" || v->value() == "1") return true;
    if (v->value() == "false" || v->value() == "0") return false;
    return false;
  }
  if (is_string_literal(*v)) return !v->value().empty();
  if (auto n = numeric(*v)) {
    if (n->kind == Num::integer) return n->i != 0;
    return !(n->d == 0 || std::isnan(n->d));
  }
  return std::nullopt;
}


/// Result of the `=` operator; nullopt on type error.
std::optional<bool> rdf_equal(const Term& a, const Term& b) {
  if (!a.is_literal() || !b.is_literal()) return a == b;
  auto na = numeric(a), nb = numeric(b);
  if (na && nb) {
    if (na->kind == Num::integer && nb->kind == Num::integer) return na->i == nb->i;
    return na->as_double() == nb->as_double();
  }
  if (a == b) return true;
  if (a.datatype() == xsd::boolean && b.datatype() == xsd::boolean) return ebv(a) == ebv(b);
  auto known = [](const Term& t) {
    return is_string_literal(t) || numeric(t) || t.datatype() == xsd::boolean || t.datatype() == xsd::dateTime ||
           t.datatype() == xsd::date || t.datatype() == xsd::gYear || t.datatype() == xsd::gYearMonth;
  };
  // Distinct literals of unrecognised datatypes may still denote the same value.
  if (!known(a) && !known(b)) return std::nullopt;
  return false;
}

/// Three-way compare for < > <= >=; nullopt when the operands are incomparable.
std::optional<int> value_compare(const Term& a, const Term& b) {
  if (!a.is_literal() || !b.is_literal()) return std::nullopt;
  auto na = numeric(a), nb = numeric(b);
  if (na && nb) {
    if (na->kind == Num::integer && nb->kind == Num::integer) return (na->i > nb->i) - (na->i < nb->i);
    double x = na->as_double(), y = nb->as_double();
    if (std::isnan(x) || std::isnan(y)) return std::nullopt;
    return (x > y) - (x < y);
  }
  bool sa = is_string_literal(a), sb = is_string_literal(b);
  if (sa && sb) {
    if (a.language() != b.language()) return std::nullopt;
    int c = a.value().compare(b.value());
    return (c > 0) - (c < 0);
  }
  if (a.datatype() == b.datatype() &&
      (a.datatype() == xsd::boolean || a.datatype() == xsd::dateTime || a.datatype() == xsd::date ||
       a.datatype() == xsd::gYear || a.datatype() == xsd::gYearMonth)) {
    // Fixed-width UTC lexical forms order the same way as their values.
    int c = a.value().compare(b.value());
    return (c > 0) - (c < 0);
  }
  return std::nullopt;
}

/// Total order used by ORDER BY, MIN and MAX.
int order_compare(const Value& a, const Value& b) {
  if (!a || !b) return static_cast<int>(a.has_value()) - static_cast<int>(b.has_value());
  auto rank = [](const Term& t) { return t.is_blank() ? 0 : t.is_iri() ? 1 : 2; };
  int ra = rank(*a), rb = rank(*b);
  if (ra != rb) return ra < rb ? -1 : 1;
  if (a->is_literal()) {
    auto na = numeric(*a), nb = numeric(*b);
    if (na && nb) {
      double x = na->as_double(), y = nb->as_double();
      if (na->kind == Num::integer && nb->kind == Num::integer) {
        if (na->i != nb->i) return na->i < nb->i ? -1 : 1;
      } else if (x != y && !std::isnan(x) && !std::isnan(y)) {
        return x < y ? -1 : 1;
      }
    } else if (na || nb) {
      return na ? -1 : 1;
    }
  }
  if (a->value() != b->value()) return a->value() < b->value() ? -1 : 1;
  if (a->datatype() != b->datatype()) return a->datatype() < b->datatype() ? -1 : 1;
  if (a->language() != b->language()) return a->language() < b->language() ? -1 : 1;
  return 0;
}

bool has_aggregate(const Expr& e) {
  if (e.kind == Expr::Kind::aggregate) return true;
  return std::any_of(e.args.begin(), e.args.end(), has_aggregate);
}

std::optional<Row> merge(const Row& a, const Row& b) {
  Row out = a;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (!b[i]) continue;
    if (out[i]) {
      if (*out[i] != *b[i]) return std::nullopt;
    } else {
      out[i] = b[i];
    }
  }
  return out;
}

// ---- evaluator --------------------------------------------------------------------

class Evaluator {
 public:
  Evaluator(const ParsedQuery& pq, const QuadSource& source)
      : pq_(pq), source_(source), width_(pq.var_names.size()) {}

  SelectResult run() {
    const Query& q = pq_.query;
    std::vector<std::size_t> slots;
    Rows rows = eval_query(q, slots);
    SelectResult result;
    if (q.form == Query::Form::ask) {
      if (!rows.empty()) result.rows.emplace_back();
      return result;
    }
    std::vector<std::size_t> kept;
    for (auto s : slots) {
      const std::string& name = pq_.var_names[s];
      if (name.rfind("_:", 0) == 0) continue;
      if (std::find(kept.begin(), kept.end(), s) != kept.end()) continue;
      kept.push_back(s);
      result.variables.push_back(name);
    }
    result.rows.reserve(rows.size());
    for (const auto& r : rows) {
      SelectResult::Row out;
      for (auto s : kept) {
        if (r[s]) out.emplace(pq_.var_names[s], *r[s]);
      }
      result.rows.push_back(std::move(out));
    }
    return result;
  }

 private:
  // -- query level --

  Rows eval_query(const Query& q, std::vector<std::size_t>& out_slots) {
    Rows rows = eval_group(q.where, Rows{Row(width_)}, nullptr);

    bool aggregated = !q.group_by.empty();
    for (const auto& p : q.projection) aggregated = aggregated || (p.expr && has_aggregate(*p.expr));
    for (const auto& h : q.having) aggregated = aggregated || has_aggregate(h);
    for (const auto& o : q.order_by) aggregated = aggregated || has_aggregate(o.expr);

    // Per output row, the solutions of its group (aggregate queries only).
    std::vector<std::vector<const Row*>> groups;
    Rows out;
    if (aggregated) {
      std::map<Row, std::size_t> index;
      if (q.group_by.empty()) {
        groups.emplace_back();
        out.emplace_back(width_);
        for (const auto& r : rows) groups[0].push_back(&r);
      } else {
        for (const auto& r : rows) {
          Row key;
          for (const auto& g : q.group_by) key.push_back(eval(g, r, nullptr, nullptr));
          auto [it, inserted] = index.emplace(key, groups.size());
          if (inserted) {
            groups.emplace_back();
            Row o(width_);
            for (std::size_t i = 0; i < q.group_by.size(); ++i) {
              if (q.group_by[i].kind == Expr::Kind::variable) o[q.group_by[i].slot] = key[i];
            }
            out.push_back(std::move(o));
          }
          groups[it->second].push_back(&r);
        }
      }
      for (std::size_t i = 0; i < out.size(); ++i) {
        for (const auto& p : q.projection) {
          if (p.expr) out[i][p.slot] = eval(*p.expr, out[i], nullptr, &groups[i]);
        }
      }
      if (!q.having.empty()) {
        Rows kept;
        std::vector<std::vector<const Row*>> kept_groups;
        for (std::size_t i = 0; i < out.size(); ++i) {
          bool ok = std::all_of(q.having.begin(), q.having.end(), [&](const Expr& h) {
            return ebv(eval(h, out[i], nullptr, &groups[i])).value_or(false);
          });
          if (ok) {
            kept.push_back(std::move(out[i]));
            kept_groups.push_back(std::move(groups[i]));
          }
        }
        out = std::move(kept);
        groups = std::move(kept_groups);
      }
    } else {
      out = std::move(rows);
      for (auto& r : out) {
        for (const auto& p : q.projection) {
          if (p.expr) r[p.slot] = eval(*p.expr, r, nullptr, nullptr);
        }
      }
    }

    if (!q.order_by.empty()) {
      std::vector<std::vector<Value>> keys(out.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        for (const auto& k : q.order_by) {
          keys[i].push_back(eval(k.expr, out[i], nullptr, aggregated ? &groups[i] : nullptr));
        }
      }
      std::vector<std::size_t> perm(out.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
      std::stable_sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) {
        for (std::size_t k = 0; k < q.order_by.size(); ++k) {
          int c = order_compare(keys[x][k], keys[y][k]);
          if (c != 0) return q.order_by[k].descending ? c > 0 : c < 0;
        }
        return false;
      });
      Rows sorted;
      sorted.reserve(out.size());
      for (auto i : perm) sorted.push_back(std::move(out[i]));
      out = std::move(sorted);
    }

    // Projection: clear everything outside the selected variables.
    out_slots.clear();
    if (q.select_all) {
      out_slots = q.visible;
    } else {
      for (const auto& p : q.projection) out_slots.push_back(p.slot);
    }
    std::vector<char> keep(width_, 0);
    for (auto s : out_slots) keep[s] = 1;
    for (auto& r : out) {
      for (std::size_t i = 0; i < width_; ++i) {
        if (!keep[i]) r[i].reset();
      }
    }

    if (q.distinct) {
      std::set<Row> seen;
      Rows unique;
      for (auto& r : out) {
        if (seen.insert(r).second) unique.push_back(std::move(r));
      }
      out = std::move(unique);
    }

    std::size_t begin = std::min(q.offset, out.size());
    std::size_t end = q.limit ? std::min(out.size(), begin + *q.limit) : out.size();
    if (begin != 0 || end != out.size()) {
      out = Rows(std::make_move_iterator(out.begin() + begin), std::make_move_iterator(out.begin() + end));
    }
    return out;
  }

  // -- group patterns --

  Rows eval_group(const GroupPattern& g, Rows rows, const Term* graph) {
    std::vector<const Expr*> filters;
    for (const auto& e : g.elements) {
      if (rows.empty() && e.kind != Element::Kind::filter) break;
      switch (e.kind) {
        case Element::Kind::triples: {
          Rows next;
          for (auto& r : rows) bgp(e.triples, r, graph, next);
          rows = std::move(next);
          break;
        }
        case Element::Kind::filter:
          filters.push_back(&e.expr);
          break;
        case Element::Kind::optional: {
          Rows next;
          for (auto& r : rows) {
            Rows ext = eval_group(e.groups[0], Rows{r}, graph);
            if (ext.empty()) {
              next.push_back(std::move(r));
            } else {
              for (auto& x : ext) next.push_back(std::move(x));
            }
          }
          rows = std::move(next);
          break;
        }
        case Element::Kind::minus: {
          Rows right = eval_group(e.groups[0], Rows{Row(width_)}, graph);
          Rows next;
          for (auto& r : rows) {
            bool removed = std::any_of(right.begin(), right.end(), [&](const Row& m) {
              bool shared = false;
              for (std::size_t i = 0; i < width_; ++i) {
                if (r[i] && m[i]) {
                  if (*r[i] != *m[i]) return false;
                  shared = true;
                }
              }
              return shared;
            });
            if (!removed) next.push_back(std::move(r));
          }
          rows = std::move(next);
          break;
        }
        case Element::Kind::union_: {
          Rows next;
          for (const auto& branch : e.groups) {
            Rows part = eval_group(branch, rows, graph);
            for (auto& x : part) next.push_back(std::move(x));
          }
          rows = std::move(next);
          break;
        }
        case Element::Kind::bind:
          for (auto& r : rows) r[e.slot] = eval(e.expr, r, graph, nullptr);
          break;
        case Element::Kind::graph:
          rows = eval_graph(e, std::move(rows));
          break;
        case Element::Kind::subquery: {
          const Rows& sub = subquery_rows(*e.subquery, graph);
          rows = join(rows, sub);
          break;
        }
        case Element::Kind::group:
          rows = eval_group(e.groups[0], std::move(rows), graph);
          break;
        case Element::Kind::values: {
          Rows table;
          for (const auto& vr : e.value_rows) {
            Row r(width_);
            for (std::size_t i = 0; i < vr.size(); ++i) r[e.value_slots[i]] = vr[i];
            table.push_back(std::move(r));
          }
          rows = join(rows, table);
          break;
        }
      }
    }
    if (!filters.empty()) {
      Rows kept;
      for (auto& r : rows) {
        bool ok = std::all_of(filters.begin(), filters.end(), [&](const Expr* f) {
          return ebv(eval(*f, r, graph, nullptr)).value_or(false);
        });
        if (ok) kept.push_back(std::move(r));
      }
      rows = std::move(kept);
    }
    return rows;
  }

  Rows join(const Rows& left, const Rows& right) {
    Rows out;
    for (const auto& l : left) {
      for (const auto& r : right) {
        if (auto m = merge(l, r)) out.push_back(std::move(*m));
      }
    }
    return out;
  }

  Rows eval_graph(const Element& e, Rows rows) {
    if (const Term* iri = std::get_if<Term>(&*e.graph_name)) {
      return eval_group(e.groups[0], std::move(rows), iri);
    }
    std::size_t slot = std::get<Var>(*e.graph_name).slot;
    if (!named_graphs_) named_graphs_ = source_.named_graphs();
    Rows out;
    for (auto& r : rows) {
      if (r[slot]) {
        Term g = *r[slot];
        if (!g.is_iri()) continue;
        for (auto& x : eval_group(e.groups[0], Rows{r}, &g)) out.push_back(std::move(x));
        continue;
      }
      for (const Term& g : *named_graphs_) {
        Row seeded = r;
        seeded[slot] = g;
        for (auto& x : eval_group(e.groups[0], Rows{std::move(seeded)}, &g)) out.push_back(std::move(x));
      }
    }
    return out;
  }

  const Rows& subquery_rows(const Query& q, const Term* graph) {
    auto key = std::make_pair(&q, graph ? std::optional<Term>(*graph) : std::nullopt);
    auto it = subquery_cache_.find(key);
    if (it != subquery_cache_.end()) return it->second;
    std::vector<std::size_t> slots;
    Rows rows;
    if (graph) {
      // A sub-select nested in GRAPH reads that graph.
      Query copy = q;
      GroupPattern wrapped;
      Element ge;
      ge.kind = Element::Kind::graph;
      ge.graph_name = *graph;
      ge.groups.push_back(q.where);
      wrapped.elements.push_back(std::move(ge));
      copy.where = std::move(wrapped);
      rows = eval_query(copy, slots);
    } else {
      rows = eval_query(q, slots);
    }
    return subquery_cache_.emplace(key, std::move(rows)).first->second;
  }

  // -- basic graph patterns --

  const Term* resolve(const TermOrVar& tv, const Row& row) const {
    if (const Term* t = std::get_if<Term>(&tv)) return t;
    const auto& slot = row[std::get<Var>(tv).slot];
    return slot ? &*slot : nullptr;
  }

  static int boundness(const TriplePattern& p, const Row& row) {
    auto bound = [&](const TermOrVar& tv) {
      if (std::holds_alternative<Term>(tv)) return true;
      return row[std::get<Var>(tv).slot].has_value();
    };
    int score = 0;
    if (bound(p.subject)) score += 4;
    if (bound(p.object)) score += 3;
    if (const Var* v = std::get_if<Var>(&p.predicate)) {
      if (row[v->slot]) score += 1;
    } else if (std::get<Path>(p.predicate).kind == Path::Kind::link) {
      score += 2;
    } else {
      score -= 1;
    }
    return score;
  }

  void bgp(const std::vector<TriplePattern>& pats, Row& row, const Term* graph, Rows& out) {
    std::vector<char> done(pats.size(), 0);
    bgp_step(pats, done, pats.size(), row, graph, out);
  }

  /// Binds `tv` to `value` in `row`; records newly bound slots in `bound`.
  static bool bind_term(const TermOrVar& tv, const Term& value, Row& row, std::vector<std::size_t>& bound) {
    if (const Term* t = std::get_if<Term>(&tv)) return *t == value;
    std::size_t slot = std::get<Var>(tv).slot;
    if (row[slot]) return *row[slot] == value;
    row[slot] = value;
    bound.push_back(slot);
    return true;
  }

  void bgp_step(const std::vector<TriplePattern>& pats, std::vector<char>& done, std::size_t remaining,
                Row& row, const Term* graph, Rows& out) {
    if (remaining == 0) {
      out.push_back(row);
      return;
    }
    std::size_t best = pats.size();
    int best_score = -100;
    for (std::size_t i = 0; i < pats.size(); ++i) {
      if (done[i]) continue;
      int s = boundness(pats[i], row);
      if (s > best_score) {
        best = i;
        best_score = s;
      }
    }
    const TriplePattern& p = pats[best];
    done[best] = 1;

    // Copies: the row is mutated while these are in use.
    Value s = row_value(p.subject, row);
    Value o = row_value(p.object, row);

    auto emit = [&](const Term& sv, const Term& ov, const Var* pvar, const Term* pv) {
      std::vector<std::size_t> bound;
      bool ok = bind_term(p.subject, sv, row, bound) && bind_term(p.object, ov, row, bound);
      if (ok && pvar) ok = bind_term(*pvar, *pv, row, bound);
      if (ok) bgp_step(pats, done, remaining - 1, row, graph, out);
      for (auto slot : bound) row[slot].reset();
    };

    if (const Var* pvar = std::get_if<Var>(&p.predicate)) {
      Value pv = row[pvar->slot];
      source_.match(s ? &*s : nullptr, pv ? &*pv : nullptr, o ? &*o : nullptr, graph,
                    [&](const Term& ms, const Term& mp, const Term& mo) { emit(ms, mo, pvar, &mp); });
    } else {
      const Path& path = std::get<Path>(p.predicate);
      if (path.kind == Path::Kind::link) {
        source_.match(s ? &*s : nullptr, &*path.iri, o ? &*o : nullptr, graph,
                      [&](const Term& ms, const Term&, const Term& mo) { emit(ms, mo, nullptr, nullptr); });
      } else {
        for (const auto& [a, b] : path_pairs(path, s, o, graph)) emit(a, b, nullptr, nullptr);
      }
    }
    done[best] = 0;
  }

  static Value row_value(const TermOrVar& tv, const Row& row) {
    if (const Term* t = std::get_if<Term>(&tv)) return *t;
    return row[std::get<Var>(tv).slot];
  }

  // -- property paths --

  using Pairs = std::vector<std::pair<Term, Term>>;

  Pairs path_pairs(const Path& path, const Value& s, const Value& o, const Term* graph) {
    Pairs out;
    switch (path.kind) {
      case Path::Kind::link:
        source_.match(s ? &*s : nullptr, &*path.iri, o ? &*o : nullptr, graph,
                      [&](const Term& a, const Term&, const Term& b) { out.emplace_back(a, b); });
        break;
      case Path::Kind::inverse:
        for (auto& [a, b] : path_pairs(path.parts[0], o, s, graph)) out.emplace_back(std::move(b), std::move(a));
        break;
      case Path::Kind::alternative:
        for (const auto& part : path.parts) {
          for (auto& pr : path_pairs(part, s, o, graph)) out.push_back(std::move(pr));
        }
        break;
      case Path::Kind::sequence:
        out = sequence_pairs(path.parts, 0, s, o, graph);
        break;
      case Path::Kind::zero_or_one: {
        std::set<std::pair<Term, Term>> seen;
        for (const auto& n : zero_length(s, o, graph)) seen.emplace(n, n);
        for (auto& pr : path_pairs(path.parts[0], s, o, graph)) seen.insert(std::move(pr));
        out.assign(seen.begin(), seen.end());
        break;
      }
      case Path::Kind::zero_or_more:
      case Path::Kind::one_or_more: {
        bool reflexive = path.kind == Path::Kind::zero_or_more;
        std::set<std::pair<Term, Term>> seen;
        if (s) {
          for (const auto& n : closure(path.parts[0], *s, true, reflexive, graph)) {
            if (!o || n == *o) seen.emplace(*s, n);
          }
        } else if (o) {
          for (const auto& n : closure(path.parts[0], *o, false, reflexive, graph)) seen.emplace(n, *o);
        } else {
          for (const auto& start : all_nodes(graph)) {
            for (const auto& n : closure(path.parts[0], start, true, reflexive, graph)) seen.emplace(start, n);
          }
        }
        out.assign(seen.begin(), seen.end());
        break;
      }
    }
    return out;
  }

  Pairs sequence_pairs(const std::vector<Path>& parts, std::size_t i, const Value& s, const Value& o,
                       const Term* graph) {
    bool last = i + 1 == parts.size();
    Pairs out;
    for (auto& [a, b] : path_pairs(parts[i], s, last ? o : std::nullopt, graph)) {
      if (last) {
        out.emplace_back(std::move(a), std::move(b));
        continue;
      }
      for (auto& [_, c] : sequence_pairs(parts, i + 1, b, o, graph)) out.emplace_back(a, std::move(c));
    }
    return out;
  }

  std::vector<Term> zero_length(const Value& s, const Value& o, const Term* graph) {
    if (s && o) return *s == *o ? std::vector<Term>{*s} : std::vector<Term>{};
    if (s) return {*s};
    if (o) return {*o};
    return all_nodes(graph);
  }

  std::vector<Term> all_nodes(const Term* graph) {
    std::set<Term> nodes;
    source_.match(nullptr, nullptr, nullptr, graph, [&](const Term& a, const Term&, const Term& b) {
      nodes.insert(a);
      nodes.insert(b);
    });
    return {nodes.begin(), nodes.end()};
  }

  std::vector<Term> closure(const Path& step, const Term& start, bool forward, bool reflexive,
                            const Term* graph) {
    std::unordered_set<Term> visited;
    std::vector<Term> result;
    std::vector<Term> frontier{start};
    if (reflexive) {
      visited.insert(start);
      result.push_back(start);
    }
    while (!frontier.empty()) {
      Term node = std::move(frontier.back());
      frontier.pop_back();
      Pairs next = forward ? path_pairs(step, node, std::nullopt, graph) : path_pairs(step, std::nullopt, node, graph);
      for (auto& [a, b] : next) {
        Term& reached = forward ? b : a;
        if (visited.insert(reached).second) {
          result.push_back(reached);
          frontier.push_back(std::move(reached));
        }
      }
    }
    return result;
  }

  // -- expressions --

  Value eval(const Expr& e, const Row& row, const Term* graph, const std::vector<const Row*>* group) {
    switch (e.kind) {
      case Expr::Kind::constant:
        return e.constant;
      case Expr::Kind::variable:
        return row[e.slot];
      case Expr::Kind::unary: {
        Value v = eval(e.args[0], row, graph, group);
        if (e.op == "!") {
          auto b = ebv(v);
          if (!b) return std::nullopt;
          return boolean(!*b);
        }
        auto n = numeric(v);
        if (!n) return std::nullopt;
        if (e.op == "-") {
          if (n->kind == Num::integer) {
            n->i = -n->i;
          } else {
            n->d = -n->d;
          }
        }
        return make_num(*n);
      }
      case Expr::Kind::binary:
        return eval_binary(e, row, graph, group);
      case Expr::Kind::in: {
        Value needle = eval(e.args[0], row, graph, group);
        if (!needle) return std::nullopt;
        bool error = false;
        for (std::size_t i = 1; i < e.args.size(); ++i) {
          Value v = eval(e.args[i], row, graph, group);
          if (!v) {
            error = true;
            continue;
          }
          auto eq = rdf_equal(*needle, *v);
          if (!eq) {
            error = true;
          } else if (*eq) {
            return boolean(!e.negated);
          }
        }
        if (error) return std::nullopt;
        return boolean(e.negated);
      }
      case Expr::Kind::exists: {
        bool found = !eval_group(*e.pattern, Rows{row}, graph).empty();
        return boolean(found != e.negated);
      }
      case Expr::Kind::aggregate:
        if (!group) return std::nullopt;
        return aggregate(e, *group, graph);
      case Expr::Kind::call:
        return call(e, row, graph, group);
    }
    return std::nullopt;
  }

  Value eval_binary(const Expr& e, const Row& row, const Term* graph, const std::vector<const Row*>* group) {
    const std::string& op = e.op;
    if (op == "||" || op == "&&") {
      auto l = ebv(eval(e.args[0], row, graph, group));
      bool is_or = op == "||";
      if (l && *l == is_or) return boolean(is_or);
      auto r = ebv(eval(e.args[1], row, graph, group));
      if (r && *r == is_or) return boolean(is_or);
      if (l && r) return boolean(!is_or);
      return std::nullopt;
    }
    Value l = eval(e.args[0], row, graph, group);
    Value r = eval(e.args[1], row, graph, group);
    if (!l || !r) return std::nullopt;
    if (op == "=" || op == "!=") {
      auto eq = rdf_equal(*l, *r);
      if (!eq) return std::nullopt;
      return boolean(*eq == (op == "="));
    }
    if (op == "<" || op == ">" || op == "<=" || op == ">=") {
      auto c = value_compare(*l, *r);
      if (!c) return std::nullopt;
      if (op == "<") return boolean(*c < 0);
      if (op == ">") return boolean(*c > 0);
      if (op == "<=") return boolean(*c <= 0);
      return boolean(*c >= 0);
    }
    auto a = numeric(l), b = numeric(r);
    if (!a || !b) return std::nullopt;
    auto res = arith(op, *a, *b);
    if (!res) return std::nullopt;
    return make_num(*res);
  }

  Value aggregate(const Expr& e, const std::vector<const Row*>& rows, const Term* graph) {
    if (e.count_star) {
      if (!e.distinct) return Term::literal(std::to_string(rows.size()), xsd::integer);
      std::set<Row> distinct;
      for (const Row* r : rows) distinct.insert(*r);
      return Term::literal(std::to_string(distinct.size()), xsd::integer);
    }
    std::vector<Value> values;
    std::set<Term> seen;
    bool error = false;
    for (const Row* r : rows) {
      Value v = eval(e.args[0], *r, graph, nullptr);
      if (!v) {
        error = true;
        continue;
      }
      if (e.distinct && !seen.insert(*v).second) continue;
      values.push_back(std::move(v));
    }
    const std::string& fn = e.op;
    if (fn == "COUNT") return Term::literal(std::to_string(values.size()), xsd::integer);
    if (fn == "SUM") {
      if (error) return std::nullopt;
      Num total{Num::integer};
      for (const auto& v : values) {
        auto n = numeric(v);
        if (!n) return std::nullopt;
        auto s = arith("+", total, *n);
        if (!s) return std::nullopt;
        total = *s;
      }
      return make_num(total);
    }
    // The remaining aggregates are unbound over an empty group.
    if (rows.empty()) return std::nullopt;
    if (fn == "AVG") {
      if (error || values.empty()) return std::nullopt;
      Num total{Num::integer};
      for (const auto& v : values) {
        auto n = numeric(v);
        if (!n) return std::nullopt;
        total = *arith("+", total, *n);
      }
      Num count{Num::integer};
      count.i = static_cast<long long>(values.size());
      auto avg = arith("/", total, count);
      if (!avg) return std::nullopt;
      return make_num(*avg);
    }
    if (fn == "MIN" || fn == "MAX") {
      if (values.empty()) return std::nullopt;
      bool want_min = fn == "MIN";
      Value best = values[0];
      for (const auto& v : values) {
        int c = order_compare(v, best);
        if (want_min ? c < 0 : c > 0) best = v;
      }
      return best;
    }
    if (fn == "SAMPLE") {
      if (values.empty()) return std::nullopt;
      return values[0];
    }
    if (fn == "GROUP_CONCAT") {
      if (error) return std::nullopt;
      std::string out;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += e.separator;
        if (values[i]->is_blank()) return std::nullopt;
        out += values[i]->value();
      }
      return Term::literal(std::move(out));
    }
    return std::nullopt;
  }

  const std::regex& compiled(const std::string& pattern, const std::string& flags) {
    auto key = pattern + '\x01' + flags;
    auto it = regex_cache_.find(key);
    if (it != regex_cache_.end()) return it->second;
    auto options = std::regex::ECMAScript;
    if (flags.find('i') != std::string::npos) options |= std::regex::icase;
    return regex_cache_.emplace(key, std::regex(pattern, options)).first->second;
  }

  Value call(const Expr& e, const Row& row, const Term* graph, const std::vector<const Row*>* group) {
    const std::string& fn = e.op;
    auto arg = [&](std::size_t i) -> Value {
      if (i >= e.args.size()) return std::nullopt;
      return eval(e.args[i], row, graph, group);
    };
    auto nargs = e.args.size();

    // Functions with lazy argument evaluation first.
    if (fn == "BOUND") return boolean(row[e.args[0].slot].has_value());
    if (fn == "IF") {
      if (nargs != 3) return std::nullopt;
      auto c = ebv(arg(0));
      if (!c) return std::nullopt;
      return arg(*c ? 1 : 2);
    }
    if (fn == "COALESCE") {
      for (std::size_t i = 0; i < nargs; ++i) {
        if (Value v = arg(i)) return v;
      }
      return std::nullopt;
    }

    std::vector<Value> a;
    a.reserve(nargs);
    for (std::size_t i = 0; i < nargs; ++i) a.push_back(arg(i));
    auto all_bound = std::all_of(a.begin(), a.end(), [](const Value& v) { return v.has_value(); });
    if (!all_bound) return std::nullopt;

    try {
      return call_strict(fn, a);
    } catch (const std::regex_error&) {
      return std::nullopt;
    }
  }

  Value call_strict(const std::string& fn, const std::vector<Value>& a) {
    auto n = a.size();
    auto str_arg = [&](std::size_t i) -> const Term* {
      if (i >= n || !is_string_literal(*a[i])) return nullptr;
      return &*a[i];
    };

    if (fn == "STR") {
      if (n != 1 || a[0]->is_blank()) return std::nullopt;
      return Term::literal(a[0]->value());
    }
    if (fn == "LANG") {
      if (n != 1 || !a[0]->is_literal()) return std::nullopt;
      return Term::literal(a[0]->language());
    }
    if (fn == "DATATYPE") {
      if (n != 1 || !a[0]->is_literal()) return std::nullopt;
      return Term::iri(a[0]->datatype());
    }
    if (fn == "IRI" || fn == "URI") {
      if (n != 1) return std::nullopt;
      if (a[0]->is_iri()) return a[0];
      if (!is_string_literal(*a[0]) || !is_absolute_iri(a[0]->value())) return std::nullopt;
      return Term::iri(a[0]->value());
    }
    if (fn == "ISIRI" || fn == "ISURI") return boolean(a[0]->is_iri());
    if (fn == "ISBLANK") return boolean(a[0]->is_blank());
    if (fn == "ISLITERAL") return boolean(a[0]->is_literal());
    if (fn == "ISNUMERIC") return boolean(numeric(a[0]).has_value());
    if (fn == "SAMETERM") {
      if (n != 2) return std::nullopt;
      return boolean(*a[0] == *a[1]);
    }
    if (fn == "LANGMATCHES") {
      const Term *tag = str_arg(0), *range = str_arg(1);
      if (!tag || !range) return std::nullopt;
      std::string t = ascii_lower(tag->value()), r = ascii_lower(range->value());
      if (r == "*") return boolean(!t.empty());
      return boolean(t == r || (t.size() > r.size() && t.compare(0, r.size(), r) == 0 && t[r.size()] == '-'));
    }
    if (fn == "STRLEN") {
      const Term* s = str_arg(0);
      if (!s) return std::nullopt;
      return Term::literal(std::to_string(utf8_decode(s->value()).size()), xsd::integer);
    }
    if (fn == "UCASE" || fn == "LCASE") {
      const Term* s = str_arg(0);
      if (!s) return std::nullopt;
      std::string v = s->value();
      for (auto& c : v) {
        auto uc = static_cast<unsigned char>(c);
        if (uc < 0x80) c = static_cast<char>(fn == "UCASE" ? std::toupper(uc) : std::tolower(uc));
      }
      return string_like(std::move(v), *s);
    }
    if (fn == "SUBSTR") {
      const Term* s = str_arg(0);
      if (!s || n < 2) return std::nullopt;
      auto start = numeric(a[1]);
      if (!start) return std::nullopt;
      std::u32string cps = utf8_decode(s->value());
      // 1-based, rounded, clipped to the string.
      double from = std::round(start->as_double());
      double to = static_cast<double>(cps.size()) + 1;
      if (n >= 3) {
        auto len = numeric(a[2]);
        if (!len) return std::nullopt;
        to = from + std::round(len->as_double());
      }
      double lo = std::max(from, 1.0), hi = std::min(to, static_cast<double>(cps.size()) + 1);
      if (!(hi > lo)) return string_like("", *s);
      auto b = static_cast<std::size_t>(lo) - 1, len = static_cast<std::size_t>(hi - lo);
      return string_like(utf8_encode(std::u32string_view(cps).substr(b, len)), *s);
    }
    if (fn == "CONTAINS" || fn == "STRSTARTS" || fn == "STRENDS" || fn == "STRBEFORE" || fn == "STRAFTER") {
      const Term *x = str_arg(0), *y = str_arg(1);
      if (!x || !y || !compatible(*x, *y)) return std::nullopt;
      const std::string &hay = x->value(), &needle = y->value();
      if (fn == "CONTAINS") return boolean(hay.find(needle) != std::string::npos);
      if (fn == "STRSTARTS") return boolean(hay.compare(0, needle.size(), needle) == 0 && hay.size() >= needle.size());
      if (fn == "STRENDS") {
        return boolean(hay.size() >= needle.size() && hay.compare(hay.size() - needle.size(), needle.size(), needle) == 0);
      }
      auto pos = hay.find(needle);
      if (pos == std::string::npos) return Term::literal("");
      if (fn == "STRBEFORE") return needle.empty() ? Term::literal("") : string_like(hay.substr(0, pos), *x);
      return string_like(hay.substr(pos + needle.size()), *x);
    }
    if (fn == "CONCAT") {
      std::string out;
      std::optional<std::string> lang;
      bool first = true;
      for (const auto& v : a) {
        if (!is_string_literal(*v)) return std::nullopt;
        out += v->value();
        if (first) {
          lang = v->language();
        } else if (lang && *lang != v->language()) {
          lang.reset();
        }
        first = false;
      }
      if (lang && !lang->empty()) return Term::lang_literal(std::move(out), *lang);
      return Term::literal(std::move(out));
    }
    if (fn == "ENCODE_FOR_URI") {
      const Term* s = str_arg(0);
      if (!s) return std::nullopt;
      std::string out;
      static const char* hex = "0123456789ABCDEF";
      for (unsigned char c : s->value()) {
        if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
          out += static_cast<char>(c);
        } else {
          out += '%';
          out += hex[c >> 4];
          out += hex[c & 0xF];
        }
      }
      return Term::literal(std::move(out));
    }
    if (fn == "REGEX") {
      const Term *s = str_arg(0), *p = str_arg(1);
      if (!s || !p) return std::nullopt;
      std::string flags;
      if (n >= 3) {
        const Term* f = str_arg(2);
        if (!f) return std::nullopt;
        flags = f->value();
      }
      return boolean(std::regex_search(s->value(), compiled(p->value(), flags)));
    }
    if (fn == "REPLACE") {
      const Term *s = str_arg(0), *p = str_arg(1), *r = str_arg(2);
      if (!s || !p || !r) return std::nullopt;
      std::string flags;
      if (n >= 4) {
        const Term* f = str_arg(3);
        if (!f) return std::nullopt;
        flags = f->value();
      }
      return string_like(std::regex_replace(s->value(), compiled(p->value(), flags), r->value()), *s);
    }
    if (fn == "STRLANG") {
      const Term *s = str_arg(0), *l = str_arg(1);
      if (!s || !l || !s->language().empty() || !is_valid_language_tag(l->value())) return std::nullopt;
      return Term::lang_literal(s->value(), l->value());
    }
    if (fn == "STRDT") {
      const Term* s = str_arg(0);
      if (!s || !s->language().empty() || n < 2 || !a[1]->is_iri()) return std::nullopt;
      return Term::literal(s->value(), a[1]->value());
    }
    if (fn == "ABS" || fn == "CEIL" || fn == "FLOOR" || fn == "ROUND") {
      auto v = numeric(a[0]);
      if (!v) return std::nullopt;
      if (v->kind == Num::integer) {
        if (fn == "ABS") v->i = v->i < 0 ? -v->i : v->i;
        return make_num(*v);
      }
      if (fn == "ABS") v->d = std::fabs(v->d);
      if (fn == "CEIL") v->d = std::ceil(v->d);
      if (fn == "FLOOR") v->d = std::floor(v->d);
      if (fn == "ROUND") v->d = std::floor(v->d + 0.5);
      return make_num(*v);
    }
    if (fn == "YEAR" || fn == "MONTH" || fn == "DAY") {
      if (!a[0]->is_literal() || (a[0]->datatype() != xsd::dateTime && a[0]->datatype() != xsd::date)) {
        return std::nullopt;
      }
      static const std::regex re(R"((-?[0-9]{4,})-([0-9]{2})-([0-9]{2}).*)");
      std::smatch m;
      const std::string& lex = a[0]->value();
      if (!std::regex_match(lex, m, re)) return std::nullopt;
      std::size_t idx = fn == "YEAR" ? 1 : fn == "MONTH" ? 2 : 3;
      auto v = parse_integer(m[idx].str());
      if (!v) return std::nullopt;
      return Term::literal(std::to_string(*v), xsd::integer);
    }
    return cast(fn, a);
  }

  static Value cast(const std::string& fn, const std::vector<Value>& a) {
    if (a.size() != 1) return std::nullopt;
    const Term& v = *a[0];
    if (fn == xsd::string) {
      if (v.is_blank()) return std::nullopt;
      return Term::literal(v.value());
    }
    if (!v.is_literal()) return std::nullopt;
    auto num = numeric(v);
    bool from_string = is_string_literal(v) && v.language().empty();
    if (fn == xsd::boolean) {
      if (num) return boolean(num->kind == Num::integer ? num->i != 0 : num->d != 0 && !std::isnan(num->d));
      if (v.datatype() == xsd::boolean || from_string) {
        if (v.value() == "true" || v.value() == "1") return true_term();
        if (v.value() == "false" || v.value() == "0") return false_term();
      }
      return std::nullopt;
    }
    if (fn == xsd::integer || fn == xsd::decimal || fn == xsd::double_ || fn == xsd::float_) {
      Num out{Num::integer};
      if (num) {
        out = *num;
      } else if (v.datatype() == xsd::boolean) {
        out.i = v.value() == "true" || v.value() == "1";
      } else if (from_string) {
        if (fn == xsd::integer) {
          auto i = parse_integer(v.value());
          if (!i) return std::nullopt;
          out.i = *i;
        } else if (fn == xsd::decimal) {
          auto d = parse_decimal(v.value());
          if (!d) return std::nullopt;
          out.kind = Num::decimal;
          out.d = *d;
        } else {
          auto d = parse_double(v.value());
          if (!d) return std::nullopt;
          out.kind = Num::double_;
          out.d = *d;
        }
      } else {
        return std::nullopt;
      }
      if (fn == xsd::integer) {
        if (out.kind != Num::integer) {
          if (!std::isfinite(out.d)) return std::nullopt;
          out.i = static_cast<long long>(std::trunc(out.d));
          out.kind = Num::integer;
        }
        return make_num(out);
      }
      Num::Kind target = fn == xsd::decimal ? Num::decimal : fn == xsd::float_ ? Num::float_ : Num::double_;
      if (out.kind == Num::integer) out.d = static_cast<double>(out.i);
      if (target == Num::decimal && !std::isfinite(out.d)) return std::nullopt;
      out.kind = target;
      return make_num(out);
    }
    return std::nullopt;
  }

  const ParsedQuery& pq_;
  const QuadSource& source_;
  std::size_t width_;
  std::optional<std::vector<Term>> named_graphs_;
  std::map<std::pair<const Query*, std::optional<Term>>, Rows> subquery_cache_;
  std::map<std::string, std::regex> regex_cache_;
};

}  // namespace

SelectResult evaluate(const ParsedQuery& query, const QuadSource& source) {
  return Evaluator(query, source).run();
}

}  // namespace vrdf::sparql
