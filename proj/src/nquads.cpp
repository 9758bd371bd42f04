#include <algorithm>
#include <tuple>
#include <vector>

#include "lexer.hpp"
#include "vrdf/error.hpp"
#include "vrdf/rdf_io.hpp"

namespace vrdf {

using syntax::Tok;
using syntax::Token;
using syntax::TokenStream;

namespace {

Term make_iri(const Token& t, const TokenStream& ts) {
  try {
    return Term::iri(t.text);
  } catch (const InvalidTerm& e) {
    ts.fail(e.what(), t);
  }
}

Term read_term(TokenStream& ts, bool allow_literal) {
  Token t = ts.next();
  switch (t.kind) {
    case Tok::iri:
      return make_iri(t, ts);
    case Tok::blank:
      return Term::blank(t.text);
    case Tok::string: {
      if (!allow_literal) ts.fail("literal not allowed here", t);
      if (t.long_string) ts.fail("long string literals are not N-Quads", t);
      try {
        if (ts.peek().kind == Tok::langtag) return Term::lang_literal(t.text, ts.next().text);
        if (ts.accept_punct("^^")) {
          Token dt = ts.next();
          if (dt.kind != Tok::iri) ts.fail("expected datatype IRI", dt);
          return Term::literal(t.text, dt.text);
        }
        return Term::literal(t.text);
      } catch (const InvalidTerm& e) {
        ts.fail(e.what(), t);
      }
    }
    default:
      ts.fail("unexpected " + syntax::describe(t), t);
  }
}

}  // namespace

QuadSet parse_nquads(std::string_view text) {
  TokenStream ts(text);
  QuadSet out;
  while (!ts.at_end()) {
    const Token& first = ts.peek();
    std::size_t line = first.line;
    Term s = read_term(ts, false);
    Token pt = ts.peek();
    if (pt.kind != Tok::iri) ts.fail("predicate must be an IRI", pt);
    Term p = read_term(ts, false);
    Term o = read_term(ts, true);
    std::optional<Term> g;
    if (!ts.peek().is_punct(".")) {
      Token gt = ts.peek();
      if (gt.kind != Tok::iri) ts.fail("graph label must be an IRI", gt);
      g = read_term(ts, false);
    }
    Token dot = ts.peek();
    if (!dot.is_punct(".")) ts.fail("expected '.' at end of statement", dot);
    if (dot.line != line) ts.fail("statement spans several lines", dot);
    ts.next();
    out.emplace(std::move(s), std::move(p), std::move(o), std::move(g));
  }
  return out;
}

std::string serialize_nquads(const QuadSet& quads) {
  struct Line {
    std::string graph, subject, predicate, object;
  };
  std::vector<Line> lines;
  lines.reserve(quads.size());
  for (const auto& q : quads) {
    lines.push_back({q.graph ? q.graph->to_string() : std::string(), q.subject.to_string(),
                     q.predicate.to_string(), q.object.to_string()});
  }
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return std::tie(a.graph, a.subject, a.predicate, a.object) <
           std::tie(b.graph, b.subject, b.predicate, b.object);
  });
  std::string out;
  for (const auto& l : lines) {
    out += l.subject;
    out += ' ';
    out += l.predicate;
    out += ' ';
    out += l.object;
    if (!l.graph.empty()) {
      out += ' ';
      out += l.graph;
    }
    out += " .\n";
  }
  return out;
}

}  // namespace vrdf
