#include <map>

#include "lexer.hpp"
#include "vrdf/error.hpp"
#include "vrdf/rdf_io.hpp"
#include "vrdf/vocab.hpp"

namespace vrdf {

using syntax::Tok;
using syntax::Token;
using syntax::TokenStream;

namespace {

class TurtleParser {
 public:
  TurtleParser(std::string_view text, std::string_view base) : ts_(text), base_(base) {}

  QuadSet run() {
    while (!ts_.at_end()) statement();
    return std::move(out_);
  }

 private:
  void statement() {
    const Token& t = ts_.peek();
    if (t.kind == Tok::langtag && (t.text == "prefix" || t.text == "base")) {
      bool is_prefix = t.text == "prefix";
      ts_.next();
      is_prefix ? prefix_decl() : base_decl();
      ts_.expect_punct(".");
      return;
    }
    if (t.is_keyword("PREFIX")) {
      ts_.next();
      prefix_decl();
      return;
    }
    if (t.is_keyword("BASE")) {
      ts_.next();
      base_decl();
      return;
    }
    triples();
    ts_.expect_punct(".");
  }

  void prefix_decl() {
    Token p = ts_.next();
    if (p.kind != Tok::pname || p.text.back() != ':' || p.text.find(':') != p.text.size() - 1) {
      ts_.fail("expected prefix name", p);
    }
    Token iri = ts_.next();
    if (iri.kind != Tok::iri) ts_.fail("expected IRI in prefix declaration", iri);
    prefixes_[p.text.substr(0, p.text.size() - 1)] = syntax::resolve_iri(base_, iri.text);
  }

  void base_decl() {
    Token iri = ts_.next();
    if (iri.kind != Tok::iri) ts_.fail("expected IRI in base declaration", iri);
    base_ = syntax::resolve_iri(base_, iri.text);
  }

  void triples() {
    if (ts_.peek().is_punct("[")) {
      Term subject = blank_node_property_list();
      if (!ts_.peek().is_punct(".")) predicate_object_list(subject);
      return;
    }
    Term subject = subject_term();
    predicate_object_list(subject);
  }

  Term subject_term() {
    const Token& t = ts_.peek();
    if (t.is_punct("(")) return collection();
    Term s = resource_or_blank();
    return s;
  }

  Term resource_or_blank() {
    Token t = ts_.next();
    switch (t.kind) {
      case Tok::iri:
        return iri_term(syntax::resolve_iri(base_, t.text), t);
      case Tok::pname:
        return iri_term(syntax::expand_pname(t, prefixes_, ts_), t);
      case Tok::blank:
        return Term::blank(t.text);
      default:
        ts_.fail("expected IRI or blank node, found " + syntax::describe(t), t);
    }
  }

  Term iri_term(const std::string& iri, const Token& at) {
    try {
      return Term::iri(iri);
    } catch (const InvalidTerm& e) {
      ts_.fail(e.what(), at);
    }
  }

  void predicate_object_list(const Term& subject) {
    for (;;) {
      Term predicate = verb();
      object_list(subject, predicate);
      if (!ts_.accept_punct(";")) return;
      while (ts_.accept_punct(";")) {
      }
      const Token& n = ts_.peek();
      if (n.is_punct(".") || n.is_punct("]") || n.kind == Tok::end) return;
    }
  }

  Term verb() {
    const Token& t = ts_.peek();
    if (t.kind == Tok::name && t.text == "a") {
      ts_.next();
      return Term::iri(vocab::rdf::type);
    }
    if (t.kind != Tok::iri && t.kind != Tok::pname) ts_.fail("expected predicate, found " + syntax::describe(t), t);
    return resource_or_blank();
  }

  void object_list(const Term& subject, const Term& predicate) {
    do {
      Term o = object();
      out_.emplace(subject, predicate, std::move(o));
    } while (ts_.accept_punct(","));
  }

  Term object() {
    const Token& t = ts_.peek();
    if (t.is_punct("[")) return blank_node_property_list();
    if (t.is_punct("(")) return collection();
    switch (t.kind) {
      case Tok::string:
        return literal();
      case Tok::integer:
        return Term::literal(ts_.next().text, vocab::xsd::integer);
      case Tok::decimal:
        return Term::literal(ts_.next().text, vocab::xsd::decimal);
      case Tok::double_:
        return Term::literal(ts_.next().text, vocab::xsd::double_);
      case Tok::name:
        if (t.text == "true" || t.text == "false") return Term::literal(ts_.next().text, vocab::xsd::boolean);
        ts_.fail("unexpected " + syntax::describe(t), t);
      default:
        return resource_or_blank();
    }
  }

  Term literal() {
    Token s = ts_.next();
    try {
      if (ts_.peek().kind == Tok::langtag) return Term::lang_literal(s.text, ts_.next().text);
      if (ts_.accept_punct("^^")) {
        Token dt = ts_.next();
        std::string iri;
        if (dt.kind == Tok::iri) {
          iri = syntax::resolve_iri(base_, dt.text);
        } else if (dt.kind == Tok::pname) {
          iri = syntax::expand_pname(dt, prefixes_, ts_);
        } else {
          ts_.fail("expected datatype IRI", dt);
        }
        return Term::literal(s.text, iri);
      }
      return Term::literal(s.text);
    } catch (const InvalidTerm& e) {
      ts_.fail(e.what(), s);
    }
  }

  Term fresh_blank() { return Term::blank("tg" + std::to_string(++blank_counter_)); }

  Term blank_node_property_list() {
    ts_.expect_punct("[");
    Term node = fresh_blank();
    if (ts_.accept_punct("]")) return node;
    predicate_object_list(node);
    ts_.expect_punct("]");
    return node;
  }

  Term collection() {
    ts_.expect_punct("(");
    std::vector<Term> items;
    while (!ts_.accept_punct(")")) {
      if (ts_.at_end()) ts_.fail("unterminated collection");
      items.push_back(object());
    }
    Term head = Term::iri(vocab::rdf::nil);
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
      Term cell = fresh_blank();
      out_.emplace(cell, Term::iri(vocab::rdf::first), *it);
      out_.emplace(cell, Term::iri(vocab::rdf::rest), head);
      head = cell;
    }
    return head;
  }

  TokenStream ts_;
  std::string base_;
  std::map<std::string, std::string> prefixes_;
  QuadSet out_;
  std::size_t blank_counter_ = 0;
};

}  // namespace

QuadSet parse_turtle(std::string_view text, std::string_view base_iri) {
  return TurtleParser(text, base_iri).run();
}

}  // namespace vrdf
