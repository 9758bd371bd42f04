#include "vrdf/term.hpp"

#include <map>

#include "vrdf/error.hpp"
#include "vrdf/rdf_io.hpp"
#include "vrdf/vocab.hpp"

namespace vrdf {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_forbidden_iri_char(unsigned char c) {
  if (c <= 0x20) return true;
  switch (c) {
    case '<':
    case '>':
    case '"':
    case '{':
    case '}':
    case '|':
    case '^':
    case '`':
    case '\\':
      return true;
    default:
      return false;
  }
}

void hash_combine(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

}  // namespace

bool is_absolute_iri(std::string_view iri) {
  if (iri.empty() || !is_alpha(iri[0])) return false;
  std::size_t i = 1;
  while (i < iri.size() &&
         (is_alpha(iri[i]) || is_digit(iri[i]) || iri[i] == '+' || iri[i] == '-' || iri[i] == '.')) {
    ++i;
  }
  if (i >= iri.size() || iri[i] != ':') return false;
  for (unsigned char c : iri) {
    if (is_forbidden_iri_char(c)) return false;
  }
  return true;
}

bool is_valid_language_tag(std::string_view tag) {
  if (tag.empty()) return false;
  std::size_t i = 0;
  std::size_t n = 0;
  while (i < tag.size() && is_alpha(tag[i])) ++i, ++n;
  if (n == 0) return false;
  while (i < tag.size()) {
    if (tag[i] != '-') return false;
    ++i;
    n = 0;
    while (i < tag.size() && (is_alpha(tag[i]) || is_digit(tag[i]))) ++i, ++n;
    if (n == 0) return false;
  }
  return true;
}

std::string local_name(std::string_view iri) {
  auto pos = iri.find_last_of("#/");
  if (pos == std::string_view::npos || pos + 1 == iri.size()) {
    // "http://x/y/" -> "y"
    if (pos != std::string_view::npos && pos > 0) {
      auto trimmed = iri.substr(0, pos);
      auto p2 = trimmed.find_last_of("#/");
      return std::string(p2 == std::string_view::npos ? trimmed : trimmed.substr(p2 + 1));
    }
    // URNs such as "urn:x:p" have no slash or hash; split at the last colon
    // past the scheme, keeping "urn:x" whole.
    auto colon = iri.find_last_of(':');
    if (colon != iri.find(':') && colon + 1 < iri.size()) return std::string(iri.substr(colon + 1));
    return std::string(iri);
  }
  return std::string(iri.substr(pos + 1));
}

Term Term::iri(std::string value) {
  if (!is_absolute_iri(value)) throw InvalidTerm("not an absolute IRI: '" + value + "'");
  return Term(TermKind::iri, std::move(value), {}, {});
}

Term Term::blank(std::string label) {
  if (label.empty()) throw InvalidTerm("blank node label must not be empty");
  for (unsigned char c : label) {
    if (c <= 0x20 || c == '<' || c == '>' || c == '"') {
      throw InvalidTerm("invalid character in blank node label '" + label + "'");
    }
  }
  return Term(TermKind::blank, std::move(label), {}, {});
}

Term Term::literal(std::string lexical) {
  return Term(TermKind::literal, std::move(lexical), vocab::xsd::string, {});
}

Term Term::literal(std::string lexical, std::string datatype) {
  if (datatype.empty()) return literal(std::move(lexical));
  if (datatype == vocab::rdf::langString) {
    throw InvalidTerm("rdf:langString literal requires a language tag");
  }
  if (!is_absolute_iri(datatype)) throw InvalidTerm("datatype is not an absolute IRI: " + datatype);
  return Term(TermKind::literal, std::move(lexical), std::move(datatype), {});
}

Term Term::lang_literal(std::string lexical, std::string language) {
  if (!is_valid_language_tag(language)) throw InvalidTerm("invalid language tag '" + language + "'");
  return Term(TermKind::literal, std::move(lexical), vocab::rdf::langString, std::move(language));
}

std::string Term::to_string() const {
  switch (kind_) {
    case TermKind::iri:
      return "<" + value_ + ">";
    case TermKind::blank:
      return "_:" + value_;
    case TermKind::literal: {
      std::string out = "\"" + escape_string_literal(value_) + "\"";
      if (!language_.empty()) {
        out += "@" + language_;
      } else if (datatype_ != vocab::xsd::string) {
        out += "^^<" + datatype_ + ">";
      }
      return out;
    }
  }
  return {};
}

std::string escape_string_literal(std::string_view raw) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(raw.size() + 2);
  for (unsigned char c : raw) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20 || c == 0x7F) {
          out += "\\u00";
          out += hex[c >> 4];
          out += hex[c & 0xF];
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

Quad::Quad(Term s, Term p, Term o, std::optional<Term> g)
    : subject(std::move(s)), predicate(std::move(p)), object(std::move(o)), graph(std::move(g)) {
  if (subject.is_literal()) throw InvalidTerm("literal in subject position: " + subject.to_string());
  if (!predicate.is_iri()) throw InvalidTerm("predicate must be an IRI: " + predicate.to_string());
  if (graph && !graph->is_iri()) throw InvalidTerm("graph name must be an IRI: " + graph->to_string());
}

std::string Quad::to_string() const {
  std::string out = subject.to_string() + " " + predicate.to_string() + " " + object.to_string();
  if (graph) out += " " + graph->to_string();
  out += " .";
  return out;
}

void EntityGraph::add(Term predicate, Term object) {
  quads.emplace(entity, std::move(predicate), std::move(object), graph);
}

QuadSet skolemize(const QuadSet& quads, std::string_view base) {
  if (!is_absolute_iri(base)) throw InvalidTerm("skolemization base is not an absolute IRI");
  std::string prefix(base);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  prefix += "/.well-known/genid/";
  std::map<std::string, Term> mapping;
  auto map_term = [&](const Term& t) -> Term {
    if (!t.is_blank()) return t;
    auto it = mapping.find(t.value());
    if (it == mapping.end()) it = mapping.emplace(t.value(), Term::iri(prefix + t.value())).first;
    return it->second;
  };
  QuadSet out;
  for (const auto& q : quads) {
    out.emplace(map_term(q.subject), q.predicate, map_term(q.object), q.graph);
  }
  return out;
}

}  // namespace vrdf

std::size_t std::hash<vrdf::Term>::operator()(const vrdf::Term& t) const noexcept {
  std::size_t seed = static_cast<std::size_t>(t.kind());
  vrdf::hash_combine(seed, std::hash<std::string>{}(t.value()));
  vrdf::hash_combine(seed, std::hash<std::string>{}(t.datatype()));
  vrdf::hash_combine(seed, std::hash<std::string>{}(t.language()));
  return seed;
}

std::size_t std::hash<vrdf::Quad>::operator()(const vrdf::Quad& q) const noexcept {
  std::hash<vrdf::Term> h;
  std::size_t seed = h(q.subject);
  vrdf::hash_combine(seed, h(q.predicate));
  vrdf::hash_combine(seed, h(q.object));
  vrdf::hash_combine(seed, q.graph ? h(*q.graph) : 0);
  return seed;
}
