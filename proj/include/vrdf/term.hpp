#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace vrdf {

enum class TermKind : std::uint8_t { iri, blank, literal };

/// An RDF term. Literals always carry a datatype: xsd:string when none was
/// given, rdf:langString when a language tag is present. Lexical forms are kept
/// verbatim ("01"^^xsd:integer and "1"^^xsd:integer are different terms).
class Term {
 public:
  static Term iri(std::string value);
  static Term blank(std::string label);
  static Term literal(std::string lexical);
  static Term literal(std::string lexical, std::string datatype);
  static Term lang_literal(std::string lexical, std::string language);

  TermKind kind() const { return kind_; }
  bool is_iri() const { return kind_ == TermKind::iri; }
  bool is_blank() const { return kind_ == TermKind::blank; }
  bool is_literal() const { return kind_ == TermKind::literal; }

  /// IRI string, blank label (without "_:") or literal lexical form.
  const std::string& value() const { return value_; }
  /// Empty for non-literals.
  const std::string& datatype() const { return datatype_; }
  /// Empty unless a language-tagged literal.
  const std::string& language() const { return language_; }

  /// N-Triples form: <iri>, _:label, "lex", "lex"@en, "lex"^^<dt>.
  /// xsd:string literals are written without an explicit datatype.
  std::string to_string() const;

  friend auto operator<=>(const Term&, const Term&) = default;
  friend bool operator==(const Term&, const Term&) = default;

 private:
  Term(TermKind kind, std::string value, std::string datatype, std::string language)
      : kind_(kind),
        value_(std::move(value)),
        datatype_(std::move(datatype)),
        language_(std::move(language)) {}

  TermKind kind_;
  std::string value_;
  std::string datatype_;
  std::string language_;
};

bool is_absolute_iri(std::string_view iri);
bool is_valid_language_tag(std::string_view tag);

/// Text after the last '#' or '/', or the whole IRI when neither occurs.
std::string local_name(std::string_view iri);

/// A statement. An absent graph means the default graph.
struct Quad {
  Term subject;
  Term predicate;
  Term object;
  std::optional<Term> graph;

  /// Throws InvalidTerm when subject is a literal, predicate is not an IRI or
  /// the graph name is not an IRI.
  Quad(Term s, Term p, Term o, std::optional<Term> g = std::nullopt);

  bool is_ground() const { return !subject.is_blank() && !object.is_blank(); }

  /// One N-Quads statement, without the trailing newline.
  std::string to_string() const;

  friend auto operator<=>(const Quad&, const Quad&) = default;
  friend bool operator==(const Quad&, const Quad&) = default;
};

using QuadSet = std::set<Quad>;

/// All statements of one entity within one graph. By default every quad has
/// `entity` as subject; callers may merge satellite statements explicitly.
struct EntityGraph {
  Term entity;
  std::optional<Term> graph;
  QuadSet quads;

  explicit EntityGraph(Term e, std::optional<Term> g = std::nullopt)
      : entity(std::move(e)), graph(std::move(g)) {}

  /// Adds (entity, p, o, graph). Existing statements are left alone.
  void add(Term predicate, Term object);
};

}  // namespace vrdf

template <>
struct std::hash<vrdf::Term> {
  std::size_t operator()(const vrdf::Term& t) const noexcept;
};

template <>
struct std::hash<vrdf::Quad> {
  std::size_t operator()(const vrdf::Quad& q) const noexcept;
};
