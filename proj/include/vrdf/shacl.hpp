#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vrdf/term.hpp"

namespace vrdf {

struct DisplayRule;

/// Datatypes understood by lexical_valid.
bool is_supported_datatype(std::string_view datatype);

/// True iff `value` is in the XSD 1.1 lexical space of `datatype`. No
/// whitespace normalization is applied: " 1" is not an xsd:integer.
/// Throws InvalidRequest for datatypes outside the supported set.
bool lexical_valid(std::string_view value, std::string_view datatype);

struct PropertyConstraint {
  std::string path;
  std::vector<std::string> datatypes;  // alternatives; empty when unconstrained
  std::optional<std::size_t> min_count;
  std::optional<std::size_t> max_count;
  std::optional<std::string> pattern;
  std::string pattern_flags;
  std::optional<std::string> pattern_message;
  std::optional<std::string> object_class;
  std::optional<std::vector<Term>> allowed_values;
  std::optional<std::string> name;
  std::optional<double> order;
};

struct ShapeSchema {
  std::string target_class;
  std::vector<PropertyConstraint> constraints;
};

/// Reads NodeShapes from a shapes graph. Unsupported components are skipped
/// and described in `warnings` when given. Throws ConfigError for a shape
/// without target class, min > max, or datatype combined with class.
std::vector<ShapeSchema> parse_shapes(const QuadSet& shape_quads, std::vector<std::string>* warnings = nullptr);

enum class ViolationKind { min_count, max_count, datatype, pattern, class_, value };

std::string_view to_string(ViolationKind kind);

struct Violation {
  Term entity;
  std::string path;
  ViolationKind kind;
  std::string message;
  std::optional<Term> offending_value;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool conforms() const { return violations.empty(); }
};

/// rdf:type values of a linked resource, used for sh:class checks.
using TypeLookup = std::function<std::set<std::string>(const Term&)>;

/// Checks `entity` against every constraint of `schema`. Without a type
/// lookup, sh:class only requires the value to be an IRI or blank node.
ValidationReport validate(const EntityGraph& entity, const ShapeSchema& schema, const TypeLookup& types = {});

/// Validates against every schema whose target class is one of the entity's
/// rdf:type values and concatenates the reports. No matching schema conforms.
ValidationReport validate_all(const EntityGraph& entity, const std::vector<ShapeSchema>& schemas,
                              const TypeLookup& types = {});

enum class Widget { text, textarea, date_full, date_year_month, date_year, number, uri_ref, nested_entity, dropdown };

std::string_view to_string(Widget w);

struct FormField {
  std::string path;
  std::string label;
  Widget widget = Widget::text;
  std::vector<std::string> datatype_options;
  std::size_t min = 0;
  std::optional<std::size_t> max;  // absent: unbounded
  std::optional<std::string> pattern;
  bool required = false;
  std::optional<std::string> object_class;
  std::vector<Term> allowed_values;

  bool repeatable() const { return !max || *max > 1; }
};

/// Widget to use for a single datatype (text for anything non-special).
Widget widget_for_datatype(std::string_view datatype);

/// One field per constraint, in constraint order. `rule` supplies labels and
/// the textarea hint when present.
std::vector<FormField> compile_form(const ShapeSchema& schema, const DisplayRule* rule = nullptr);

}  // namespace vrdf
