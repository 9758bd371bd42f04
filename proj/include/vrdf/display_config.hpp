#pragma once

#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vrdf/term.hpp"

namespace vrdf {

class Store;

/// A SELECT query with `[[uri]]` / `[[subject]]` placeholders.
struct QueryTemplate {
  std::string text;
  std::vector<std::string> expected_vars;

  /// Replaces both placeholders with `<iri>`.
  std::string instantiate(const Term& iri) const;

  friend bool operator==(const QueryTemplate&, const QueryTemplate&) = default;
};

/// Replaces `[[uri]]` and `[[subject]]` outside string literals, IRIs and
/// comments with `replacement` verbatim.
std::string substitute_placeholders(std::string_view text, std::string_view replacement);

enum class SearchTarget { self, parent };

struct PropertyDisplay {
  std::string property;
  std::string display_name;
  bool should_be_displayed = true;
  bool supports_search = false;
  int min_chars_for_search = 3;
  SearchTarget search_target = SearchTarget::self;
  std::optional<std::string> input_type;  // "text" or "textarea"
  std::optional<QueryTemplate> fetch_value_from_query;

  friend bool operator==(const PropertyDisplay&, const PropertyDisplay&) = default;
};

struct DisplayRule {
  /// Rules without an explicit priority lose against every explicit one.
  static constexpr int kDefaultPriority = std::numeric_limits<int>::max();

  std::string class_iri;
  int priority = kDefaultPriority;
  bool should_be_displayed = true;
  std::string display_name;
  std::optional<QueryTemplate> fetch_uri_display;
  std::vector<PropertyDisplay> display_properties;
  /// Restores cascade through instances of this class (e.g. identifiers).
  bool dependent = false;

  /// Displayed properties usable in the "Sort by" menu: those rendered from
  /// their raw values (no fetch query), excluding rdf:type.
  std::vector<std::string> sort_keys() const;
  const PropertyDisplay* property(std::string_view iri) const;

  friend bool operator==(const DisplayRule&, const DisplayRule&) = default;
};

/// Parses the YAML rule list. Unknown keys are ignored and reported in
/// `warnings`. Throws ConfigError for malformed YAML, a rule without class,
/// duplicate (class, priority), bad values, or a template that does not parse.
std::vector<DisplayRule> parse_config(std::string_view yaml, std::vector<std::string>* warnings = nullptr);

/// YAML for `rules`; parse_config of the result yields `rules` again.
std::string serialize_config(const std::vector<DisplayRule>& rules);

/// The matching rule with the lowest priority; equal priorities are broken by
/// class IRI so the result does not depend on rule order.
const DisplayRule* resolve_rule(const std::set<std::string>& entity_types, const std::vector<DisplayRule>& rules);

/// Label for a class: the rule's displayName, else the IRI's local name.
std::string class_label(const std::string& class_iri, const std::vector<DisplayRule>& rules);

/// Human-readable label from the rule's fetchUriDisplay query (`?display`
/// of the first row). Falls back to the raw IRI; never throws.
std::string render_uri_display(const Term& entity, const DisplayRule* rule, Store& store);

struct RenderedValue {
  std::string display;
  std::optional<Term> target;

  friend bool operator==(const RenderedValue&, const RenderedValue&) = default;
};

/// Values of one property: rows of fetchValueFromQuery (first variable as
/// display, second as link target) or the raw objects. Never throws; a
/// failing query yields an empty list.
std::vector<RenderedValue> render_property_values(const Term& entity, const PropertyDisplay& pd, Store& store);

}  // namespace vrdf
