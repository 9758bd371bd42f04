#include "vrdf/display_config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <map>

#include "vrdf/error.hpp"
#include "vrdf/log.hpp"
#include "vrdf/sparql.hpp"
#include "vrdf/store.hpp"
#include "vrdf/vocab.hpp"

namespace vrdf {

namespace {

constexpr std::string_view kUriPlaceholder = "[[uri]]";
constexpr std::string_view kSubjectPlaceholder = "[[subject]]";

bool iri_char(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u <= 0x20) return false;
  switch (c) {
    case '<':
    case '"':
    case '{':
    case '}':
    case '|':
    case '^':
    case '`':
    case '\\':
      return false;
    default:
      return true;
  }
}

/// Length of the IRIREF starting at `i` (which holds '<'), or 0 when the
/// '<' is a comparison operator.
std::size_t iri_length(std::string_view t, std::size_t i) {
  std::size_t j = i + 1;
  while (j < t.size() && t[j] != '>') {
    if (!iri_char(t[j])) return 0;
    ++j;
  }
  return j < t.size() ? j - i + 1 : 0;
}

/// Length of the string literal starting at `i`, honouring long quotes and
/// backslash escapes. An unterminated literal runs to the end.
std::size_t string_length(std::string_view t, std::size_t i) {
  char q = t[i];
  bool long_form = t.substr(i, 3) == std::string(3, q);
  std::size_t j = i + (long_form ? 3 : 1);
  while (j < t.size()) {
    if (t[j] == '\\') {
      j += 2;
      continue;
    }
    if (long_form ? t.substr(j, 3) == std::string(3, q) : t[j] == q) return j + (long_form ? 3 : 1) - i;
    if (!long_form && (t[j] == '\n' || t[j] == '\r')) return j - i;
    ++j;
  }
  return t.size() - i;
}

std::string term_text(const Term& t) { return t.value(); }

// Template validation uses a fixed IRI; any IRI would do.
const Term kProbe = Term::iri("urn:vrdf:template-check");

QueryTemplate make_template(const std::string& text, const std::string& where) {
  QueryTemplate tpl{text, {}};
  try {
    tpl.expected_vars = query_variables(tpl.instantiate(kProbe));
  } catch (const Error& e) {
    throw ConfigError(where + ": query template does not parse: " + e.what());
  }
  return tpl;
}

std::string mark(const YAML::Node& n) {
  const auto& m = n.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError("'" + key + "' must be a scalar" + mark(n));
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("'" + key + "' has an invalid value '" + n.Scalar() + "'" + mark(n));
  }
}

void note(std::vector<std::string>* warnings, std::string msg) {
  if (warnings) warnings->push_back(std::move(msg));
}

PropertyDisplay parse_property(const YAML::Node& node, const std::string& cls, std::vector<std::string>* warnings) {
  if (!node.IsMap()) throw ConfigError("display property of " + cls + " must be a mapping" + mark(node));
  if (!node["property"]) throw ConfigError("display property of " + cls + " has no 'property'" + mark(node));
  PropertyDisplay pd;
  pd.property = scalar<std::string>(node["property"], "property");
  if (!is_absolute_iri(pd.property)) throw ConfigError("property '" + pd.property + "' is not an absolute IRI");
  const std::string where = cls + " / " + pd.property;
  for (const auto& kv : node) {
    auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "property") {
      continue;
    } else if (key == "displayName") {
      pd.display_name = scalar<std::string>(v, key);
    } else if (key == "shouldBeDisplayed") {
      pd.should_be_displayed = scalar<bool>(v, key);
    } else if (key == "supportsSearch") {
      pd.supports_search = scalar<bool>(v, key);
    } else if (key == "minCharsForSearch") {
      pd.min_chars_for_search = scalar<int>(v, key);
      if (pd.min_chars_for_search < 0) throw ConfigError(where + ": minCharsForSearch must not be negative");
    } else if (key == "searchTarget") {
      auto s = scalar<std::string>(v, key);
      if (s == "self") {
        pd.search_target = SearchTarget::self;
      } else if (s == "parent") {
        pd.search_target = SearchTarget::parent;
      } else {
        throw ConfigError(where + ": searchTarget must be 'self' or 'parent', not '" + s + "'");
      }
    } else if (key == "inputType") {
      auto s = scalar<std::string>(v, key);
      if (s != "text" && s != "textarea") throw ConfigError(where + ": inputType must be 'text' or 'textarea'");
      pd.input_type = s;
    } else if (key == "fetchValueFromQuery") {
      pd.fetch_value_from_query = make_template(scalar<std::string>(v, key), where);
    } else {
      note(warnings, where + ": unknown key '" + key + "' ignored");
    }
  }
  if (pd.display_name.empty()) pd.display_name = local_name(pd.property);
  return pd;
}

DisplayRule parse_rule(const YAML::Node& node, std::vector<std::string>* warnings) {
  if (!node.IsMap()) throw ConfigError("each rule must be a mapping" + mark(node));
  if (!node["class"]) throw ConfigError("rule without 'class'" + mark(node));
  DisplayRule rule;
  rule.class_iri = scalar<std::string>(node["class"], "class");
  if (!is_absolute_iri(rule.class_iri)) throw ConfigError("class '" + rule.class_iri + "' is not an absolute IRI");
  for (const auto& kv : node) {
    auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "class") {
      continue;
    } else if (key == "priority") {
      rule.priority = scalar<int>(v, key);
    } else if (key == "shouldBeDisplayed") {
      rule.should_be_displayed = scalar<bool>(v, key);
    } else if (key == "displayName") {
      rule.display_name = scalar<std::string>(v, key);
    } else if (key == "fetchUriDisplay") {
      rule.fetch_uri_display = make_template(scalar<std::string>(v, key), rule.class_iri);
    } else if (key == "dependent") {
      rule.dependent = scalar<bool>(v, key);
    } else if (key == "displayProperties") {
      if (v.IsNull()) continue;
      if (!v.IsSequence()) throw ConfigError(rule.class_iri + ": displayProperties must be a list" + mark(v));
      for (const auto& p : v) rule.display_properties.push_back(parse_property(p, rule.class_iri, warnings));
    } else {
      note(warnings, rule.class_iri + ": unknown key '" + key + "' ignored");
    }
  }
  if (rule.display_name.empty()) rule.display_name = local_name(rule.class_iri);
  if (rule.display_name.empty()) throw ConfigError(rule.class_iri + ": displayName must not be empty");
  return rule;
}

void emit_template(YAML::Emitter& out, const char* key, const QueryTemplate& tpl) {
  out << YAML::Key << key << YAML::Value;
  // Literal blocks cannot carry trailing spaces or tabs faithfully, and
  // yaml-cpp adds a final newline; fall back to a quoted scalar then.
  bool literal_ok = !tpl.text.empty() && tpl.text.back() == '\n' &&
                    tpl.text.find_first_of("\t\r") == std::string::npos &&
                    tpl.text.find(" \n") == std::string::npos && tpl.text.find("\n\n") == std::string::npos &&
                    tpl.text.front() != ' ';
  if (literal_ok) {
    out << YAML::Literal << tpl.text;
  } else {
    out << YAML::DoubleQuoted << tpl.text;
  }
}

}  // namespace

std::string substitute_placeholders(std::string_view t, std::string_view replacement) {
  std::string out;
  out.reserve(t.size());
  std::size_t i = 0;
  while (i < t.size()) {
    char c = t[i];
    std::size_t skip = 0;
    if (c == '"' || c == '\'') {
      skip = string_length(t, i);
    } else if (c == '<') {
      skip = iri_length(t, i);
    } else if (c == '#') {
      auto nl = t.find('\n', i);
      skip = (nl == std::string_view::npos ? t.size() : nl) - i;
    } else if (t.substr(i, kUriPlaceholder.size()) == kUriPlaceholder) {
      out += replacement;
      i += kUriPlaceholder.size();
      continue;
    } else if (t.substr(i, kSubjectPlaceholder.size()) == kSubjectPlaceholder) {
      out += replacement;
      i += kSubjectPlaceholder.size();
      continue;
    }
    if (skip == 0) skip = 1;
    out.append(t.substr(i, skip));
    i += skip;
  }
  return out;
}

std::string QueryTemplate::instantiate(const Term& iri) const {
  if (!iri.is_iri()) throw InvalidTerm("query templates take IRIs, got " + iri.to_string());
  return substitute_placeholders(text, iri.to_string());
}

std::vector<std::string> DisplayRule::sort_keys() const {
  std::vector<std::string> keys;
  for (const auto& pd : display_properties) {
    if (pd.should_be_displayed && !pd.fetch_value_from_query && pd.property != vocab::rdf::type) {
      keys.push_back(pd.property);
    }
  }
  return keys;
}

const PropertyDisplay* DisplayRule::property(std::string_view iri) const {
  for (const auto& pd : display_properties) {
    if (pd.property == iri) return &pd;
  }
  return nullptr;
}

std::vector<DisplayRule> parse_config(std::string_view yaml, std::vector<std::string>* warnings) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.what());
  }
  std::vector<DisplayRule> rules;
  if (root.IsNull()) return rules;
  if (!root.IsSequence()) throw ConfigError("display configuration must be a list of class rules");
  std::map<std::pair<std::string, int>, std::size_t> seen;
  for (const auto& node : root) {
    DisplayRule rule = parse_rule(node, warnings);
    auto [it, fresh] = seen.emplace(std::pair{rule.class_iri, rule.priority}, rules.size());
    if (!fresh) {
      throw ConfigError("duplicate rule for " + rule.class_iri + " with priority " + std::to_string(rule.priority));
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::string serialize_config(const std::vector<DisplayRule>& rules) {
  YAML::Emitter out;
  out << YAML::BeginSeq;
  for (const auto& r : rules) {
    out << YAML::BeginMap;
    out << YAML::Key << "class" << YAML::Value << YAML::DoubleQuoted << r.class_iri;
    if (r.priority != DisplayRule::kDefaultPriority) out << YAML::Key << "priority" << YAML::Value << r.priority;
    out << YAML::Key << "shouldBeDisplayed" << YAML::Value << r.should_be_displayed;
    out << YAML::Key << "displayName" << YAML::Value << YAML::DoubleQuoted << r.display_name;
    if (r.dependent) out << YAML::Key << "dependent" << YAML::Value << true;
    if (r.fetch_uri_display) emit_template(out, "fetchUriDisplay", *r.fetch_uri_display);
    if (!r.display_properties.empty()) {
      out << YAML::Key << "displayProperties" << YAML::Value << YAML::BeginSeq;
      for (const auto& pd : r.display_properties) {
        out << YAML::BeginMap;
        out << YAML::Key << "property" << YAML::Value << YAML::DoubleQuoted << pd.property;
        out << YAML::Key << "displayName" << YAML::Value << YAML::DoubleQuoted << pd.display_name;
        out << YAML::Key << "shouldBeDisplayed" << YAML::Value << pd.should_be_displayed;
        out << YAML::Key << "supportsSearch" << YAML::Value << pd.supports_search;
        out << YAML::Key << "minCharsForSearch" << YAML::Value << pd.min_chars_for_search;
        out << YAML::Key << "searchTarget" << YAML::Value
            << (pd.search_target == SearchTarget::parent ? "parent" : "self");
        if (pd.input_type) out << YAML::Key << "inputType" << YAML::Value << *pd.input_type;
        if (pd.fetch_value_from_query) emit_template(out, "fetchValueFromQuery", *pd.fetch_value_from_query);
        out << YAML::EndMap;
      }
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  return std::string(out.c_str()) + "\n";
}

const DisplayRule* resolve_rule(const std::set<std::string>& entity_types, const std::vector<DisplayRule>& rules) {
  const DisplayRule* best = nullptr;
  for (const auto& r : rules) {
    if (!entity_types.count(r.class_iri)) continue;
    if (!best || r.priority < best->priority || (r.priority == best->priority && r.class_iri < best->class_iri)) {
      best = &r;
    }
  }
  return best;
}

std::string class_label(const std::string& class_iri, const std::vector<DisplayRule>& rules) {
  const DisplayRule* r = resolve_rule({class_iri}, rules);
  if (r && !r->display_name.empty()) return r->display_name;
  std::string name = local_name(class_iri);
  return name.empty() ? class_iri : name;
}

std::string render_uri_display(const Term& entity, const DisplayRule* rule, Store& store) {
  if (!rule || !rule->fetch_uri_display || !entity.is_iri()) return entity.value();
  try {
    const QueryTemplate& tpl = *rule->fetch_uri_display;
    SelectResult res = store.select(tpl.instantiate(entity));
    if (res.rows.empty()) return entity.value();
    std::string var = "display";
    if (std::find(res.variables.begin(), res.variables.end(), var) == res.variables.end() &&
        !res.variables.empty()) {
      var = res.variables.front();
    }
    const Term* t = SelectResult::get(res.rows.front(), var);
    if (!t || t->value().empty()) return entity.value();
    return term_text(*t);
  } catch (const std::exception& e) {
    warn("display query for " + entity.value() + " failed: " + e.what());
    return entity.value();
  }
}

std::vector<RenderedValue> render_property_values(const Term& entity, const PropertyDisplay& pd, Store& store) {
  std::vector<RenderedValue> out;
  if (!entity.is_iri()) return out;
  try {
    if (pd.fetch_value_from_query) {
      SelectResult res = store.select(pd.fetch_value_from_query->instantiate(entity));
      if (res.variables.empty()) return out;
      const std::string& shown = res.variables[0];
      for (const auto& row : res.rows) {
        const Term* d = SelectResult::get(row, shown);
        if (!d) continue;
        RenderedValue v{term_text(*d), std::nullopt};
        if (res.variables.size() > 1) {
          const Term* target = SelectResult::get(row, res.variables[1]);
          if (target && target->is_iri()) v.target = *target;
        }
        out.push_back(std::move(v));
      }
      return out;
    }
    SelectResult res = store.select("SELECT DISTINCT ?o WHERE { { " + entity.to_string() + " <" + pd.property +
                                    "> ?o } UNION { GRAPH ?g { " + entity.to_string() + " <" + pd.property +
                                    "> ?o } } }");
    for (const auto& row : res.rows) {
      const Term* o = SelectResult::get(row, "o");
      if (!o) continue;
      out.push_back({term_text(*o), o->is_iri() ? std::optional<Term>(*o) : std::nullopt});
    }
    std::sort(out.begin(), out.end(), [](const RenderedValue& a, const RenderedValue& b) {
      if (a.display != b.display) return a.display < b.display;
      return a.target < b.target;
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
  } catch (const std::exception& e) {
    warn("values of " + pd.property + " for " + entity.value() + " could not be fetched: " + e.what());
    out.clear();
  }
  return out;
}

}  // namespace vrdf
