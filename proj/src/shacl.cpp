#include <algorithm>
#include <map>
#include <mutex>
#include <regex>
#include <unordered_map>

#include "vrdf/display_config.hpp"
#include "vrdf/error.hpp"
#include "vrdf/shacl.hpp"
#include "vrdf/vocab.hpp"

namespace vrdf {

namespace {

namespace sh = vocab::sh;
namespace xsd = vocab::xsd;

/// Subject-indexed view of the shapes graph.
class Graph {
 public:
  explicit Graph(const QuadSet& quads) {
    for (const auto& q : quads) by_subject_[q.subject].push_back(&q);
  }

  std::vector<Term> objects(const Term& s, const std::string& p) const {
    std::vector<Term> out;
    auto it = by_subject_.find(s);
    if (it == by_subject_.end()) return out;
    for (const Quad* q : it->second) {
      if (q->predicate.value() == p) out.push_back(q->object);
    }
    return out;
  }

  std::optional<Term> object(const Term& s, const std::string& p) const {
    auto all = objects(s, p);
    if (all.empty()) return std::nullopt;
    if (all.size() > 1) {
      throw ConfigError(s.to_string() + " has " + std::to_string(all.size()) + " values for <" + p + ">");
    }
    return all.front();
  }

  const std::vector<const Quad*>& statements(const Term& s) const {
    static const std::vector<const Quad*> none;
    auto it = by_subject_.find(s);
    return it == by_subject_.end() ? none : it->second;
  }

  std::vector<Term> list(const Term& head) const {
    std::vector<Term> out;
    Term node = head;
    std::set<Term> visited;
    while (!(node.is_iri() && node.value() == vocab::rdf::nil)) {
      if (!visited.insert(node).second) throw ConfigError("cyclic RDF list at " + head.to_string());
      auto first = object(node, vocab::rdf::first);
      auto rest = object(node, vocab::rdf::rest);
      if (!first || !rest) throw ConfigError("malformed RDF list at " + node.to_string());
      out.push_back(*first);
      node = *rest;
    }
    return out;
  }

  std::vector<Term> subjects_with_type(const std::string& cls) const {
    std::vector<Term> out;
    for (const auto& [s, qs] : by_subject_) {
      for (const Quad* q : qs) {
        if (q->predicate.value() == vocab::rdf::type && q->object.is_iri() && q->object.value() == cls) {
          out.push_back(s);
          break;
        }
      }
    }
    return out;
  }

 private:
  std::map<Term, std::vector<const Quad*>> by_subject_;
};

std::size_t count_value(const Term& t, const std::string& what) {
  if (!t.is_literal() || t.value().empty() || !std::all_of(t.value().begin(), t.value().end(), ::isdigit)) {
    throw ConfigError(what + " must be a non-negative integer, got " + t.to_string());
  }
  return std::stoull(t.value());
}

bool has_backreference(const std::string& pattern) {
  for (std::size_t i = 0; i + 1 < pattern.size(); ++i) {
    if (pattern[i] == '\\') {
      if (pattern[i + 1] >= '1' && pattern[i + 1] <= '9') return true;
      ++i;
    }
  }
  return false;
}

std::regex::flag_type regex_flags(const std::string& flags) {
  auto f = std::regex::ECMAScript;
  for (char c : flags) {
    if (c == 'i') {
      f |= std::regex::icase;
    } else {
      throw ConfigError("unsupported regex flag '" + std::string(1, c) + "'");
    }
  }
  return f;
}

/// Compiled patterns are shared across validations.
const std::regex& compiled(const std::string& pattern, const std::string& flags) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::unique_ptr<std::regex>> cache;
  std::string key = flags + '\x1f' + pattern;
  std::lock_guard lock(mu);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<std::regex>(pattern, regex_flags(flags));
  return *slot;
}

const std::set<std::string>& property_shape_keys() {
  static const std::set<std::string> keys = {sh::path,    sh::datatype, sh::or_,     sh::minCount, sh::maxCount,
                                             sh::pattern, sh::flags,    sh::message, sh::class_,   sh::in,
                                             sh::name,    sh::description, sh::order};
  return keys;
}

void warn_to(std::vector<std::string>* warnings, std::string msg) {
  if (warnings) warnings->push_back(std::move(msg));
}

std::optional<PropertyConstraint> parse_property_shape(const Graph& g, const Term& node,
                                                       std::vector<std::string>* warnings) {
  auto path = g.object(node, sh::path);
  if (!path) throw ConfigError("property shape " + node.to_string() + " has no sh:path");
  if (!path->is_iri()) {
    warn_to(warnings, "property shape " + node.to_string() + ": complex sh:path not supported, shape skipped");
    return std::nullopt;
  }
  PropertyConstraint c;
  c.path = path->value();

  for (const Quad* q : g.statements(node)) {
    const std::string& p = q->predicate.value();
    if (p.rfind(sh::ns, 0) == 0 && !property_shape_keys().count(p)) {
      warn_to(warnings, "unsupported constraint component <" + p + "> on " + c.path + " skipped");
    }
  }

  if (auto dt = g.object(node, sh::datatype)) {
    if (!dt->is_iri()) throw ConfigError(c.path + ": sh:datatype must be an IRI");
    c.datatypes.push_back(dt->value());
  }
  for (const Term& head : g.objects(node, sh::or_)) {
    for (const Term& alt : g.list(head)) {
      auto dt = g.object(alt, sh::datatype);
      bool datatype_only = dt && dt->is_iri();
      for (const Quad* q : g.statements(alt)) datatype_only = datatype_only && q->predicate.value() == sh::datatype;
      if (!datatype_only) {
        warn_to(warnings, c.path + ": sh:or alternative " + alt.to_string() + " is not a datatype-only shape, skipped");
        continue;
      }
      if (std::find(c.datatypes.begin(), c.datatypes.end(), dt->value()) == c.datatypes.end()) {
        c.datatypes.push_back(dt->value());
      }
    }
  }
  if (auto v = g.object(node, sh::minCount)) c.min_count = count_value(*v, c.path + " sh:minCount");
  if (auto v = g.object(node, sh::maxCount)) {
    c.max_count = count_value(*v, c.path + " sh:maxCount");
    if (*c.max_count == 0) throw ConfigError(c.path + ": sh:maxCount must be positive");
  }
  if (c.min_count && c.max_count && *c.min_count > *c.max_count) {
    throw ConfigError(c.path + ": sh:minCount " + std::to_string(*c.min_count) + " exceeds sh:maxCount " +
                      std::to_string(*c.max_count));
  }
  if (auto v = g.object(node, sh::pattern)) {
    c.pattern = v->value();
    if (auto f = g.object(node, sh::flags)) c.pattern_flags = f->value();
    if (has_backreference(*c.pattern)) throw ConfigError(c.path + ": backreferences are not supported in sh:pattern");
    try {
      compiled(*c.pattern, c.pattern_flags);
    } catch (const std::regex_error& e) {
      throw ConfigError(c.path + ": invalid sh:pattern '" + *c.pattern + "': " + e.what());
    }
  }
  if (auto v = g.object(node, sh::message)) c.pattern_message = v->value();
  if (auto v = g.object(node, sh::class_)) {
    if (!v->is_iri()) throw ConfigError(c.path + ": sh:class must be an IRI");
    c.object_class = v->value();
  }
  if (!c.datatypes.empty() && c.object_class) {
    throw ConfigError(c.path + ": sh:datatype and sh:class cannot be combined");
  }
  if (auto v = g.object(node, sh::in)) c.allowed_values = g.list(*v);
  if (auto v = g.object(node, sh::name)) c.name = v->value();
  if (auto v = g.object(node, sh::order)) {
    try {
      c.order = std::stod(v->value());
    } catch (const std::exception&) {
      throw ConfigError(c.path + ": sh:order must be numeric");
    }
  }
  return c;
}

std::string describe_value(const Term& t) { return t.is_literal() ? "\"" + t.value() + "\"" : t.to_string(); }

std::string join_local(const std::vector<std::string>& iris) {
  std::string out;
  for (const auto& i : iris) {
    if (!out.empty()) out += " or ";
    out += "xsd:" + local_name(i);
  }
  return out;
}

bool datatype_ok(const Term& value, const PropertyConstraint& c) {
  if (!value.is_literal()) return false;
  auto check = [&](const std::string& dt) {
    return is_supported_datatype(dt) ? lexical_valid(value.value(), dt) : true;
  };
  const std::string& vdt = value.datatype();
  if (std::find(c.datatypes.begin(), c.datatypes.end(), vdt) != c.datatypes.end()) return check(vdt);
  // Untyped input from a form is accepted when it reads as any allowed type.
  if (vdt == xsd::string) {
    return std::any_of(c.datatypes.begin(), c.datatypes.end(), [&](const std::string& dt) {
      return is_supported_datatype(dt) && lexical_valid(value.value(), dt);
    });
  }
  return false;
}

void check_constraint(const EntityGraph& entity, const PropertyConstraint& c, const TypeLookup& types,
                      std::vector<Violation>& out) {
  std::vector<Term> values;
  for (const auto& q : entity.quads) {
    if (q.subject == entity.entity && q.predicate.value() == c.path) values.push_back(q.object);
  }
  const std::string label = "`" + c.path + "`";
  auto add = [&](ViolationKind kind, std::string msg, std::optional<Term> v) {
    out.push_back({entity.entity, c.path, kind, std::move(msg), std::move(v)});
  };

  if (c.min_count && values.size() < *c.min_count) {
    add(ViolationKind::min_count,
        label + ": expected at least " + std::to_string(*c.min_count) + " value(s), found " +
            std::to_string(values.size()),
        std::nullopt);
  }
  if (c.max_count && values.size() > *c.max_count) {
    add(ViolationKind::max_count,
        label + ": expected at most " + std::to_string(*c.max_count) + " value(s), found " +
            std::to_string(values.size()),
        std::nullopt);
  }
  for (const Term& v : values) {
    if (!c.datatypes.empty() && !datatype_ok(v, c)) {
      add(ViolationKind::datatype, label + ": expected a value of type " + join_local(c.datatypes) + ", found " +
                                       describe_value(v),
          v);
    }
    if (c.pattern && !v.is_blank()) {
      if (!std::regex_search(v.value(), compiled(*c.pattern, c.pattern_flags))) {
        add(ViolationKind::pattern,
            c.pattern_message ? *c.pattern_message
                              : label + ": expected a value matching " + *c.pattern + ", found " + describe_value(v),
            v);
      }
    }
    if (c.object_class) {
      bool ok = !v.is_literal();
      if (ok && types) ok = types(v).count(*c.object_class) > 0;
      if (!ok) {
        add(ViolationKind::class_,
            label + ": expected an instance of <" + *c.object_class + ">, found " + describe_value(v), v);
      }
    }
    if (c.allowed_values &&
        std::find(c.allowed_values->begin(), c.allowed_values->end(), v) == c.allowed_values->end()) {
      add(ViolationKind::value, label + ": expected one of the listed values, found " + describe_value(v), v);
    }
  }
}

}  // namespace

std::vector<ShapeSchema> parse_shapes(const QuadSet& shape_quads, std::vector<std::string>* warnings) {
  Graph g(shape_quads);
  std::map<std::string, ShapeSchema> by_class;
  for (const Term& shape : g.subjects_with_type(sh::NodeShape)) {
    auto targets = g.objects(shape, sh::targetClass);
    if (targets.empty()) throw ConfigError("node shape " + shape.to_string() + " has no sh:targetClass");
    for (const Quad* q : g.statements(shape)) {
      const std::string& p = q->predicate.value();
      if (p.rfind(sh::ns, 0) == 0 && p != sh::targetClass && p != sh::property && p != sh::name &&
          p != sh::description) {
        warn_to(warnings, "unsupported constraint component <" + p + "> on " + shape.to_string() + " skipped");
      }
    }
    std::vector<PropertyConstraint> constraints;
    for (const Term& ps : g.objects(shape, sh::property)) {
      if (auto c = parse_property_shape(g, ps, warnings)) constraints.push_back(std::move(*c));
    }
    for (const Term& t : targets) {
      if (!t.is_iri()) throw ConfigError(shape.to_string() + ": sh:targetClass must be an IRI");
      auto& schema = by_class[t.value()];
      schema.target_class = t.value();
      schema.constraints.insert(schema.constraints.end(), constraints.begin(), constraints.end());
    }
  }
  std::vector<ShapeSchema> out;
  for (auto& [cls, schema] : by_class) {
    // Statement order in a graph is arbitrary, so fields follow sh:order and
    // then the path IRI.
    std::stable_sort(schema.constraints.begin(), schema.constraints.end(),
                     [](const PropertyConstraint& a, const PropertyConstraint& b) {
                       if (a.order.has_value() != b.order.has_value()) return a.order.has_value();
                       if (a.order && *a.order != *b.order) return *a.order < *b.order;
                       return a.path < b.path;
                     });
    out.push_back(std::move(schema));
  }
  return out;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::min_count:
      return "min_count";
    case ViolationKind::max_count:
      return "max_count";
    case ViolationKind::datatype:
      return "datatype";
    case ViolationKind::pattern:
      return "pattern";
    case ViolationKind::class_:
      return "class";
    case ViolationKind::value:
      return "value";
  }
  return "unknown";
}

ValidationReport validate(const EntityGraph& entity, const ShapeSchema& schema, const TypeLookup& types) {
  ValidationReport report;
  for (const auto& c : schema.constraints) check_constraint(entity, c, types, report.violations);
  return report;
}

ValidationReport validate_all(const EntityGraph& entity, const std::vector<ShapeSchema>& schemas,
                              const TypeLookup& types) {
  std::set<std::string> entity_types;
  for (const auto& q : entity.quads) {
    if (q.subject == entity.entity && q.predicate.value() == vocab::rdf::type && q.object.is_iri()) {
      entity_types.insert(q.object.value());
    }
  }
  ValidationReport report;
  for (const auto& schema : schemas) {
    if (!entity_types.count(schema.target_class)) continue;
    auto r = validate(entity, schema, types);
    report.violations.insert(report.violations.end(), r.violations.begin(), r.violations.end());
  }
  return report;
}

std::string_view to_string(Widget w) {
  switch (w) {
    case Widget::text:
      return "text";
    case Widget::textarea:
      return "textarea";
    case Widget::date_full:
      return "date_full";
    case Widget::date_year_month:
      return "date_year_month";
    case Widget::date_year:
      return "date_year";
    case Widget::number:
      return "number";
    case Widget::uri_ref:
      return "uri_ref";
    case Widget::nested_entity:
      return "nested_entity";
    case Widget::dropdown:
      return "dropdown";
  }
  return "text";
}

Widget widget_for_datatype(std::string_view dt) {
  if (dt == xsd::date) return Widget::date_full;
  if (dt == xsd::gYearMonth) return Widget::date_year_month;
  if (dt == xsd::gYear) return Widget::date_year;
  if (dt == xsd::anyURI) return Widget::uri_ref;
  if (dt.substr(0, xsd::ns.size()) == xsd::ns) {
    static const std::set<std::string, std::less<>> numeric = {
        "integer", "decimal", "double", "float", "int", "long", "short", "byte",
        "nonNegativeInteger", "positiveInteger", "nonPositiveInteger", "negativeInteger",
        "unsignedInt", "unsignedLong", "unsignedShort", "unsignedByte"};
    if (numeric.count(dt.substr(xsd::ns.size()))) return Widget::number;
  }
  return Widget::text;
}

std::vector<FormField> compile_form(const ShapeSchema& schema, const DisplayRule* rule) {
  std::vector<FormField> fields;
  fields.reserve(schema.constraints.size());
  for (const auto& c : schema.constraints) {
    FormField f;
    f.path = c.path;
    const PropertyDisplay* pd = rule ? rule->property(c.path) : nullptr;
    if (pd && !pd->display_name.empty()) {
      f.label = pd->display_name;
    } else if (c.name) {
      f.label = *c.name;
    } else {
      f.label = local_name(c.path);
    }
    f.datatype_options = c.datatypes;
    f.min = c.min_count.value_or(0);
    f.max = c.max_count;
    f.pattern = c.pattern;
    f.required = f.min >= 1;
    f.object_class = c.object_class;
    if (c.allowed_values) f.allowed_values = *c.allowed_values;

    if (c.allowed_values || c.datatypes.size() > 1) {
      f.widget = Widget::dropdown;
    } else if (c.object_class) {
      f.widget = Widget::nested_entity;
    } else if (c.datatypes.size() == 1) {
      f.widget = widget_for_datatype(c.datatypes.front());
    }
    if (f.widget == Widget::text && pd && pd->input_type == "textarea") f.widget = Widget::textarea;
    fields.push_back(std::move(f));
  }
  return fields;
}

}  // namespace vrdf
