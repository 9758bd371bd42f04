#include <json.hpp>

#include "vrdf/error.hpp"
#include "vrdf/sparql.hpp"
#include "vrdf/vocab.hpp"

namespace vrdf {

using nlohmann::json;

namespace {

json term_json(const Term& t) {
  json j;
  if (t.is_iri()) {
    j["type"] = "uri";
  } else if (t.is_blank()) {
    j["type"] = "bnode";
  } else {
    j["type"] = "literal";
    if (!t.language().empty()) {
      j["xml:lang"] = t.language();
    } else if (t.datatype() != vocab::xsd::string) {
      j["datatype"] = t.datatype();
    }
  }
  j["value"] = t.value();
  return j;
}

Term json_term(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  std::string value = j.at("value").get<std::string>();
  if (type == "uri") return Term::iri(std::move(value));
  if (type == "bnode") return Term::blank(std::move(value));
  if (type == "literal" || type == "typed-literal") {
    if (j.contains("xml:lang")) return Term::lang_literal(std::move(value), j["xml:lang"].get<std::string>());
    if (j.contains("datatype")) return Term::literal(std::move(value), j["datatype"].get<std::string>());
    return Term::literal(std::move(value));
  }
  throw StoreError("unknown RDF term type in results: " + type);
}

}  // namespace

std::string to_results_json(const SelectResult& result) {
  json doc;
  doc["head"]["vars"] = result.variables;
  json bindings = json::array();
  for (const auto& row : result.rows) {
    json b = json::object();
    for (const auto& [var, term] : row) b[var] = term_json(term);
    bindings.push_back(std::move(b));
  }
  doc["results"]["bindings"] = std::move(bindings);
  return doc.dump();
}

SelectResult from_results_json(std::string_view text) {
  SelectResult result;
  try {
    json doc = json::parse(text);
    if (doc.contains("boolean")) {
      if (doc["boolean"].get<bool>()) result.rows.emplace_back();
      return result;
    }
    if (doc.contains("head") && doc["head"].contains("vars")) {
      result.variables = doc["head"]["vars"].get<std::vector<std::string>>();
    }
    for (const auto& b : doc.at("results").at("bindings")) {
      SelectResult::Row row;
      for (const auto& [var, term] : b.items()) row.emplace(var, json_term(term));
      result.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw StoreError(std::string("malformed SPARQL results document: ") + e.what());
  } catch (const InvalidTerm& e) {
    throw StoreError(std::string("invalid term in SPARQL results: ") + e.what());
  }
  return result;
}

std::string to_boolean_json(bool value) {
  json doc;
  doc["head"] = json::object();
  doc["boolean"] = value;
  return doc.dump();
}

}  // namespace vrdf
