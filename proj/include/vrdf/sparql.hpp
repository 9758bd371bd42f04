#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vrdf/term.hpp"

namespace vrdf {

/// One INSERT DATA or DELETE DATA operation of an update request, in request order.
struct UpdateOperation {
  enum class Kind { insert_data, delete_data };
  Kind kind;
  std::vector<Quad> quads;
};

/// Parses a SPARQL 1.1 update request restricted to INSERT DATA / DELETE DATA
/// (with PREFIX/BASE prologues, GRAPH blocks and Turtle abbreviations).
/// Throws ParseError on syntax errors and DisallowedUpdate on any other
/// update form (DELETE WHERE, LOAD, CLEAR, ...).
std::vector<UpdateOperation> parse_update(std::string_view text);

/// Canonical text of one data operation: "INSERT DATA { ... }" on a single
/// line, default-graph statements first, then one GRAPH block per named graph,
/// each group sorted by N-Triples form. Empty for an empty set.
std::string to_data_update(UpdateOperation::Kind kind, const QuadSet& quads);

/// True when `query` is an ASK query. Throws ParseError.
bool is_ask_query(std::string_view query);

/// Parses a SELECT or ASK query and returns its projected variable names
/// (empty for ASK and SELECT *). Throws ParseError.
std::vector<std::string> query_variables(std::string_view query);

/// Result of a SELECT: unbound variables are absent from a row.
struct SelectResult {
  using Row = std::map<std::string, Term>;

  std::vector<std::string> variables;
  std::vector<Row> rows;

  /// Null when `var` is unbound in `row`.
  static const Term* get(const Row& row, const std::string& var) {
    auto it = row.find(var);
    return it == row.end() ? nullptr : &it->second;
  }

  friend bool operator==(const SelectResult&, const SelectResult&) = default;
};

/// SPARQL 1.1 Query Results JSON Format.
std::string to_results_json(const SelectResult& result);
SelectResult from_results_json(std::string_view json);

/// Boolean result document for ASK queries.
std::string to_boolean_json(bool value);

}  // namespace vrdf
