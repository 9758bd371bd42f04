#pragma once

#include <string>
#include <string_view>

#include "vrdf/term.hpp"

namespace vrdf {

/// Parses an N-Quads 1.1 document. Blank node labels are kept as written.
/// Throws ParseError (with line/column) on malformed input.
QuadSet parse_nquads(std::string_view text);

/// One statement per line, sorted by (graph, subject, predicate, object) in
/// their N-Triples form, default graph first.
std::string serialize_nquads(const QuadSet& quads);

/// Escapes a string for use between double quotes in N-Triples / SPARQL.
std::string escape_string_literal(std::string_view raw);

/// Parses a Turtle 1.1 document into default-graph quads. Anonymous nodes and
/// collections become fresh blank nodes.
QuadSet parse_turtle(std::string_view text, std::string_view base_iri = {});

/// Replaces every blank node with `base + "/.well-known/genid/" + label`.
/// Labels map one-to-one; input without blank nodes is returned unchanged.
QuadSet skolemize(const QuadSet& quads, std::string_view base);

}  // namespace vrdf
