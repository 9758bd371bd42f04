#pragma once

#include <string>
#include <string_view>

// IRIs used across modules. Kept as plain string constants; Term construction
// happens at the call site.
namespace vrdf::vocab {

namespace rdf {
inline constexpr std::string_view ns = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline const std::string type = std::string(ns) + "type";
inline const std::string first = std::string(ns) + "first";
inline const std::string rest = std::string(ns) + "rest";
inline const std::string nil = std::string(ns) + "nil";
inline const std::string langString = std::string(ns) + "langString";
}  // namespace rdf

namespace xsd {
inline constexpr std::string_view ns = "http://www.w3.org/2001/XMLSchema#";
inline const std::string string = std::string(ns) + "string";
inline const std::string integer = std::string(ns) + "integer";
inline const std::string decimal = std::string(ns) + "decimal";
inline const std::string double_ = std::string(ns) + "double";
inline const std::string float_ = std::string(ns) + "float";
inline const std::string boolean = std::string(ns) + "boolean";
inline const std::string date = std::string(ns) + "date";
inline const std::string gYearMonth = std::string(ns) + "gYearMonth";
inline const std::string gYear = std::string(ns) + "gYear";
inline const std::string dateTime = std::string(ns) + "dateTime";
inline const std::string anyURI = std::string(ns) + "anyURI";
}  // namespace xsd

namespace prov {
inline constexpr std::string_view ns = "http://www.w3.org/ns/prov#";
inline const std::string Entity = std::string(ns) + "Entity";
inline const std::string specializationOf = std::string(ns) + "specializationOf";
inline const std::string generatedAtTime = std::string(ns) + "generatedAtTime";
inline const std::string invalidatedAtTime = std::string(ns) + "invalidatedAtTime";
inline const std::string wasAttributedTo = std::string(ns) + "wasAttributedTo";
inline const std::string hasPrimarySource = std::string(ns) + "hasPrimarySource";
inline const std::string wasDerivedFrom = std::string(ns) + "wasDerivedFrom";
}  // namespace prov

namespace dcterms {
inline constexpr std::string_view ns = "http://purl.org/dc/terms/";
inline const std::string description = std::string(ns) + "description";
inline const std::string title = std::string(ns) + "title";
}  // namespace dcterms

namespace oco {
inline constexpr std::string_view ns = "https://w3id.org/oc/ontology/";
inline const std::string hasUpdateQuery = std::string(ns) + "hasUpdateQuery";
}  // namespace oco

namespace sh {
inline constexpr std::string_view ns = "http://www.w3.org/ns/shacl#";
inline const std::string NodeShape = std::string(ns) + "NodeShape";
inline const std::string PropertyShape = std::string(ns) + "PropertyShape";
inline const std::string targetClass = std::string(ns) + "targetClass";
inline const std::string property = std::string(ns) + "property";
inline const std::string path = std::string(ns) + "path";
inline const std::string datatype = std::string(ns) + "datatype";
inline const std::string or_ = std::string(ns) + "or";
inline const std::string minCount = std::string(ns) + "minCount";
inline const std::string maxCount = std::string(ns) + "maxCount";
inline const std::string pattern = std::string(ns) + "pattern";
inline const std::string flags = std::string(ns) + "flags";
inline const std::string message = std::string(ns) + "message";
inline const std::string class_ = std::string(ns) + "class";
inline const std::string in = std::string(ns) + "in";
inline const std::string name = std::string(ns) + "name";
inline const std::string description = std::string(ns) + "description";
inline const std::string order = std::string(ns) + "order";
}  // namespace sh

// Internal bookkeeping vocabulary (write-ahead intents, IRI counters).
namespace sys {
inline constexpr std::string_view ns = "urn:vrdf:sys#";
inline const std::string WriteIntent = std::string(ns) + "WriteIntent";
inline const std::string pendingUpdate = std::string(ns) + "pendingUpdate";
inline const std::string targetSnapshot = std::string(ns) + "targetSnapshot";
inline const std::string forEntity = std::string(ns) + "forEntity";
inline const std::string lastId = std::string(ns) + "lastId";
}  // namespace sys

}  // namespace vrdf::vocab
