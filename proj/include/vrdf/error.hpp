#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vrdf {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A term or quad violates the RDF data model (bad IRI, literal in subject position, ...).
class InvalidTerm : public Error {
 public:
  using Error::Error;
};

/// Syntax error in N-Quads, Turtle, SPARQL or update text. Positions are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(message + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// An update request uses a form other than INSERT DATA / DELETE DATA.
class DisallowedUpdate : public Error {
 public:
  using Error::Error;
};

/// A delta would contain blank nodes or overlapping insertions and deletions.
class InvalidDelta : public Error {
 public:
  using Error::Error;
};

/// Backend failure: unreachable endpoint, timeout, HTTP error, injected fault.
class StoreError : public Error {
 public:
  using Error::Error;
};

/// Provenance chain is structurally broken (missing link, cycle, two live heads, ...).
class ChainError : public Error {
 public:
  using Error::Error;
};

/// Backward and forward replay of a history disagree.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

/// The entity exists only in the vault.
class EntityDeleted : public Error {
 public:
  using Error::Error;
};

/// Optimistic concurrency failure: the caller's head token is stale.
class Conflict : public Error {
 public:
  using Error::Error;
};

/// Request is well-formed but not allowed (bad page size, non-creatable class, k out of range, ...).
class InvalidRequest : public Error {
 public:
  using Error::Error;
};

}  // namespace vrdf
