#pragma once

#include <string>
#include <string_view>

#include "vrdf/term.hpp"

namespace vrdf {

/// A ground change between two states: quads to remove and quads to add.
/// Insertions and deletions are disjoint and contain no blank nodes.
class Delta {
 public:
  Delta() = default;
  /// Throws InvalidDelta when the sets overlap or contain blank nodes.
  Delta(QuadSet insertions, QuadSet deletions);

  const QuadSet& insertions() const { return insertions_; }
  const QuadSet& deletions() const { return deletions_; }
  bool empty() const { return insertions_.empty() && deletions_.empty(); }
  std::size_t size() const { return insertions_.size() + deletions_.size(); }

  friend bool operator==(const Delta&, const Delta&) = default;

 private:
  QuadSet insertions_;
  QuadSet deletions_;
};

/// after \ before as insertions, before \ after as deletions.
Delta diff(const QuadSet& before, const QuadSet& after);

/// Same as the set overload; throws InvalidDelta when the entities differ.
Delta diff(const EntityGraph& before, const EntityGraph& after);

/// Swaps insertions and deletions.
Delta invert(const Delta& d);

/// (g \ deletions) ∪ insertions.
QuadSet apply(const Delta& d, const QuadSet& g);

/// Canonical update text: "DELETE DATA { ... }; INSERT DATA { ... }" with
/// empty blocks omitted. The empty delta gives "".
std::string to_update_text(const Delta& d);

/// Merges every INSERT DATA / DELETE DATA operation of `text` into one delta.
/// Throws ParseError, DisallowedUpdate, or InvalidDelta (blank nodes, or one
/// quad both inserted and deleted).
Delta from_update_text(std::string_view text);

}  // namespace vrdf
