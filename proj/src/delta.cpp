#include "vrdf/delta.hpp"

#include <algorithm>
#include <iterator>

#include "vrdf/error.hpp"
#include "vrdf/sparql.hpp"

namespace vrdf {

namespace {

void require_ground(const QuadSet& quads) {
  for (const auto& q : quads) {
    if (!q.is_ground()) throw InvalidDelta("delta contains a blank node: " + q.to_string());
  }
}

QuadSet difference(const QuadSet& a, const QuadSet& b) {
  QuadSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

}  // namespace

Delta::Delta(QuadSet insertions, QuadSet deletions)
    : insertions_(std::move(insertions)), deletions_(std::move(deletions)) {
  require_ground(insertions_);
  require_ground(deletions_);
  // Both sets are sorted, so overlap detection is a linear merge.
  auto a = insertions_.begin(), b = deletions_.begin();
  while (a != insertions_.end() && b != deletions_.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      throw InvalidDelta("quad is both inserted and deleted: " + a->to_string());
    }
  }
}

Delta diff(const QuadSet& before, const QuadSet& after) {
  return Delta(difference(after, before), difference(before, after));
}

Delta diff(const EntityGraph& before, const EntityGraph& after) {
  if (before.entity != after.entity) {
    throw InvalidDelta("cannot diff different entities: " + before.entity.to_string() + " vs " +
                       after.entity.to_string());
  }
  return diff(before.quads, after.quads);
}

Delta invert(const Delta& d) { return Delta(d.deletions(), d.insertions()); }

QuadSet apply(const Delta& d, const QuadSet& g) {
  QuadSet out = difference(g, d.deletions());
  out.insert(d.insertions().begin(), d.insertions().end());
  return out;
}

std::string to_update_text(const Delta& d) {
  std::string del = to_data_update(UpdateOperation::Kind::delete_data, d.deletions());
  std::string ins = to_data_update(UpdateOperation::Kind::insert_data, d.insertions());
  if (del.empty()) return ins;
  if (ins.empty()) return del;
  return del + "; " + ins;
}

Delta from_update_text(std::string_view text) {
  QuadSet insertions, deletions;
  for (const auto& op : parse_update(text)) {
    auto& target = op.kind == UpdateOperation::Kind::insert_data ? insertions : deletions;
    for (const auto& q : op.quads) {
      if (!q.is_ground()) throw InvalidDelta("blank nodes are not allowed in deltas: " + q.to_string());
      target.insert(q);
    }
  }
  return Delta(std::move(insertions), std::move(deletions));
}

}  // namespace vrdf
