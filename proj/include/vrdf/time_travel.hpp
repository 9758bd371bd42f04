#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "vrdf/provenance.hpp"

namespace vrdf {

class Store;

/// The state of an entity right after snapshot `at_snapshot`.
struct VersionView {
  Term entity;
  std::size_t at_snapshot;
  QuadSet quads;
  Snapshot snapshot_meta;
};

/// Applies deltas 1..k to the empty graph.
QuadSet forward_replay(const ProvenanceChain& chain, std::size_t k);

/// Reconstructs the state at snapshot k by inverting deltas n..k+1 on
/// `current`, and cross-checks the result against forward replay. Throws
/// InvalidRequest when k is out of range and IntegrityError when the two
/// replays disagree (also at k == n, which checks `current` itself).
VersionView materialize(const ProvenanceChain& chain, const QuadSet& current, std::size_t k);

/// Latest sequence generated at or before `t`; 0 when the entity is younger.
std::size_t sequence_at(const ProvenanceChain& chain, Timestamp t);

struct RestoreResult {
  QuadSet quads;  // new live state of the entity
  Delta delta;    // what the restore changed
  ProvenanceChain chain;
};

/// Brings the entity back to its state at snapshot k (1 <= k < n) by
/// appending a restore snapshot; existing snapshots are left untouched.
/// Throws InvalidRequest when k is out of range or names a deletion.
RestoreResult restore(const ProvenanceChain& chain, const QuadSet& current, std::size_t k, const Term& agent,
                      Timestamp now, const std::optional<Term>& primary_source = std::nullopt);

/// Linked entities a restore should revert alongside `entity`: every IRI
/// used as subject or object in `restored_quads` that has its own chain and
/// whose live state differs from its state at `at_time`. The sequence is the
/// state to return to; 0 means the linked entity did not exist yet.
std::vector<std::pair<Term, std::size_t>> cascade_targets(const Term& entity, const QuadSet& restored_quads,
                                                          Store& data, Store& prov, Timestamp at_time);

struct VaultEntry {
  Term entity;
  Timestamp deleted_at;
  Term agent;
  VersionView last_live_view;
};

/// Entities whose chain ends in a deletion, most recent deletion first.
std::vector<VaultEntry> list_vault(Store& prov);

}  // namespace vrdf
