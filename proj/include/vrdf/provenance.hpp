#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vrdf/delta.hpp"
#include "vrdf/term.hpp"

namespace vrdf {

class Store;

/// UTC instant with millisecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// xsd:dateTime in UTC with exactly three fractional digits and a trailing Z,
/// e.g. "2024-09-16T10:15:00.250Z".
std::string format_timestamp(Timestamp t);

/// Parses an xsd:dateTime. Offsets are normalized to UTC, a missing offset is
/// read as UTC and sub-millisecond digits are truncated. Throws InvalidTerm.
Timestamp parse_timestamp(std::string_view text);

/// Current wall-clock time truncated to milliseconds.
Timestamp now_utc();

/// One provenance record: the transition of an entity to a new state.
struct Snapshot {
  Term id;
  Term entity;
  std::size_t sequence = 0;
  Timestamp generated_at;
  std::optional<Timestamp> invalidated_at;
  Term agent;
  std::optional<Term> primary_source;
  std::string description;
  Delta delta;
  std::optional<Term> derived_from;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

/// All snapshots of one entity, ordered by sequence.
struct ProvenanceChain {
  Term entity;
  std::vector<Snapshot> snapshots;

  explicit ProvenanceChain(Term e) : entity(std::move(e)) {}

  bool empty() const { return snapshots.empty(); }
  std::size_t size() const { return snapshots.size(); }
  /// Sequence number of the last snapshot, 0 for an empty chain.
  std::size_t head_sequence() const { return snapshots.size(); }
  const Snapshot& head() const;
  /// True when the last snapshot invalidated itself (deletion).
  bool is_deleted() const { return !snapshots.empty() && snapshots.back().invalidated_at.has_value(); }

  /// Throws ChainError describing the first violated invariant.
  void validate() const;

  friend bool operator==(const ProvenanceChain&, const ProvenanceChain&) = default;
};

enum class SnapshotKind { edit, restore, deletion };

/// `{entity}/prov/se/{sequence}`
Term snapshot_iri(const Term& entity, std::size_t sequence);
/// `{entity}/prov`
Term prov_graph_iri(const Term& entity);

/// Appends a snapshot generated at `now`. The previous head is invalidated at
/// `now` unless it already carries an invalidation time. A deletion snapshot
/// invalidates itself. Throws InvalidRequest for an empty delta outside a
/// restore, a creation delta with deletions, or an edit of a deleted entity;
/// ChainError when `now` precedes the head's generation time.
ProvenanceChain record_snapshot(const ProvenanceChain& chain, const Delta& delta, const Term& agent,
                                const std::optional<Term>& primary_source, const std::string& description,
                                Timestamp now, SnapshotKind kind = SnapshotKind::edit);

/// Provenance statements of one snapshot, all in `graph`.
QuadSet to_prov_quads(const Snapshot& s, const Term& graph);
/// Provenance statements of a whole chain in its provenance graph.
QuadSet to_prov_quads(const ProvenanceChain& chain);

/// Rebuilds the chain of `entity` from provenance statements in any order.
/// Statements about other subjects are ignored. Throws ChainError for a
/// broken chain or malformed field.
ProvenanceChain from_prov_quads(const QuadSet& quads, const Term& entity);

/// Reads the chain of `entity` from its provenance graph; empty when absent.
ProvenanceChain load_chain(Store& prov, const Term& entity);

}  // namespace vrdf
