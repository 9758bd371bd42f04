#include "vrdf/time_travel.hpp"

#include <algorithm>
#include <set>

#include "vrdf/error.hpp"
#include "vrdf/store.hpp"
#include "vrdf/vocab.hpp"

namespace vrdf {

QuadSet forward_replay(const ProvenanceChain& chain, std::size_t k) {
  if (k > chain.size()) throw InvalidRequest("snapshot " + std::to_string(k) + " does not exist");
  QuadSet state;
  for (std::size_t i = 0; i < k; ++i) state = vrdf::apply(chain.snapshots[i].delta, state);
  return state;
}

VersionView materialize(const ProvenanceChain& chain, const QuadSet& current, std::size_t k) {
  std::size_t n = chain.size();
  if (k < 1 || k > n) {
    throw InvalidRequest("snapshot " + std::to_string(k) + " out of range 1.." + std::to_string(n) + " for " +
                         chain.entity.value());
  }
  QuadSet backward = current;
  for (std::size_t i = n; i > k; --i) backward = vrdf::apply(invert(chain.snapshots[i - 1].delta), backward);
  QuadSet forward = forward_replay(chain, k);
  if (backward != forward) {
    throw IntegrityError("history of " + chain.entity.value() + " does not reproduce snapshot " +
                         std::to_string(k) + ": backward replay has " + std::to_string(backward.size()) +
                         " statements, forward replay " + std::to_string(forward.size()));
  }
  return {chain.entity, k, std::move(backward), chain.snapshots[k - 1]};
}

std::size_t sequence_at(const ProvenanceChain& chain, Timestamp t) {
  std::size_t k = 0;
  for (const auto& s : chain.snapshots) {
    if (s.generated_at <= t) k = s.sequence;
  }
  return k;
}

RestoreResult restore(const ProvenanceChain& chain, const QuadSet& current, std::size_t k, const Term& agent,
                      Timestamp now, const std::optional<Term>& primary_source) {
  std::size_t n = chain.size();
  if (k < 1 || k >= n) {
    throw InvalidRequest("can only restore to snapshots 1.." + std::to_string(n == 0 ? 0 : n - 1) + ", not " +
                         std::to_string(k));
  }
  QuadSet target = materialize(chain, current, k).quads;
  // Snapshot k was a deletion; bringing back "nothing" would leave a live
  // chain with no statements, so point the caller at the state before it.
  if (target.empty()) {
    throw InvalidRequest("snapshot " + std::to_string(k) + " is a deletion; restore snapshot " +
                         std::to_string(k - 1) + " instead");
  }
  Delta d = diff(current, target);
  auto next = record_snapshot(chain, d, agent, primary_source, "restored to snapshot " + std::to_string(k), now,
                              SnapshotKind::restore);
  return {std::move(target), std::move(d), std::move(next)};
}

std::vector<std::pair<Term, std::size_t>> cascade_targets(const Term& entity, const QuadSet& restored_quads,
                                                          Store& data, Store& prov, Timestamp at_time) {
  std::set<Term> linked;
  for (const auto& q : restored_quads) {
    if (q.subject.is_iri()) linked.insert(q.subject);
    if (q.object.is_iri()) linked.insert(q.object);
  }
  linked.erase(entity);
  std::vector<std::pair<Term, std::size_t>> out;
  for (const auto& other : linked) {
    ProvenanceChain chain = load_chain(prov, other);
    if (chain.empty()) continue;
    QuadSet live = entity_quads(data, other);
    std::size_t k = sequence_at(chain, at_time);
    QuadSet then = k == 0 ? QuadSet{} : materialize(chain, live, k).quads;
    if (k == 0) materialize(chain, live, chain.size());  // integrity check of the live state
    if (then != live) out.emplace_back(other, k);
  }
  return out;
}

std::vector<VaultEntry> list_vault(Store& prov) {
  const std::string p = std::string(vocab::prov::ns);
  auto result = prov.select(
      "SELECT DISTINCT ?e WHERE { GRAPH ?g { ?s <" + p + "specializationOf> ?e ; <" + p +
      "invalidatedAtTime> ?t . FILTER NOT EXISTS { ?n <" + p + "wasDerivedFrom> ?s } } }");
  std::vector<VaultEntry> out;
  for (const auto& row : result.rows) {
    const Term* e = SelectResult::get(row, "e");
    if (!e || !e->is_iri()) continue;
    ProvenanceChain chain = load_chain(prov, *e);
    if (!chain.is_deleted() || chain.size() < 2) continue;
    const Snapshot& head = chain.head();
    out.push_back({*e, head.generated_at, head.agent, materialize(chain, {}, chain.size() - 1)});
  }
  std::sort(out.begin(), out.end(), [](const VaultEntry& a, const VaultEntry& b) {
    if (a.deleted_at != b.deleted_at) return a.deleted_at > b.deleted_at;
    return a.entity < b.entity;
  });
  return out;
}

}  // namespace vrdf
