#include "vrdf/provenance.hpp"

#include <map>
#include <set>

#include "vrdf/error.hpp"
#include "vrdf/store.hpp"
#include "vrdf/vocab.hpp"

namespace vrdf {

namespace v = vocab;

const Snapshot& ProvenanceChain::head() const {
  if (snapshots.empty()) throw ChainError("chain of " + entity.value() + " is empty");
  return snapshots.back();
}

void ProvenanceChain::validate() const {
  auto fail = [&](std::size_t k, const std::string& what) {
    throw ChainError("chain of " + entity.value() + ", snapshot " + std::to_string(k) + ": " + what);
  };
  for (std::size_t i = 0; i < snapshots.size(); ++i) {
    const Snapshot& s = snapshots[i];
    std::size_t k = i + 1;
    if (s.sequence != k) fail(k, "sequence " + std::to_string(s.sequence) + " out of place");
    if (s.entity != entity) fail(k, "belongs to " + s.entity.value());
    if (k == 1) {
      if (s.derived_from) fail(k, "creation snapshot has a predecessor");
      if (!s.delta.deletions().empty()) fail(k, "creation snapshot deletes statements");
    } else {
      const Snapshot& prev = snapshots[i - 1];
      if (!s.derived_from) fail(k, "missing wasDerivedFrom link");
      if (*s.derived_from != prev.id) fail(k, "derived from " + s.derived_from->value() + ", not " + prev.id.value());
      if (s.generated_at < prev.generated_at) fail(k, "generated before its predecessor");
    }
    if (s.invalidated_at && *s.invalidated_at < s.generated_at) fail(k, "invalidated before it was generated");
    if (!s.invalidated_at && k != snapshots.size()) fail(k, "live snapshot is not the head");
  }
}

Term snapshot_iri(const Term& entity, std::size_t sequence) {
  return Term::iri(entity.value() + "/prov/se/" + std::to_string(sequence));
}

Term prov_graph_iri(const Term& entity) { return Term::iri(entity.value() + "/prov"); }

ProvenanceChain record_snapshot(const ProvenanceChain& chain, const Delta& delta, const Term& agent,
                                const std::optional<Term>& primary_source, const std::string& description,
                                Timestamp now, SnapshotKind kind) {
  if (!agent.is_iri()) throw InvalidRequest("agent must be an IRI");
  if (primary_source && !primary_source->is_iri()) throw InvalidRequest("primary source must be an IRI");
  if (delta.empty() && kind != SnapshotKind::restore) throw InvalidRequest("empty delta for a non-restore snapshot");
  if (chain.empty()) {
    if (kind != SnapshotKind::edit) throw InvalidRequest("first snapshot must be a creation");
    if (!delta.deletions().empty()) throw InvalidRequest("creation delta cannot delete statements");
  } else {
    if (now < chain.head().generated_at) {
      throw ChainError("clock regression: " + format_timestamp(now) + " precedes " +
                       format_timestamp(chain.head().generated_at));
    }
    if (chain.is_deleted() && kind != SnapshotKind::restore) {
      throw EntityDeleted(chain.entity.value() + " is deleted; only a restore can follow");
    }
  }

  ProvenanceChain out = chain;
  if (!out.empty() && !out.snapshots.back().invalidated_at) out.snapshots.back().invalidated_at = now;
  std::size_t seq = chain.size() + 1;
  Snapshot s{
      .id = snapshot_iri(chain.entity, seq),
      .entity = chain.entity,
      .sequence = seq,
      .generated_at = now,
      .invalidated_at = kind == SnapshotKind::deletion ? std::optional<Timestamp>(now) : std::nullopt,
      .agent = agent,
      .primary_source = primary_source,
      .description = description,
      .delta = delta,
      .derived_from = chain.empty() ? std::nullopt : std::optional<Term>(chain.head().id),
  };
  out.snapshots.push_back(std::move(s));
  return out;
}

QuadSet to_prov_quads(const Snapshot& s, const Term& graph) {
  QuadSet out;
  auto add = [&](const std::string& p, Term o) { out.emplace(s.id, Term::iri(p), std::move(o), graph); };
  add(v::rdf::type, Term::iri(v::prov::Entity));
  add(v::prov::specializationOf, s.entity);
  add(v::prov::generatedAtTime, Term::literal(format_timestamp(s.generated_at), v::xsd::dateTime));
  if (s.invalidated_at) {
    add(v::prov::invalidatedAtTime, Term::literal(format_timestamp(*s.invalidated_at), v::xsd::dateTime));
  }
  add(v::prov::wasAttributedTo, s.agent);
  if (s.primary_source) add(v::prov::hasPrimarySource, *s.primary_source);
  add(v::dcterms::description, Term::literal(s.description));
  if (!s.delta.empty()) add(v::oco::hasUpdateQuery, Term::literal(to_update_text(s.delta)));
  if (s.derived_from) add(v::prov::wasDerivedFrom, *s.derived_from);
  return out;
}

QuadSet to_prov_quads(const ProvenanceChain& chain) {
  QuadSet out;
  Term graph = prov_graph_iri(chain.entity);
  for (const auto& s : chain.snapshots) out.merge(to_prov_quads(s, graph));
  return out;
}

namespace {

struct RawSnapshot {
  std::map<std::string, std::vector<Term>> props;

  const Term* one(const Term& id, const std::string& p, bool required) const {
    auto it = props.find(p);
    if (it == props.end() || it->second.empty()) {
      if (required) throw ChainError(id.value() + " lacks " + p);
      return nullptr;
    }
    if (it->second.size() > 1) throw ChainError(id.value() + " has several values for " + p);
    return &it->second.front();
  }
};

Timestamp timestamp_of(const Term& id, const Term& t) {
  if (!t.is_literal()) throw ChainError(id.value() + ": timestamp is not a literal");
  try {
    return parse_timestamp(t.value());
  } catch (const InvalidTerm& e) {
    throw ChainError(id.value() + ": " + e.what());
  }
}

}  // namespace

ProvenanceChain from_prov_quads(const QuadSet& quads, const Term& entity) {
  const Term spec = Term::iri(v::prov::specializationOf);
  std::set<Term> ids;
  for (const auto& q : quads) {
    if (q.predicate == spec && q.object == entity) ids.insert(q.subject);
  }
  std::map<Term, RawSnapshot> raw;
  for (const auto& q : quads) {
    if (ids.count(q.subject)) raw[q.subject].props[q.predicate.value()].push_back(q.object);
  }

  std::vector<Snapshot> parsed;
  for (const auto& [id, r] : raw) {
    const Term* gen = r.one(id, v::prov::generatedAtTime, true);
    const Term* inv = r.one(id, v::prov::invalidatedAtTime, false);
    const Term* agent = r.one(id, v::prov::wasAttributedTo, true);
    const Term* source = r.one(id, v::prov::hasPrimarySource, false);
    const Term* desc = r.one(id, v::dcterms::description, false);
    const Term* update = r.one(id, v::oco::hasUpdateQuery, false);
    const Term* derived = r.one(id, v::prov::wasDerivedFrom, false);
    Delta delta;
    if (update) {
      try {
        delta = from_update_text(update->value());
      } catch (const Error& e) {
        throw ChainError(id.value() + ": unparseable update query: " + e.what());
      }
    }
    parsed.push_back(Snapshot{
        .id = id,
        .entity = entity,
        .sequence = 0,
        .generated_at = timestamp_of(id, *gen),
        .invalidated_at = inv ? std::optional<Timestamp>(timestamp_of(id, *inv)) : std::nullopt,
        .agent = *agent,
        .primary_source = source ? std::optional<Term>(*source) : std::nullopt,
        .description = desc ? desc->value() : std::string(),
        .delta = std::move(delta),
        .derived_from = derived ? std::optional<Term>(*derived) : std::nullopt,
    });
  }

  ProvenanceChain chain(entity);
  if (parsed.empty()) return chain;

  // Follow wasDerivedFrom from the unique root.
  std::map<Term, std::size_t> by_id;
  std::map<Term, std::vector<std::size_t>> successors;
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    by_id.emplace(parsed[i].id, i);
    if (parsed[i].derived_from) {
      successors[*parsed[i].derived_from].push_back(i);
    } else {
      roots.push_back(i);
    }
  }
  for (const auto& s : parsed) {
    if (s.derived_from && !by_id.count(*s.derived_from)) {
      throw ChainError("broken chain of " + entity.value() + ": " + s.id.value() + " derives from unknown " +
                       s.derived_from->value());
    }
  }
  if (roots.empty()) throw ChainError("broken chain of " + entity.value() + ": cycle, no creation snapshot");
  if (roots.size() > 1) throw ChainError("broken chain of " + entity.value() + ": several creation snapshots");
  std::size_t cur = roots.front();
  for (;;) {
    Snapshot s = parsed[cur];
    s.sequence = chain.snapshots.size() + 1;
    chain.snapshots.push_back(std::move(s));
    auto it = successors.find(parsed[cur].id);
    if (it == successors.end()) break;
    if (it->second.size() > 1) {
      throw ChainError("broken chain of " + entity.value() + ": " + parsed[cur].id.value() + " has several successors");
    }
    cur = it->second.front();
  }
  if (chain.snapshots.size() != parsed.size()) {
    throw ChainError("broken chain of " + entity.value() + ": cycle detached from the creation snapshot");
  }
  std::size_t live = 0;
  for (const auto& s : chain.snapshots) live += !s.invalidated_at;
  if (live > 1) throw ChainError("broken chain of " + entity.value() + ": two live heads");
  chain.validate();
  return chain;
}

ProvenanceChain load_chain(Store& prov, const Term& entity) {
  Term graph = prov_graph_iri(entity);
  auto result = prov.select("SELECT ?s ?p ?o WHERE { GRAPH " + graph.to_string() + " { ?s ?p ?o } }");
  QuadSet quads;
  for (const auto& row : result.rows) {
    const Term *s = SelectResult::get(row, "s"), *p = SelectResult::get(row, "p"), *o = SelectResult::get(row, "o");
    if (s && p && o) quads.emplace(*s, *p, *o, graph);
  }
  return from_prov_quads(quads, entity);
}

}  // namespace vrdf
