#include <array>
#include <limits>
#include <map>
#include <set>
#include <shared_mutex>
#include <unordered_map>

#include "sparql_ast.hpp"
#include "vrdf/error.hpp"
#include "vrdf/store.hpp"

namespace vrdf {

namespace {

using Id = std::uint32_t;
using Key = std::array<Id, 3>;
constexpr Id kNone = std::numeric_limits<Id>::max();
constexpr Id kDefaultGraph = std::numeric_limits<Id>::max();

// Three orderings of the same triples so that any bound position can be
// answered with a range scan.
struct GraphIndex {
  std::set<Key> spo;
  std::set<Key> pos;
  std::set<Key> osp;

  bool insert(Id s, Id p, Id o) {
    if (!spo.insert({s, p, o}).second) return false;
    pos.insert({p, o, s});
    osp.insert({o, s, p});
    return true;
  }

  bool erase(Id s, Id p, Id o) {
    if (spo.erase({s, p, o}) == 0) return false;
    pos.erase({p, o, s});
    osp.erase({o, s, p});
    return true;
  }

  bool empty() const { return spo.empty(); }
};

/// Visits keys of `index` starting with the given prefix (kNone = wildcard
/// and terminates the prefix).
template <typename F>
void scan(const std::set<Key>& index, Id a, Id b, F&& f) {
  if (a == kNone) {
    for (const auto& k : index) f(k);
    return;
  }
  Key lo{a, b == kNone ? 0 : b, 0};
  for (auto it = index.lower_bound(lo); it != index.end(); ++it) {
    if ((*it)[0] != a || (b != kNone && (*it)[1] != b)) break;
    f(*it);
  }
}

}  // namespace

struct MemoryStore::Impl : sparql::QuadSource {
  mutable std::shared_mutex mutex;
  std::unordered_map<Term, Id> ids;
  std::vector<Term> terms;
  // Graph id order is term insertion order, which keeps iteration (and
  // therefore unordered query results) deterministic.
  std::map<Id, GraphIndex> graphs;
  std::size_t count = 0;

  Id intern(const Term& t) {
    auto [it, inserted] = ids.emplace(t, static_cast<Id>(terms.size()));
    if (inserted) terms.push_back(t);
    return it->second;
  }

  Id lookup(const Term& t) const {
    auto it = ids.find(t);
    return it == ids.end() ? kNone : it->second;
  }

  void add(const Quad& q) {
    Id g = q.graph ? intern(*q.graph) : kDefaultGraph;
    Id s = intern(q.subject), p = intern(q.predicate), o = intern(q.object);
    if (graphs[g].insert(s, p, o)) ++count;
  }

  void remove(const Quad& q) {
    Id g = q.graph ? lookup(*q.graph) : kDefaultGraph;
    Id s = lookup(q.subject), p = lookup(q.predicate), o = lookup(q.object);
    if (g == kNone && q.graph) return;
    if (s == kNone || p == kNone || o == kNone) return;
    auto it = graphs.find(g);
    if (it == graphs.end()) return;
    if (it->second.erase(s, p, o)) --count;
    if (it->second.empty()) graphs.erase(it);
  }

  void match(const Term* s, const Term* p, const Term* o, const Term* graph,
             const Visitor& visit) const override {
    Id g = kDefaultGraph;
    if (graph) {
      g = lookup(*graph);
      if (g == kNone) return;
    }
    auto git = graphs.find(g);
    if (git == graphs.end()) return;
    const GraphIndex& idx = git->second;

    Id si = kNone, pi = kNone, oi = kNone;
    if (s && (si = lookup(*s)) == kNone) return;
    if (p && (pi = lookup(*p)) == kNone) return;
    if (o && (oi = lookup(*o)) == kNone) return;

    auto emit = [&](Id a, Id b, Id c) { visit(terms[a], terms[b], terms[c]); };
    if (s && p && o) {
      if (idx.spo.count({si, pi, oi})) emit(si, pi, oi);
    } else if (s && p) {
      scan(idx.spo, si, pi, [&](const Key& k) { emit(k[0], k[1], k[2]); });
    } else if (s && o) {
      scan(idx.osp, oi, si, [&](const Key& k) { emit(k[1], k[2], k[0]); });
    } else if (s) {
      scan(idx.spo, si, kNone, [&](const Key& k) { emit(k[0], k[1], k[2]); });
    } else if (p) {
      scan(idx.pos, pi, o ? oi : kNone, [&](const Key& k) { emit(k[2], k[0], k[1]); });
    } else if (o) {
      scan(idx.osp, oi, kNone, [&](const Key& k) { emit(k[1], k[2], k[0]); });
    } else {
      scan(idx.spo, kNone, kNone, [&](const Key& k) { emit(k[0], k[1], k[2]); });
    }
  }

  std::vector<Term> named_graphs() const override {
    std::vector<Term> out;
    for (const auto& [g, idx] : graphs) {
      if (g != kDefaultGraph) out.push_back(terms[g]);
    }
    return out;
  }
};

MemoryStore::MemoryStore() : impl_(std::make_unique<Impl>()) {}
MemoryStore::~MemoryStore() = default;

SelectResult MemoryStore::select(std::string_view query) {
  auto parsed = sparql::parse_query(query);
  std::shared_lock lock(impl_->mutex);
  return sparql::evaluate(parsed, *impl_);
}

void MemoryStore::update(std::string_view update_text) {
  // Parse fully before taking the lock so a syntax error changes nothing.
  auto ops = parse_update(update_text);
  std::unique_lock lock(impl_->mutex);
  for (const auto& op : ops) {
    for (const auto& q : op.quads) {
      if (op.kind == UpdateOperation::Kind::insert_data) {
        impl_->add(q);
      } else {
        impl_->remove(q);
      }
    }
  }
}

void MemoryStore::load_quads(const QuadSet& quads) {
  std::unique_lock lock(impl_->mutex);
  for (const auto& q : quads) impl_->add(q);
}

QuadSet MemoryStore::quads() const {
  std::shared_lock lock(impl_->mutex);
  QuadSet out;
  for (const auto& [g, idx] : impl_->graphs) {
    std::optional<Term> graph;
    if (g != kDefaultGraph) graph = impl_->terms[g];
    for (const auto& k : idx.spo) {
      out.emplace(impl_->terms[k[0]], impl_->terms[k[1]], impl_->terms[k[2]], graph);
    }
  }
  return out;
}

std::size_t MemoryStore::size() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->count;
}

}  // namespace vrdf
