#include "vrdf/error.hpp"
#include "vrdf/store.hpp"

namespace vrdf {

StoreHandle StoreHandle::remote(std::string query_endpoint, std::string update_endpoint,
                                std::chrono::seconds timeout) {
  StoreHandle h;
  h.kind = Kind::remote;
  h.query_endpoint = std::move(query_endpoint);
  h.update_endpoint = std::move(update_endpoint);
  h.timeout = timeout;
  h.validate();
  return h;
}

void StoreHandle::validate() const {
  if (kind == Kind::remote) {
    if (query_endpoint.empty() || update_endpoint.empty()) {
      throw ConfigError("remote store needs both a query and an update endpoint");
    }
  } else if (!query_endpoint.empty() || !update_endpoint.empty()) {
    throw ConfigError("memory store takes no endpoints");
  }
  if (timeout.count() <= 0) throw ConfigError("store timeout must be positive");
}

std::shared_ptr<Store> connect(const StoreHandle& handle) {
  handle.validate();
  if (handle.kind == StoreHandle::Kind::memory) return std::make_shared<MemoryStore>();
  return std::make_shared<RemoteStore>(handle);
}

QuadSet entity_quads(Store& store, const Term& entity) {
  if (!entity.is_iri()) throw InvalidTerm("entity must be an IRI");
  const std::string s = entity.to_string();
  auto result = store.select("SELECT ?g ?p ?o WHERE { { " + s + " ?p ?o } UNION { GRAPH ?g { " + s +
                             " ?p ?o } } }");
  QuadSet out;
  for (const auto& row : result.rows) {
    const Term* p = SelectResult::get(row, "p");
    const Term* o = SelectResult::get(row, "o");
    if (!p || !o) continue;
    const Term* g = SelectResult::get(row, "g");
    out.emplace(entity, *p, *o, g ? std::optional<Term>(*g) : std::nullopt);
  }
  return out;
}

}  // namespace vrdf
