#pragma once

#include <chrono>
#include <memory>
#include <mutex>

#include "catalog.hpp"
#include "vrdf/curation_service.hpp"
#include "vrdf/store.hpp"

namespace fixture {

/// Deterministic clock: starts at `start` and advances one second per reading.
class StepClock {
 public:
  explicit StepClock(vrdf::Timestamp start) : state_(std::make_shared<State>(start)) {}

  vrdf::Timestamp operator()() const {
    std::lock_guard lock(state_->mutex);
    auto t = state_->next;
    state_->next += std::chrono::seconds(1);
    return t;
  }
  void set(vrdf::Timestamp t) const {
    std::lock_guard lock(state_->mutex);
    state_->next = t;
  }

 private:
  struct State {
    explicit State(vrdf::Timestamp t) : next(t) {}
    std::mutex mutex;
    vrdf::Timestamp next;
  };
  std::shared_ptr<State> state_;
};

inline const std::string kCuratorOrcid = "https://orcid.org/0009-0002-5790-4804";
inline const std::string kZenodoSource = "https://doi.org/10.5281/zenodo.13768531";

/// Service over two embedded stores preloaded with the catalog dataset.
struct ServiceFixture {
  std::shared_ptr<vrdf::MemoryStore> data = std::make_shared<vrdf::MemoryStore>();
  std::shared_ptr<vrdf::MemoryStore> prov = std::make_shared<vrdf::MemoryStore>();
  StepClock clock{vrdf::parse_timestamp("2024-09-16T10:00:00Z")};
  std::shared_ptr<vrdf::CurationService> service;

  explicit ServiceFixture(bool load_catalog = true) {
    if (load_catalog) data->load_quads(catalog_data());
    service = std::make_shared<vrdf::CurationService>(data, prov, config());
  }

  vrdf::ServiceConfig config() const {
    vrdf::ServiceConfig cfg;
    cfg.rules = catalog_rules();
    cfg.schemas = catalog_shapes();
    cfg.base_iri = ns::meta.substr(0, ns::meta.size() - 1);
    cfg.clock = clock;
    return cfg;
  }
};

inline vrdf::Term iri(const std::string& s) { return vrdf::Term::iri(s); }
inline vrdf::Term lit(const std::string& s) { return vrdf::Term::literal(s); }

}  // namespace fixture
