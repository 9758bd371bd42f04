#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vrdf/display_config.hpp"
#include "vrdf/error.hpp"
#include "vrdf/provenance.hpp"
#include "vrdf/shacl.hpp"
#include "vrdf/store.hpp"
#include "vrdf/time_travel.hpp"

namespace vrdf {

/// An edit or creation was rejected by the shapes; carries the full report.
class ValidationFailed : public InvalidRequest {
 public:
  explicit ValidationFailed(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

struct ServiceConfig {
  std::vector<DisplayRule> rules;
  std::vector<ShapeSchema> schemas;
  /// Prefix for minted IRIs: `{base_iri}/{lowercase class local name}/{n}`.
  std::string base_iri = "https://example.org/data";
  /// Graph that receives statements of new entities; absent means the default graph.
  std::optional<Term> data_graph;
  /// Compact forms used in search suggestions, prefix -> namespace.
  std::map<std::string, std::string> prefixes = {{"omid", "https://w3id.org/oc/meta/"}};
  /// Injected for tests; readings earlier than an entity's head are clamped.
  std::function<Timestamp()> clock = now_utc;
};

struct CategoryCount {
  std::string class_iri;
  std::string display_name;
  std::size_t count = 0;
};

enum class SortDir { asc, desc };

struct CatalogItem {
  Term entity;
  std::string display;
};

struct CatalogPage {
  std::string category;
  std::size_t total = 0;
  std::size_t page = 1;
  std::size_t per_page = 50;
  std::optional<std::string> sort_by;
  SortDir sort_dir = SortDir::asc;
  std::vector<CatalogItem> items;
};

struct FieldView {
  std::string property;
  std::string label;
  std::vector<RenderedValue> values;
  std::vector<Term> raw_values;
  std::optional<FormField> form;
  bool can_add = true;
  bool can_remove = true;
};

struct EntityView {
  Term entity;
  std::string display;
  std::vector<std::string> types;
  /// Class whose display rule was applied, or the first type without one.
  std::optional<std::string> rule_class;
  std::vector<FieldView> fields;
  std::size_t head = 0;
};

struct EditRequest {
  Term entity;
  std::size_t expected_head = 0;
  std::vector<std::pair<std::string, Term>> additions;
  std::vector<std::pair<std::string, Term>> removals;
  Term agent;
  std::optional<Term> primary_source;
};

struct NestedDraft;

/// Values for a new entity. Nested drafts become their own entities, linked
/// from the parent through `path`.
struct EntityDraft {
  std::string class_iri;
  std::vector<std::pair<std::string, Term>> values;
  std::vector<NestedDraft> nested;
};

struct NestedDraft {
  std::string path;
  EntityDraft draft;
};

struct CreateResult {
  Term entity;
  /// Creation snapshot of the top-level entity.
  Snapshot snapshot;
  /// Every entity created, top-level first.
  std::vector<Term> created;
};

struct Suggestion {
  Term entity;
  std::string display;
  /// 0 for a prefix match, 1 for an inner match.
  int score = 0;
  std::string matched_value;
};

struct ChangeLine {
  std::string property;
  std::string label;
  std::string value;
};

struct HistoryEntry {
  std::size_t sequence = 0;
  Term snapshot;
  Timestamp generated_at;
  std::optional<Timestamp> invalidated_at;
  Term agent;
  std::optional<Term> primary_source;
  std::string description;
  bool is_creation = false;
  bool is_deletion = false;
  std::vector<ChangeLine> additions;
  std::vector<ChangeLine> deletions;
};

struct RestoreOutcome {
  Snapshot snapshot;
  /// Linked entities reverted alongside, with the sequence they went back to.
  std::vector<std::pair<Term, std::size_t>> cascaded;
};

/// Catalog browsing, editing with validation and provenance, search, history
/// and restore over a data store and a provenance store (which may be the
/// same store). Methods are safe to call from several threads.
class CurationService {
 public:
  CurationService(std::shared_ptr<Store> data, std::shared_ptr<Store> prov, ServiceConfig config);

  const ServiceConfig& config() const { return config_; }
  Store& data() { return *data_; }
  Store& prov() { return *prov_; }

  std::vector<CategoryCount> list_categories();

  /// Throws InvalidRequest for page 0, a page size outside {20, 50, 100} or a
  /// sort key the class does not offer; NotFound for an unknown class.
  CatalogPage get_page(const std::string& class_iri, std::size_t page = 1, std::size_t per_page = 50,
                       const std::optional<std::string>& sort_by = std::nullopt, SortDir dir = SortDir::asc);

  /// Throws NotFound or EntityDeleted.
  EntityView get_entity(const Term& entity);

  /// Form description for a class; shapes first, display rule as fallback.
  std::vector<FormField> form_schema(const std::string& class_iri);

  /// Throws Conflict for a stale head, ValidationFailed, NotFound,
  /// EntityDeleted, InvalidRequest for a no-op edit, StoreError.
  Snapshot apply_edit(const EditRequest& req);

  CreateResult create_entity(const EntityDraft& draft, const Term& agent,
                             const std::optional<Term>& primary_source = std::nullopt);

  Snapshot delete_entity(const Term& entity, const Term& agent,
                         const std::optional<Term>& primary_source = std::nullopt);

  /// At most five suggestions. Throws InvalidRequest when the property is not
  /// searchable for the class; a short query yields no suggestions.
  std::vector<Suggestion> search_suggestions(const std::string& query, const std::string& property,
                                             const std::string& class_iri);

  /// Newest first. Throws NotFound when the entity has no history.
  std::vector<HistoryEntry> get_history(const Term& entity);

  RestoreOutcome restore_version(const Term& entity, std::size_t k, const Term& agent,
                                 const std::optional<Term>& primary_source = std::nullopt);

  std::vector<VaultEntry> list_vault();

  /// Finishes or rolls back writes interrupted between the two stores.
  /// Returns the number of intents handled.
  std::size_t recover();

  /// Human-readable label of any entity (display rule of its types).
  std::string display_of(const Term& entity);

 private:
  struct Plan;
  class LockSet;

  std::set<std::string> types_of(const Term& entity);
  const DisplayRule* rule_for(const Term& entity);
  Timestamp clock_for(const ProvenanceChain& chain);
  ProvenanceChain with_baseline(ProvenanceChain chain, const QuadSet& current, const Term& agent, Timestamp now);
  std::optional<Term> graph_for(const QuadSet& current) const;
  Term mint(const std::string& class_iri);
  struct RestorePlan;
  RestorePlan plan_restore(const Term& entity, std::size_t k, const Term& agent,
                           const std::optional<Term>& primary_source);
  void commit(const std::vector<Plan>& plans);
  std::size_t recover_entity(const Term& entity);
  std::string compact(const Term& iri) const;
  std::string label_for(const std::string& property, const DisplayRule* rule, const std::set<std::string>& types) const;

  std::shared_ptr<Store> data_;
  std::shared_ptr<Store> prov_;
  ServiceConfig config_;

  std::mutex locks_mutex_;
  std::map<std::string, std::weak_ptr<std::mutex>> entity_locks_;
  std::mutex mint_mutex_;
};

}  // namespace vrdf
