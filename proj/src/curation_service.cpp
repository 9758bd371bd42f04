#include "vrdf/curation_service.hpp"

#include <algorithm>
#include <deque>
#include <regex>
#include <tuple>

#include "vrdf/log.hpp"
#include "vrdf/sparql.hpp"
#include "vrdf/vocab.hpp"

namespace vrdf {

namespace {

namespace v = vocab;

constexpr std::string_view kSubjectVar = "vrdf_subject";
constexpr int kMaxSuggestions = 5;
constexpr int kRestoreAttempts = 5;
const std::string kImportedState = "imported state";

std::string summarize(const ValidationReport& report) {
  std::string msg = "validation failed";
  std::size_t shown = 0;
  for (const auto& vi : report.violations) {
    msg += shown == 0 ? ": " : "; ";
    msg += vi.message;
    if (++shown == 3) break;
  }
  if (report.violations.size() > shown) msg += " (+" + std::to_string(report.violations.size() - shown) + " more)";
  return msg;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::size_t codepoints(const std::string& s) {
  return std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; });
}

/// Group pattern binding ?var to every instance of `cls` in any graph.
std::string members_pattern(const std::string& var, const std::string& cls) {
  std::string t = "?" + var + " <" + v::rdf::type + "> <" + cls + ">";
  return "{ { " + t + " } UNION { GRAPH ?vrdf_tg { " + t + " } } }";
}

/// Group pattern binding ?obj to values of `prop` on ?subj in any graph.
std::string values_pattern(const std::string& subj, const std::string& prop, const std::string& obj) {
  std::string t = "?" + subj + " <" + prop + "> ?" + obj;
  return "{ { " + t + " } UNION { GRAPH ?vrdf_vg { " + t + " } } }";
}

std::vector<Term> column(const SelectResult& r, const std::string& var) {
  std::vector<Term> out;
  for (const auto& row : r.rows) {
    if (const Term* t = SelectResult::get(row, var)) out.push_back(*t);
  }
  return out;
}

Term intent_iri(const Term& entity) { return Term::iri(entity.value() + "/prov/intent"); }

/// Adds `?vrdf_subject` to the outer projection of a SELECT.
std::string project_subject(const std::string& query) {
  static const std::regex select_kw(R"(\bSELECT(\s+(DISTINCT|REDUCED))?\s+)", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(query, m, select_kw)) return query;
  std::size_t at = m.position(0) + m.length(0);
  if (at < query.size() && query[at] == '*') return query;
  return query.substr(0, at) + "?" + std::string(kSubjectVar) + " " + query.substr(at);
}

QuadSet objects_of(const QuadSet& quads, const Term& s, const std::string& p) {
  QuadSet out;
  for (const auto& q : quads) {
    if (q.subject == s && q.predicate.value() == p) out.insert(q);
  }
  return out;
}

std::set<std::string> types_in(const QuadSet& quads, const Term& s) {
  std::set<std::string> out;
  for (const auto& q : objects_of(quads, s, v::rdf::type)) {
    if (q.object.is_iri()) out.insert(q.object.value());
  }
  return out;
}

}  // namespace

ValidationFailed::ValidationFailed(ValidationReport report)
    : InvalidRequest(summarize(report)), report_(std::move(report)) {}

struct CurationService::Plan {
  Term entity;
  ProvenanceChain before;
  ProvenanceChain after;
  Delta delta;
};

struct CurationService::RestorePlan {
  std::vector<Plan> plans;
  std::vector<std::pair<Term, std::size_t>> cascaded;
  std::set<std::string> entities;
};

/// Holds the entity locks for a set of IRIs, taken in sorted order so that
/// overlapping multi-entity operations cannot deadlock.
class CurationService::LockSet {
 public:
  LockSet(CurationService& svc, const std::set<std::string>& iris) {
    {
      std::lock_guard guard(svc.locks_mutex_);
      for (const auto& iri : iris) {
        auto& slot = svc.entity_locks_[iri];
        auto m = slot.lock();
        if (!m) {
          m = std::make_shared<std::mutex>();
          slot = m;
        }
        held_.push_back(std::move(m));
      }
      // Drop entries nobody holds any more so the map stays small.
      for (auto it = svc.entity_locks_.begin(); it != svc.entity_locks_.end();) {
        it = it->second.expired() ? svc.entity_locks_.erase(it) : std::next(it);
      }
    }
    for (auto& m : held_) m->lock();
  }

  ~LockSet() {
    for (auto it = held_.rbegin(); it != held_.rend(); ++it) (*it)->unlock();
  }

  LockSet(const LockSet&) = delete;
  LockSet& operator=(const LockSet&) = delete;

 private:
  std::vector<std::shared_ptr<std::mutex>> held_;
};

CurationService::CurationService(std::shared_ptr<Store> data, std::shared_ptr<Store> prov, ServiceConfig config)
    : data_(std::move(data)), prov_(std::move(prov)), config_(std::move(config)) {
  if (!data_ || !prov_) throw ConfigError("curation service needs a data store and a provenance store");
  if (!is_absolute_iri(config_.base_iri)) throw ConfigError("base IRI '" + config_.base_iri + "' is not absolute");
  while (!config_.base_iri.empty() && config_.base_iri.back() == '/') config_.base_iri.pop_back();
  if (!config_.clock) config_.clock = now_utc;
}

std::set<std::string> CurationService::types_of(const Term& entity) {
  if (!entity.is_iri()) return {};
  std::string t = entity.to_string() + " <" + v::rdf::type + "> ?t";
  auto r = data_->select("SELECT DISTINCT ?t WHERE { { " + t + " } UNION { GRAPH ?g { " + t + " } } }");
  std::set<std::string> out;
  for (const auto& term : column(r, "t")) {
    if (term.is_iri()) out.insert(term.value());
  }
  return out;
}

const DisplayRule* CurationService::rule_for(const Term& entity) {
  return resolve_rule(types_of(entity), config_.rules);
}

std::string CurationService::display_of(const Term& entity) {
  return render_uri_display(entity, rule_for(entity), *data_);
}

Timestamp CurationService::clock_for(const ProvenanceChain& chain) {
  Timestamp t = config_.clock();
  if (!chain.empty()) t = std::max(t, chain.head().generated_at);
  return t;
}

ProvenanceChain CurationService::with_baseline(ProvenanceChain chain, const QuadSet& current, const Term& agent,
                                               Timestamp now) {
  // Entities loaded before the service existed have data but no history.
  // Their first change records the loaded state as the creation snapshot.
  if (!chain.empty() || current.empty()) return chain;
  return record_snapshot(chain, Delta(current, {}), agent, std::nullopt, kImportedState, now);
}

std::optional<Term> CurationService::graph_for(const QuadSet& current) const {
  for (const auto& q : current) {
    if (q.predicate.value() == v::rdf::type) return q.graph;
  }
  if (!current.empty()) return current.begin()->graph;
  return config_.data_graph;
}

std::string CurationService::compact(const Term& iri) const {
  const std::pair<const std::string, std::string>* best = nullptr;
  for (const auto& entry : config_.prefixes) {
    if (iri.value().rfind(entry.second, 0) == 0 && (!best || entry.second.size() > best->second.size())) {
      best = &entry;
    }
  }
  if (!best) return iri.value();
  return best->first + ":" + iri.value().substr(best->second.size());
}

std::string CurationService::label_for(const std::string& property, const DisplayRule* rule,
                                      const std::set<std::string>& types) const {
  if (rule) {
    if (const PropertyDisplay* pd = rule->property(property)) return pd->display_name;
  }
  for (const auto& schema : config_.schemas) {
    if (!types.count(schema.target_class)) continue;
    for (const auto& c : schema.constraints) {
      if (c.path == property && c.name) return *c.name;
    }
  }
  return rule ? local_name(property) : property;
}

Term CurationService::mint(const std::string& class_iri) {
  std::lock_guard guard(mint_mutex_);
  std::string local = lower(local_name(class_iri));
  if (local.empty()) local = "entity";
  const Term counter = Term::iri(config_.base_iri + "/" + local + "/");
  const Term graph = Term::iri(std::string(v::sys::ns) + "counters");
  const Term last_id = Term::iri(v::sys::lastId);

  auto r = prov_->select("SELECT ?n WHERE { GRAPH " + graph.to_string() + " { " + counter.to_string() + " " +
                         last_id.to_string() + " ?n } }");
  std::optional<Term> old;
  unsigned long long n = 0;
  if (!r.rows.empty()) {
    old = *SelectResult::get(r.rows.front(), "n");
    n = std::stoull(old->value());
  }
  for (;;) {
    Term candidate = Term::iri(counter.value() + std::to_string(++n));
    std::string s = candidate.to_string();
    bool used = data_->ask("ASK { { " + s + " ?p ?o } UNION { GRAPH ?g { " + s + " ?p ?o } } }") ||
                prov_->ask("ASK { GRAPH " + prov_graph_iri(candidate).to_string() + " { ?a ?b ?c } }");
    if (!used) break;
  }
  QuadSet del, ins;
  if (old) del.emplace(counter, last_id, *old, graph);
  ins.emplace(counter, last_id, Term::literal(std::to_string(n), v::xsd::integer), graph);
  prov_->update(to_update_text(Delta(ins, del)));
  return Term::iri(counter.value() + std::to_string(n));
}

std::size_t CurationService::recover_entity(const Term& entity) {
  const Term graph = prov_graph_iri(entity);
  const Term intent = intent_iri(entity);
  auto r = prov_->select("SELECT ?p ?o WHERE { GRAPH " + graph.to_string() + " { " + intent.to_string() +
                         " ?p ?o } }");
  if (r.rows.empty()) return 0;
  QuadSet intent_quads;
  std::optional<Term> pending, target;
  for (const auto& row : r.rows) {
    const Term& p = *SelectResult::get(row, "p");
    const Term& o = *SelectResult::get(row, "o");
    intent_quads.emplace(intent, p, o, graph);
    if (p.value() == v::sys::pendingUpdate) pending = o;
    if (p.value() == v::sys::targetSnapshot) target = o;
  }
  bool committed = target && prov_->ask("ASK { GRAPH " + graph.to_string() + " { " + target->to_string() + " <" +
                                        v::prov::specializationOf + "> ?e } }");
  if (!committed && pending) {
    Delta undo = invert(from_update_text(pending->value()));
    if (!undo.empty()) data_->update(to_update_text(undo));
  }
  prov_->update(to_data_update(UpdateOperation::Kind::delete_data, intent_quads));
  return 1;
}

std::size_t CurationService::recover() {
  auto r = prov_->select("SELECT DISTINCT ?e WHERE { GRAPH ?g { ?i <" + v::rdf::type + "> <" + v::sys::WriteIntent +
                         "> ; <" + v::sys::forEntity + "> ?e } }");
  std::size_t handled = 0;
  for (const auto& e : column(r, "e")) {
    LockSet lock(*this, {e.value()});
    handled += recover_entity(e);
  }
  return handled;
}

void CurationService::commit(const std::vector<Plan>& plans) {
  for (const auto& p : plans) {
    if (prov_->ask("ASK { GRAPH " + prov_graph_iri(p.entity).to_string() + " { " + intent_iri(p.entity).to_string() +
                   " ?p ?o } }")) {
      recover_entity(p.entity);
    }
  }

  // 1. Write-ahead intents: enough to undo the data change after a crash.
  QuadSet intents, data_ins, data_del;
  for (const auto& p : plans) {
    Term g = prov_graph_iri(p.entity), i = intent_iri(p.entity);
    intents.emplace(i, Term::iri(v::rdf::type), Term::iri(v::sys::WriteIntent), g);
    intents.emplace(i, Term::iri(v::sys::forEntity), p.entity, g);
    intents.emplace(i, Term::iri(v::sys::pendingUpdate), Term::literal(to_update_text(p.delta)), g);
    intents.emplace(i, Term::iri(v::sys::targetSnapshot), p.after.head().id, g);
    data_ins.insert(p.delta.insertions().begin(), p.delta.insertions().end());
    data_del.insert(p.delta.deletions().begin(), p.delta.deletions().end());
  }
  Delta data_delta(std::move(data_ins), std::move(data_del));
  auto drop_intents = [&] {
    try {
      prov_->update(to_data_update(UpdateOperation::Kind::delete_data, intents));
    } catch (const std::exception& e) {
      warn(std::string("could not remove write intents, run recovery: ") + e.what());
    }
  };
  // Applying the inverse is safe whether or not the forward update landed:
  // insertions were absent before and deletions were present.
  auto roll_back = [&] {
    try {
      if (!data_delta.empty()) data_->update(to_update_text(invert(data_delta)));
    } catch (const std::exception& e) {
      warn(std::string("rollback of data update failed, intents kept for recovery: ") + e.what());
      return;
    }
    drop_intents();
  };

  try {
    prov_->update(to_data_update(UpdateOperation::Kind::insert_data, intents));
  } catch (...) {
    // The intents may have landed before the error; nothing else has been written yet.
    drop_intents();
    throw;
  }

  // 2. Data.
  try {
    if (!data_delta.empty()) data_->update(to_update_text(data_delta));
  } catch (...) {
    roll_back();
    throw;
  }

  // 3. Snapshots, head invalidation and intent removal in one request.
  QuadSet prov_ins, prov_del = intents;
  for (const auto& p : plans) {
    Delta d = diff(to_prov_quads(p.before), to_prov_quads(p.after));
    prov_ins.insert(d.insertions().begin(), d.insertions().end());
    prov_del.insert(d.deletions().begin(), d.deletions().end());
  }
  try {
    prov_->update(to_update_text(Delta(std::move(prov_ins), std::move(prov_del))));
  } catch (...) {
    // The request may have landed even though the response was lost.
    std::exception_ptr failure = std::current_exception();
    bool known = true, landed = false;
    try {
      const Plan& last = plans.back();
      landed = prov_->ask("ASK { GRAPH " + prov_graph_iri(last.entity).to_string() + " { " +
                          last.after.head().id.to_string() + " ?p ?o } }");
    } catch (const std::exception&) {
      known = false;  // leave the intents for recover()
    }
    if (known && landed) return;
    if (known) roll_back();
    std::rethrow_exception(failure);
  }
}

std::vector<CategoryCount> CurationService::list_categories() {
  std::string t = "?e <" + v::rdf::type + "> ?c";
  auto r = data_->select("SELECT ?c (COUNT(DISTINCT ?e) AS ?n) WHERE { { " + t + " } UNION { GRAPH ?g { " + t +
                         " } } } GROUP BY ?c");
  std::vector<CategoryCount> out;
  for (const auto& row : r.rows) {
    const Term* c = SelectResult::get(row, "c");
    const Term* n = SelectResult::get(row, "n");
    if (!c || !n || !c->is_iri()) continue;
    const std::string& cls = c->value();
    if (cls.rfind(v::prov::ns, 0) == 0 || cls.rfind(v::sys::ns, 0) == 0) continue;
    const DisplayRule* rule = resolve_rule({cls}, config_.rules);
    if (rule && !rule->should_be_displayed) continue;
    out.push_back({cls, class_label(cls, config_.rules), std::stoull(n->value())});
  }
  std::sort(out.begin(), out.end(), [](const CategoryCount& a, const CategoryCount& b) {
    if (a.display_name != b.display_name) return a.display_name < b.display_name;
    return a.class_iri < b.class_iri;
  });
  return out;
}

CatalogPage CurationService::get_page(const std::string& class_iri, std::size_t page, std::size_t per_page,
                                      const std::optional<std::string>& sort_by, SortDir dir) {
  if (page == 0) throw InvalidRequest("page numbers start at 1");
  if (per_page != 20 && per_page != 50 && per_page != 100) {
    throw InvalidRequest("per_page must be 20, 50 or 100, not " + std::to_string(per_page));
  }
  if (!is_absolute_iri(class_iri)) throw InvalidRequest("class '" + class_iri + "' is not an absolute IRI");
  const DisplayRule* rule = resolve_rule({class_iri}, config_.rules);
  if (sort_by) {
    auto keys = rule ? rule->sort_keys() : std::vector<std::string>{};
    if (std::find(keys.begin(), keys.end(), *sort_by) == keys.end()) {
      throw InvalidRequest("cannot sort " + class_iri + " by " + *sort_by);
    }
  }

  auto members = column(data_->select("SELECT DISTINCT ?e WHERE " + members_pattern("e", class_iri)), "e");
  if (members.empty() && !rule) throw NotFound("no category " + class_iri);

  // Entities lacking a sort value go last in either direction.
  struct Keyed {
    Term entity;
    std::optional<std::string> key;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(members.size());
  if (sort_by) {
    auto r = data_->select("SELECT ?e ?v WHERE { " + members_pattern("e", class_iri) + " " +
                           values_pattern("e", *sort_by, "v") + " }");
    std::map<Term, std::string> best;
    for (const auto& row : r.rows) {
      const Term* e = SelectResult::get(row, "e");
      const Term* val = SelectResult::get(row, "v");
      if (!e || !val) continue;
      std::string k = lower(val->value());
      auto [it, fresh] = best.emplace(*e, k);
      if (!fresh) it->second = dir == SortDir::asc ? std::min(it->second, k) : std::max(it->second, k);
    }
    for (const auto& m : members) {
      auto it = best.find(m);
      keyed.push_back({m, it == best.end() ? std::nullopt : std::optional<std::string>(it->second)});
    }
  } else {
    for (const auto& m : members) keyed.push_back({m, std::nullopt});
  }
  std::sort(keyed.begin(), keyed.end(), [&](const Keyed& a, const Keyed& b) {
    if (a.key.has_value() != b.key.has_value()) return a.key.has_value();
    if (a.key && *a.key != *b.key) return dir == SortDir::asc ? *a.key < *b.key : *a.key > *b.key;
    if (!sort_by && dir == SortDir::desc) return b.entity < a.entity;
    return a.entity < b.entity;
  });

  CatalogPage out;
  out.category = class_iri;
  out.total = members.size();
  out.page = page;
  out.per_page = per_page;
  out.sort_by = sort_by;
  out.sort_dir = dir;
  std::size_t start = (page - 1) * per_page;
  for (std::size_t i = start; i < keyed.size() && i < start + per_page; ++i) {
    out.items.push_back({keyed[i].entity, display_of(keyed[i].entity)});
  }
  return out;
}

std::vector<FormField> CurationService::form_schema(const std::string& class_iri) {
  const DisplayRule* rule = resolve_rule({class_iri}, config_.rules);
  std::vector<FormField> out;
  std::set<std::string> seen;
  for (const auto& schema : config_.schemas) {
    if (schema.target_class != class_iri) continue;
    for (auto& f : compile_form(schema, rule)) {
      if (seen.insert(f.path).second) out.push_back(std::move(f));
    }
  }
  if (!out.empty() || !rule) return out;
  // No shape: every displayed, directly stored property becomes a free field.
  for (const auto& pd : rule->display_properties) {
    if (!pd.should_be_displayed || pd.property == v::rdf::type || pd.fetch_value_from_query) continue;
    FormField f;
    f.path = pd.property;
    f.label = pd.display_name;
    f.widget = pd.input_type == "textarea" ? Widget::textarea : Widget::text;
    out.push_back(std::move(f));
  }
  return out;
}

EntityView CurationService::get_entity(const Term& entity) {
  if (!entity.is_iri()) throw InvalidRequest("entity must be an IRI");
  QuadSet current = entity_quads(*data_, entity);
  if (current.empty()) {
    if (load_chain(*prov_, entity).is_deleted()) {
      throw EntityDeleted(entity.value() + " was deleted; its last version is in the Time Vault (/api/vault)");
    }
    throw NotFound("no entity " + entity.value());
  }
  EntityView view{entity, "", {}, std::nullopt, {}, load_chain(*prov_, entity).head_sequence()};
  auto types = types_in(current, entity);
  view.types.assign(types.begin(), types.end());
  const DisplayRule* rule = resolve_rule(types, config_.rules);
  view.display = render_uri_display(entity, rule, *data_);
  if (rule) {
    view.rule_class = rule->class_iri;
  } else if (!types.empty()) {
    view.rule_class = *types.begin();
  }

  std::map<std::string, FormField> forms;
  for (const auto& schema : config_.schemas) {
    if (!types.count(schema.target_class)) continue;
    for (auto& f : compile_form(schema, rule)) forms.emplace(f.path, std::move(f));
  }

  std::set<std::string> done;
  auto add_field = [&](const std::string& prop, std::vector<RenderedValue> values) {
    FieldView f;
    f.property = prop;
    f.label = label_for(prop, rule, types);
    for (const auto& q : objects_of(current, entity, prop)) f.raw_values.push_back(q.object);
    f.values = std::move(values);
    if (auto it = forms.find(prop); it != forms.end()) {
      f.form = it->second;
      f.can_add = !f.form->max || f.raw_values.size() < *f.form->max;
      f.can_remove = f.raw_values.size() > f.form->min;
    } else {
      f.can_remove = !f.raw_values.empty();
    }
    if (prop == v::rdf::type) f.can_add = f.can_remove = false;
    done.insert(prop);
    view.fields.push_back(std::move(f));
  };
  auto raw_render = [&](const std::string& prop) {
    std::vector<RenderedValue> vals;
    for (const auto& q : objects_of(current, entity, prop)) {
      if (prop == v::rdf::type && q.object.is_iri()) {
        vals.push_back({class_label(q.object.value(), config_.rules), q.object});
      } else {
        vals.push_back({q.object.value(), q.object.is_iri() ? std::optional<Term>(q.object) : std::nullopt});
      }
    }
    return vals;
  };

  if (rule) {
    for (const auto& pd : rule->display_properties) {
      if (!pd.should_be_displayed || done.count(pd.property)) continue;
      bool raw = pd.property == v::rdf::type && !pd.fetch_value_from_query;
      add_field(pd.property, raw ? raw_render(pd.property) : render_property_values(entity, pd, *data_));
    }
  }
  for (const auto& [path, form] : forms) {
    if (!done.count(path)) add_field(path, raw_render(path));
  }
  if (!rule) {
    std::set<std::string> present;
    for (const auto& q : current) {
      if (q.subject == entity) present.insert(q.predicate.value());
    }
    for (const auto& p : present) {
      if (!done.count(p)) add_field(p, raw_render(p));
    }
  }
  return view;
}

Snapshot CurationService::apply_edit(const EditRequest& req) {
  const Term& e = req.entity;
  if (!e.is_iri()) throw InvalidRequest("entity must be an IRI");
  if (req.additions.empty() && req.removals.empty()) throw InvalidRequest("edit has no additions or removals");
  LockSet lock(*this, {e.value()});

  ProvenanceChain chain = load_chain(*prov_, e);
  QuadSet current = entity_quads(*data_, e);
  if (chain.is_deleted()) throw EntityDeleted(e.value() + " was deleted; restore it from the Time Vault first");
  if (chain.empty() && current.empty()) throw NotFound("no entity " + e.value());
  if (req.expected_head != chain.head_sequence()) {
    throw Conflict("stale edit of " + e.value() + ": expected head " + std::to_string(req.expected_head) +
                   ", current head is " + std::to_string(chain.head_sequence()));
  }

  QuadSet after = current;
  for (const auto& [path, value] : req.removals) {
    auto matches = objects_of(after, e, path);
    std::size_t removed = 0;
    for (const auto& q : matches) {
      if (q.object == value) {
        after.erase(q);
        ++removed;
      }
    }
    if (removed == 0) throw InvalidRequest(e.value() + " has no value " + value.to_string() + " for " + path);
  }
  auto graph = graph_for(current);
  for (const auto& [path, value] : req.additions) {
    if (value.is_blank()) throw InvalidRequest("blank nodes cannot be added; mint an entity instead");
    if (!is_absolute_iri(path)) throw InvalidRequest("property '" + path + "' is not an absolute IRI");
    after.emplace(e, Term::iri(path), value, graph);
  }
  Delta delta = diff(current, after);
  if (delta.empty()) throw InvalidRequest("edit of " + e.value() + " changes nothing");

  EntityGraph eg(e);
  eg.quads = after;
  auto report = validate_all(eg, config_.schemas, [this](const Term& t) { return types_of(t); });
  if (!report.conforms()) throw ValidationFailed(std::move(report));

  Timestamp now = clock_for(chain);
  ProvenanceChain next = record_snapshot(with_baseline(chain, current, req.agent, now), delta, req.agent,
                                         req.primary_source, "modified", now);
  commit({Plan{e, chain, next, delta}});
  return next.head();
}

CreateResult CurationService::create_entity(const EntityDraft& draft, const Term& agent,
                                            const std::optional<Term>& primary_source) {
  const DisplayRule* top_rule = resolve_rule({draft.class_iri}, config_.rules);
  if (top_rule && !top_rule->should_be_displayed) {
    throw InvalidRequest(draft.class_iri + " is not shown in the catalog and cannot be created directly");
  }

  struct Pending {
    Term iri;
    QuadSet quads;
  };
  std::vector<Pending> pending;
  std::map<Term, std::set<std::string>> pending_types;
  std::function<Term(const EntityDraft&)> build = [&](const EntityDraft& d) -> Term {
    if (!is_absolute_iri(d.class_iri)) throw InvalidRequest("class '" + d.class_iri + "' is not an absolute IRI");
    Term iri = mint(d.class_iri);
    std::size_t slot = pending.size();
    pending.push_back({iri, {}});
    pending_types[iri] = {d.class_iri};
    QuadSet quads;
    quads.emplace(iri, Term::iri(v::rdf::type), Term::iri(d.class_iri), config_.data_graph);
    for (const auto& [path, value] : d.values) {
      if (value.is_blank()) throw InvalidRequest("blank nodes cannot be stored; use a nested entity");
      if (!is_absolute_iri(path)) throw InvalidRequest("property '" + path + "' is not an absolute IRI");
      quads.emplace(iri, Term::iri(path), value, config_.data_graph);
      if (path == v::rdf::type && value.is_iri()) pending_types[iri].insert(value.value());
    }
    for (const auto& n : d.nested) {
      Term child = build(n.draft);
      quads.emplace(iri, Term::iri(n.path), child, config_.data_graph);
    }
    pending[slot].quads = std::move(quads);
    return iri;
  };
  build(draft);

  TypeLookup lookup = [&](const Term& t) {
    auto it = pending_types.find(t);
    return it != pending_types.end() ? it->second : types_of(t);
  };
  ValidationReport report;
  for (const auto& p : pending) {
    EntityGraph eg(p.iri);
    eg.quads = p.quads;
    auto r = validate_all(eg, config_.schemas, lookup);
    report.violations.insert(report.violations.end(), r.violations.begin(), r.violations.end());
  }
  if (!report.conforms()) throw ValidationFailed(std::move(report));

  std::set<std::string> iris;
  for (const auto& p : pending) iris.insert(p.iri.value());
  LockSet lock(*this, iris);
  Timestamp now = config_.clock();
  std::vector<Plan> plans;
  std::vector<Term> created;
  for (const auto& p : pending) {
    ProvenanceChain empty(p.iri);
    Delta d(p.quads, {});
    plans.push_back({p.iri, empty, record_snapshot(empty, d, agent, primary_source, "created", now), d});
    created.push_back(p.iri);
  }
  commit(plans);
  return {pending.front().iri, plans.front().after.head(), std::move(created)};
}

Snapshot CurationService::delete_entity(const Term& entity, const Term& agent,
                                        const std::optional<Term>& primary_source) {
  if (!entity.is_iri()) throw InvalidRequest("entity must be an IRI");
  LockSet lock(*this, {entity.value()});
  ProvenanceChain chain = load_chain(*prov_, entity);
  QuadSet current = entity_quads(*data_, entity);
  if (chain.is_deleted()) throw EntityDeleted(entity.value() + " is already deleted");
  if (current.empty()) throw NotFound("no entity " + entity.value());
  Timestamp now = clock_for(chain);
  Delta delta({}, current);
  ProvenanceChain next = record_snapshot(with_baseline(chain, current, agent, now), delta, agent, primary_source,
                                         "deleted", now, SnapshotKind::deletion);
  commit({Plan{entity, chain, next, delta}});
  return next.head();
}

std::vector<Suggestion> CurationService::search_suggestions(const std::string& query, const std::string& property,
                                                            const std::string& class_iri) {
  const DisplayRule* rule = resolve_rule({class_iri}, config_.rules);
  const PropertyDisplay* pd = rule ? rule->property(property) : nullptr;
  if (!pd || !pd->supports_search) throw InvalidRequest(property + " is not searchable for " + class_iri);
  if (codepoints(query) < static_cast<std::size_t>(std::max(pd->min_chars_for_search, 1))) return {};

  auto member_list = column(data_->select("SELECT DISTINCT ?e WHERE " + members_pattern("e", class_iri)), "e");
  std::set<Term> members(member_list.begin(), member_list.end());

  struct Hit {
    Term entity;
    std::string value;
  };
  std::vector<Hit> hits;
  if (pd->fetch_value_from_query) {
    std::string text =
        project_subject(substitute_placeholders(pd->fetch_value_from_query->text, "?" + std::string(kSubjectVar)));
    SelectResult r;
    try {
      r = data_->select(text);
    } catch (const Error& e) {
      warn("search query for " + property + " failed: " + e.what());
      return {};
    }
    std::vector<std::string> vars;
    for (const auto& var : r.variables) {
      if (var != kSubjectVar) vars.push_back(var);
    }
    if (vars.empty()) return {};
    for (const auto& row : r.rows) {
      const Term* s = SelectResult::get(row, std::string(kSubjectVar));
      const Term* val = SelectResult::get(row, vars[0]);
      if (!s || !val || !members.count(*s)) continue;
      Term who = *s;
      if (pd->search_target == SearchTarget::self && vars.size() > 1) {
        const Term* target = SelectResult::get(row, vars[1]);
        if (target && target->is_iri()) who = *target;
      }
      hits.push_back({who, val->value()});
    }
  } else {
    auto r = data_->select("SELECT ?e ?v WHERE { " + members_pattern("e", class_iri) + " " +
                           values_pattern("e", property, "v") + " }");
    for (const auto& row : r.rows) {
      const Term* e = SelectResult::get(row, "e");
      const Term* val = SelectResult::get(row, "v");
      if (e && val && val->is_literal()) hits.push_back({*e, val->value()});
    }
  }

  const std::string needle = lower(query);
  struct Ranked {
    int score;
    std::size_t length;
    std::string value;
  };
  std::map<Term, Ranked> best;
  for (const auto& h : hits) {
    auto pos = lower(h.value).find(needle);
    if (pos == std::string::npos) continue;
    Ranked rk{pos == 0 ? 0 : 1, codepoints(h.value), h.value};
    auto [it, fresh] = best.emplace(h.entity, rk);
    if (!fresh && std::tie(rk.score, rk.length, rk.value) <
                      std::tie(it->second.score, it->second.length, it->second.value)) {
      it->second = rk;
    }
  }
  std::vector<std::pair<Term, Ranked>> ranked(best.begin(), best.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return std::tie(a.second.score, a.second.length, a.second.value, a.first) <
           std::tie(b.second.score, b.second.length, b.second.value, b.first);
  });
  if (ranked.size() > kMaxSuggestions) ranked.erase(ranked.begin() + kMaxSuggestions, ranked.end());

  std::vector<Suggestion> out;
  for (auto& [entity, rk] : ranked) {
    std::string label = display_of(entity) + " [" + compact(entity) + "]";
    out.push_back({entity, std::move(label), rk.score, rk.value});
  }
  return out;
}

std::vector<HistoryEntry> CurationService::get_history(const Term& entity) {
  ProvenanceChain chain = load_chain(*prov_, entity);
  if (chain.empty()) {
    if (!entity_quads(*data_, entity).empty()) return {};
    throw NotFound("no history for " + entity.value());
  }
  std::set<std::string> types;
  for (const auto& s : chain.snapshots) {
    for (const auto& q : s.delta.insertions()) {
      if (q.subject == entity && q.predicate.value() == v::rdf::type && q.object.is_iri()) {
        types.insert(q.object.value());
      }
    }
  }
  const DisplayRule* rule = resolve_rule(types, config_.rules);

  std::map<Term, std::string> shown;
  auto render = [&](const Quad& q) -> std::string {
    if (q.object.is_literal()) return q.object.value();
    if (q.predicate.value() == v::rdf::type) return class_label(q.object.value(), config_.rules);
    auto [it, fresh] = shown.emplace(q.object, "");
    if (fresh) it->second = display_of(q.object);
    return it->second;
  };
  auto lines = [&](const QuadSet& quads) {
    std::vector<ChangeLine> out;
    for (const auto& q : quads) {
      out.push_back({q.predicate.value(), label_for(q.predicate.value(), rule, types), render(q)});
    }
    return out;
  };

  std::vector<HistoryEntry> out;
  QuadSet state;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Snapshot& s = chain.snapshots[i];
    state = vrdf::apply(s.delta, state);
    out.push_back({.sequence = s.sequence,
                   .snapshot = s.id,
                   .generated_at = s.generated_at,
                   .invalidated_at = s.invalidated_at,
                   .agent = s.agent,
                   .primary_source = s.primary_source,
                   .description = s.description,
                   .is_creation = i == 0,
                   .is_deletion = i > 0 && state.empty(),
                   .additions = lines(s.delta.insertions()),
                   .deletions = lines(s.delta.deletions())});
  }
  std::reverse(out.begin(), out.end());
  return out;
}

CurationService::RestorePlan CurationService::plan_restore(const Term& entity, std::size_t k, const Term& agent,
                                                           const std::optional<Term>& primary_source) {
  RestorePlan plan;
  ProvenanceChain chain = load_chain(*prov_, entity);
  if (chain.empty()) throw NotFound("no history for " + entity.value());
  QuadSet current = entity_quads(*data_, entity);
  RestoreResult root = restore(chain, current, k, agent, clock_for(chain), primary_source);
  plan.plans.push_back({entity, chain, root.chain, root.delta});
  plan.entities.insert(entity.value());

  // Cascade one hop from the restored entity, continuing only through
  // entities whose class is marked dependent.
  const Timestamp at = chain.snapshots[k - 1].generated_at;
  std::deque<std::pair<Term, QuadSet>> frontier{{entity, root.quads}};
  while (!frontier.empty()) {
    auto [from, quads] = std::move(frontier.front());
    frontier.pop_front();
    for (const auto& [linked, seq] : cascade_targets(from, quads, *data_, *prov_, at)) {
      if (!plan.entities.insert(linked.value()).second) continue;
      ProvenanceChain lc = load_chain(*prov_, linked);
      std::size_t target = seq;
      if (target == 0 && lc.snapshots.front().description == kImportedState) {
        // The baseline was written at the first edit, but the imported state
        // itself predates every restore point.
        target = 1;
        if (lc.size() == 1) continue;
      }
      if (target == 0) {
        warn(linked.value() + " did not exist at the restore point and is left as is");
        continue;
      }
      QuadSet live = entity_quads(*data_, linked);
      if (target == 1 && seq == 0 && materialize(lc, live, 1).quads == live) continue;
      RestoreResult r = restore(lc, live, target, agent, clock_for(lc), primary_source);
      plan.plans.push_back({linked, lc, r.chain, r.delta});
      plan.cascaded.emplace_back(linked, target);
      const DisplayRule* rule = resolve_rule(types_in(r.quads, linked), config_.rules);
      if (rule && rule->dependent) frontier.emplace_back(linked, r.quads);
    }
  }
  return plan;
}

RestoreOutcome CurationService::restore_version(const Term& entity, std::size_t k, const Term& agent,
                                                const std::optional<Term>& primary_source) {
  if (!entity.is_iri()) throw InvalidRequest("entity must be an IRI");
  // The set of entities to lock depends on the state being read, so plan,
  // lock, re-plan, and retry if the set grew in between.
  std::set<std::string> want = plan_restore(entity, k, agent, primary_source).entities;
  for (int attempt = 0; attempt < kRestoreAttempts; ++attempt) {
    LockSet lock(*this, want);
    RestorePlan plan = plan_restore(entity, k, agent, primary_source);
    if (std::includes(want.begin(), want.end(), plan.entities.begin(), plan.entities.end())) {
      commit(plan.plans);
      return {plan.plans.front().after.head(), std::move(plan.cascaded)};
    }
    want.insert(plan.entities.begin(), plan.entities.end());
  }
  throw Conflict("linked entities of " + entity.value() + " kept changing during restore");
}

std::vector<VaultEntry> CurationService::list_vault() { return vrdf::list_vault(*prov_); }

}  // namespace vrdf
