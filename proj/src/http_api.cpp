#include "vrdf/http_api.hpp"

#include <httplib.h>

#include <json.hpp>
#include <thread>

#include "vrdf/log.hpp"
#include "vrdf/vocab.hpp"

namespace vrdf {

namespace {

using json = nlohmann::json;

json term_json(const Term& t) {
  json j;
  switch (t.kind()) {
    case TermKind::iri:
      j["type"] = "uri";
      break;
    case TermKind::blank:
      j["type"] = "bnode";
      break;
    case TermKind::literal:
      j["type"] = "literal";
      if (!t.language().empty()) {
        j["xml:lang"] = t.language();
      } else if (t.datatype() != vocab::xsd::string) {
        j["datatype"] = t.datatype();
      }
      break;
  }
  j["value"] = t.value();
  return j;
}

/// Accepts a bare string (plain literal) or a SPARQL-results style term object.
Term term_from_json(const json& j) {
  if (j.is_string()) return Term::literal(j.get<std::string>());
  if (!j.is_object() || !j.contains("value") || !j["value"].is_string()) {
    throw InvalidRequest("a value must be a string or an object with 'type' and 'value'");
  }
  std::string value = j["value"];
  std::string type = j.value("type", "literal");
  if (type == "uri") return Term::iri(value);
  if (type != "literal") throw InvalidRequest("value type must be 'uri' or 'literal', not '" + type + "'");
  if (j.contains("xml:lang")) return Term::lang_literal(value, j["xml:lang"].get<std::string>());
  if (j.contains("datatype")) return Term::literal(value, j["datatype"].get<std::string>());
  return Term::literal(value);
}

json opt_term(const std::optional<Term>& t) { return t ? json(t->value()) : json(nullptr); }

json opt_time(const std::optional<Timestamp>& t) { return t ? json(format_timestamp(*t)) : json(nullptr); }

json form_json(const FormField& f) {
  json allowed = json::array();
  for (const auto& t : f.allowed_values) allowed.push_back(term_json(t));
  return {{"path", f.path},
          {"label", f.label},
          {"widget", std::string(to_string(f.widget))},
          {"datatypeOptions", f.datatype_options},
          {"min", f.min},
          {"max", f.max ? json(*f.max) : json(nullptr)},
          {"pattern", f.pattern ? json(*f.pattern) : json(nullptr)},
          {"required", f.required},
          {"repeatable", f.repeatable()},
          {"objectClass", f.object_class ? json(*f.object_class) : json(nullptr)},
          {"allowedValues", allowed}};
}

json snapshot_json(const Snapshot& s) {
  return {{"iri", s.id.value()},
          {"entity", s.entity.value()},
          {"sequence", s.sequence},
          {"generatedAt", format_timestamp(s.generated_at)},
          {"invalidatedAt", opt_time(s.invalidated_at)},
          {"agent", s.agent.value()},
          {"primarySource", opt_term(s.primary_source)},
          {"description", s.description},
          {"update", to_update_text(s.delta)}};
}

json violations_json(const ValidationReport& report) {
  json out = json::array();
  for (const auto& vi : report.violations) {
    out.push_back({{"entity", vi.entity.value()},
                   {"path", vi.path},
                   {"kind", std::string(to_string(vi.kind))},
                   {"message", vi.message},
                   {"value", vi.offending_value ? term_json(*vi.offending_value) : json(nullptr)}});
  }
  return out;
}

std::vector<std::pair<std::string, Term>> pairs_from(const json& body, const char* key) {
  std::vector<std::pair<std::string, Term>> out;
  if (!body.contains(key)) return out;
  if (!body[key].is_array()) throw InvalidRequest(std::string("'") + key + "' must be a list");
  for (const auto& item : body[key]) {
    if (!item.is_object() || !item.contains("property") || !item.contains("value")) {
      throw InvalidRequest(std::string("entries of '") + key + "' need 'property' and 'value'");
    }
    out.emplace_back(item["property"].get<std::string>(), term_from_json(item["value"]));
  }
  return out;
}

EntityDraft draft_from(const json& body) {
  if (!body.is_object() || !body.contains("class") || !body["class"].is_string()) {
    throw InvalidRequest("a new entity needs a 'class'");
  }
  EntityDraft d{body["class"].get<std::string>(), pairs_from(body, "values"), {}};
  if (body.contains("nested")) {
    if (!body["nested"].is_array()) throw InvalidRequest("'nested' must be a list");
    for (const auto& n : body["nested"]) {
      if (!n.is_object() || !n.contains("property") || !n.contains("draft")) {
        throw InvalidRequest("nested entries need 'property' and 'draft'");
      }
      d.nested.push_back({n["property"].get<std::string>(), draft_from(n["draft"])});
    }
  }
  return d;
}

std::optional<Term> source_from(const json& body) {
  if (!body.contains("primarySource") || body["primarySource"].is_null()) return std::nullopt;
  return Term::iri(body["primarySource"].get<std::string>());
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw InvalidRequest(std::string("request body is not valid JSON: ") + e.what());
  }
}

std::string param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) throw InvalidRequest(std::string("missing parameter '") + name + "'");
  return req.get_param_value(name);
}

std::size_t number_param(const httplib::Request& req, const char* name, std::size_t fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string s = req.get_param_value(name);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 9) {
    throw InvalidRequest(std::string("parameter '") + name + "' must be a non-negative integer");
  }
  return std::stoul(s);
}

void send(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message,
                json extra = json::object()) {
  extra["error"] = kind;
  extra["message"] = message;
  send(res, extra, status);
}

}  // namespace

struct HttpApi::Impl {
  std::shared_ptr<CurationService> svc;
  ApiOptions options;
  httplib::Server server;
  std::thread thread;

  /// Agent of an authorized write request, or null after sending 401.
  std::optional<Term> agent(const httplib::Request& req, httplib::Response& res) {
    std::string header = req.get_header_value("Authorization");
    const std::string prefix = "Bearer ";
    if (header.rfind(prefix, 0) == 0) {
      auto it = options.tokens.find(header.substr(prefix.size()));
      if (it != options.tokens.end()) return Term::iri(it->second);
    }
    res.set_header("WWW-Authenticate", "Bearer");
    send_error(res, 401, "unauthorized", "write requests need a valid bearer token");
    return std::nullopt;
  }

  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const ValidationFailed& e) {
        send_error(res, 422, "validation", e.what(), {{"violations", violations_json(e.report())}});
      } catch (const NotFound& e) {
        send_error(res, 404, "not_found", e.what());
      } catch (const EntityDeleted& e) {
        send_error(res, 410, "deleted", e.what(), {{"vault", "/api/vault"}});
      } catch (const Conflict& e) {
        send_error(res, 409, "conflict", e.what());
      } catch (const StoreError& e) {
        send_error(res, 502, "store", e.what());
      } catch (const IntegrityError& e) {
        send_error(res, 500, "integrity", e.what());
      } catch (const ChainError& e) {
        send_error(res, 500, "chain", e.what());
      } catch (const Error& e) {
        // Remaining library errors are caused by the request itself.
        send_error(res, 400, "invalid_request", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  void routes() {
    server.Get("/api/categories", guarded([this](const auto&, auto& res) {
                 json out = json::array();
                 for (const auto& c : svc->list_categories()) {
                   out.push_back({{"class", c.class_iri}, {"displayName", c.display_name}, {"count", c.count}});
                 }
                 send(res, out);
               }));

    auto catalog = [this](const httplib::Request& req, httplib::Response& res, const std::string& cls) {
      std::optional<std::string> sort_by;
      if (req.has_param("sort_by") && !req.get_param_value("sort_by").empty()) {
        sort_by = req.get_param_value("sort_by");
      }
      std::string dir = req.has_param("sort_dir") ? req.get_param_value("sort_dir") : "asc";
      if (dir != "asc" && dir != "desc") throw InvalidRequest("sort_dir must be 'asc' or 'desc'");
      auto page = svc->get_page(cls, number_param(req, "page", 1), number_param(req, "per_page", 50), sort_by,
                                dir == "asc" ? SortDir::asc : SortDir::desc);
      const DisplayRule* rule = resolve_rule({cls}, svc->config().rules);
      json items = json::array();
      for (const auto& item : page.items) items.push_back({{"iri", item.entity.value()}, {"display", item.display}});
      send(res, {{"category", page.category},
                 {"displayName", class_label(cls, svc->config().rules)},
                 {"total", page.total},
                 {"page", page.page},
                 {"perPage", page.per_page},
                 {"perPageOptions", {20, 50, 100}},
                 {"sortBy", page.sort_by ? json(*page.sort_by) : json(nullptr)},
                 {"sortDir", dir},
                 {"sortKeys", rule ? rule->sort_keys() : std::vector<std::string>{}},
                 {"items", items}});
    };
    server.Get(R"(/api/catalog/(.+))",
               guarded([catalog](const httplib::Request& req, auto& res) { catalog(req, res, req.matches[1]); }));
    server.Get("/api/catalog", guarded([catalog](const httplib::Request& req, auto& res) {
                 catalog(req, res, param(req, "class"));
               }));

    server.Get("/api/entity/history", guarded([this](const httplib::Request& req, auto& res) {
                 json out = json::array();
                 auto changes = [](const std::vector<ChangeLine>& lines) {
                   json a = json::array();
                   for (const auto& l : lines) {
                     a.push_back({{"property", l.property}, {"label", l.label}, {"value", l.value}});
                   }
                   return a;
                 };
                 for (const auto& h : svc->get_history(Term::iri(param(req, "iri")))) {
                   out.push_back({{"sequence", h.sequence},
                                  {"snapshot", h.snapshot.value()},
                                  {"generatedAt", format_timestamp(h.generated_at)},
                                  {"invalidatedAt", opt_time(h.invalidated_at)},
                                  {"agent", h.agent.value()},
                                  {"primarySource", opt_term(h.primary_source)},
                                  {"description", h.description},
                                  {"isCreation", h.is_creation},
                                  {"isDeletion", h.is_deletion},
                                  {"additions", changes(h.additions)},
                                  {"deletions", changes(h.deletions)}});
                 }
                 send(res, out);
               }));

    server.Post("/api/entity/restore", guarded([this](const httplib::Request& req, auto& res) {
                  auto who = agent(req, res);
                  if (!who) return;
                  json body = parse_body(req);
                  if (!body.contains("iri") || !body.contains("snapshot") || !body["snapshot"].is_number_unsigned()) {
                    throw InvalidRequest("restore needs 'iri' and a positive 'snapshot' number");
                  }
                  auto outcome = svc->restore_version(Term::iri(body["iri"].get<std::string>()),
                                                      body["snapshot"].get<std::size_t>(), *who, source_from(body));
                  json cascaded = json::array();
                  for (const auto& [e, k] : outcome.cascaded) cascaded.push_back({{"iri", e.value()}, {"sequence", k}});
                  send(res, {{"snapshot", snapshot_json(outcome.snapshot)}, {"cascaded", cascaded}});
                }));

    server.Get("/api/entity", guarded([this](const httplib::Request& req, auto& res) {
                 EntityView v = svc->get_entity(Term::iri(param(req, "iri")));
                 json fields = json::array();
                 for (const auto& f : v.fields) {
                   json values = json::array();
                   for (const auto& rv : f.values) {
                     values.push_back({{"display", rv.display}, {"target", opt_term(rv.target)}});
                   }
                   json raw = json::array();
                   for (const auto& t : f.raw_values) raw.push_back(term_json(t));
                   fields.push_back({{"property", f.property},
                                     {"label", f.label},
                                     {"values", values},
                                     {"rawValues", raw},
                                     {"form", f.form ? form_json(*f.form) : json(nullptr)},
                                     {"canAdd", f.can_add},
                                     {"canRemove", f.can_remove}});
                 }
                 send(res, {{"iri", v.entity.value()},
                            {"display", v.display},
                            {"types", v.types},
                            {"ruleClass", v.rule_class ? json(*v.rule_class) : json(nullptr)},
                            {"head", v.head},
                            {"fields", fields}});
               }));

    server.Post("/api/entity", guarded([this](const httplib::Request& req, auto& res) {
                  auto who = agent(req, res);
                  if (!who) return;
                  json body = parse_body(req);
                  auto result = svc->create_entity(draft_from(body), *who, source_from(body));
                  json created = json::array();
                  for (const auto& t : result.created) created.push_back(t.value());
                  send(res, {{"iri", result.entity.value()}, {"created", created}, {"snapshot", snapshot_json(result.snapshot)}},
                       201);
                }));

    server.Patch("/api/entity", guarded([this](const httplib::Request& req, auto& res) {
                   auto who = agent(req, res);
                   if (!who) return;
                   json body = parse_body(req);
                   if (!body.contains("iri") || !body.contains("expectedHead") ||
                       !body["expectedHead"].is_number_unsigned()) {
                     throw InvalidRequest("an edit needs 'iri' and 'expectedHead'");
                   }
                   EditRequest edit{Term::iri(body["iri"].get<std::string>()),
                                    body["expectedHead"].get<std::size_t>(),
                                    pairs_from(body, "additions"),
                                    pairs_from(body, "removals"),
                                    *who,
                                    source_from(body)};
                   Snapshot s = svc->apply_edit(edit);
                   send(res, {{"head", s.sequence}, {"snapshot", snapshot_json(s)}});
                 }));

    server.Delete("/api/entity", guarded([this](const httplib::Request& req, auto& res) {
                    auto who = agent(req, res);
                    if (!who) return;
                    Snapshot s = svc->delete_entity(Term::iri(param(req, "iri")), *who);
                    send(res, {{"snapshot", snapshot_json(s)}});
                  }));

    server.Get("/api/search", guarded([this](const httplib::Request& req, auto& res) {
                 json out = json::array();
                 for (const auto& s : svc->search_suggestions(param(req, "q"), param(req, "property"),
                                                              param(req, "class"))) {
                   out.push_back({{"iri", s.entity.value()},
                                  {"display", s.display},
                                  {"score", s.score},
                                  {"matchedValue", s.matched_value}});
                 }
                 send(res, out);
               }));

    server.Get("/api/vault", guarded([this](const auto&, auto& res) {
                 json out = json::array();
                 for (const auto& e : svc->list_vault()) {
                   json types = json::array();
                   for (const auto& q : e.last_live_view.quads) {
                     if (q.subject == e.entity && q.predicate.value() == vocab::rdf::type) types.push_back(q.object.value());
                   }
                   out.push_back({{"iri", e.entity.value()},
                                  {"deletedAt", format_timestamp(e.deleted_at)},
                                  {"agent", e.agent.value()},
                                  {"lastSnapshot", e.last_live_view.at_snapshot},
                                  {"types", types}});
                 }
                 send(res, out);
               }));

    server.Get("/api/form-schema", guarded([this](const httplib::Request& req, auto& res) {
                 json out = json::array();
                 for (const auto& f : svc->form_schema(param(req, "class"))) out.push_back(form_json(f));
                 send(res, out);
               }));

    if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir)) {
      throw ConfigError("static directory '" + options.static_dir + "' does not exist");
    }
  }
};

HttpApi::HttpApi(std::shared_ptr<CurationService> service, ApiOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->svc = std::move(service);
  impl_->options = std::move(options);
  impl_->routes();
}

HttpApi::~HttpApi() { stop(); }

int HttpApi::start(int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(impl_->options.host)
                        : (impl_->server.bind_to_port(impl_->options.host, port) ? port : -1);
  if (bound < 0) throw ConfigError("cannot bind " + impl_->options.host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpApi::listen(int port) {
  if (!impl_->server.listen(impl_->options.host, port)) {
    throw ConfigError("cannot listen on " + impl_->options.host + ":" + std::to_string(port));
  }
}

void HttpApi::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace vrdf
