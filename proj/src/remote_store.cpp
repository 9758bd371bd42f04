#include <httplib.h>

#include <regex>

#include "vrdf/error.hpp"
#include "vrdf/store.hpp"

namespace vrdf {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  static const std::regex re(R"(^(http://[^/?#]+)([/?].*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) {
    throw ConfigError("unsupported endpoint URL (plain http:// expected): " + url);
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

constexpr const char* kResultsJson = "application/sparql-results+json";

// Remote update requests are chunked so one load does not produce a
// single multi-megabyte form body.
constexpr std::size_t kLoadChunk = 500;

}  // namespace

RemoteStore::RemoteStore(StoreHandle handle) : handle_(std::move(handle)) {
  handle_.validate();
  if (handle_.kind != StoreHandle::Kind::remote) throw ConfigError("RemoteStore needs a remote handle");
  split_url(handle_.query_endpoint);
  split_url(handle_.update_endpoint);
}

std::string RemoteStore::post(const std::string& url, const char* content_type, std::string_view body,
                              const char* accept) {
  Endpoint ep = split_url(url);
  httplib::Client client(ep.origin);
  auto secs = static_cast<time_t>(handle_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (accept) headers.emplace("Accept", accept);
  // Direct POST rather than a form field: form bodies are size-capped by many servers.
  auto res = client.Post(ep.path, headers, std::string(body), content_type);
  if (!res) {
    throw StoreError("request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    std::string snippet = res->body.substr(0, 300);
    throw StoreError("endpoint " + url + " returned HTTP " + std::to_string(res->status) + ": " + snippet);
  }
  return res->body;
}

SelectResult RemoteStore::select(std::string_view query) {
  return from_results_json(post(handle_.query_endpoint, "application/sparql-query", query, kResultsJson));
}

void RemoteStore::update(std::string_view update_text) {
  std::lock_guard lock(write_mutex_);
  post(handle_.update_endpoint, "application/sparql-update", update_text, nullptr);
}

void RemoteStore::load_quads(const QuadSet& quads) {
  QuadSet chunk;
  for (const auto& q : quads) {
    chunk.insert(q);
    if (chunk.size() == kLoadChunk) {
      update(to_data_update(UpdateOperation::Kind::insert_data, chunk));
      chunk.clear();
    }
  }
  if (!chunk.empty()) update(to_data_update(UpdateOperation::Kind::insert_data, chunk));
}

// ---- protocol server ----------------------------------------------------------------

struct SparqlEndpoint::Impl {
  std::shared_ptr<Store> store;
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

namespace {

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(message, "text/plain");
}

/// Request body text for the given form field, or the raw body for direct POSTs.
std::string protocol_text(const httplib::Request& req, const char* field, const char* direct_type) {
  if (req.has_param(field)) return req.get_param_value(field);
  if (req.get_header_value("Content-Type").rfind(direct_type, 0) == 0) return req.body;
  return {};
}

}  // namespace

SparqlEndpoint::SparqlEndpoint(std::shared_ptr<Store> store) : impl_(std::make_unique<Impl>()) {
  impl_->store = std::move(store);
  auto query_handler = [this](const httplib::Request& req, httplib::Response& res) {
    std::string query = protocol_text(req, "query", "application/sparql-query");
    if (query.empty()) return send_error(res, 400, "missing query");
    try {
      bool ask = is_ask_query(query);
      SelectResult result = impl_->store->select(query);
      res.set_content(ask ? to_boolean_json(!result.rows.empty()) : to_results_json(result), kResultsJson);
    } catch (const ParseError& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
  impl_->server.Get("/sparql", query_handler);
  impl_->server.Post("/sparql", query_handler);
  impl_->server.Post("/update", [this](const httplib::Request& req, httplib::Response& res) {
    std::string text = protocol_text(req, "update", "application/sparql-update");
    try {
      impl_->store->update(text);
      res.status = 204;
    } catch (const ParseError& e) {
      send_error(res, 400, e.what());
    } catch (const DisallowedUpdate& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  });
}

SparqlEndpoint::~SparqlEndpoint() { stop(); }

int SparqlEndpoint::start(int port) {
  if (impl_->thread.joinable()) return impl_->port;
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    if (!impl_->server.bind_to_port("127.0.0.1", port)) throw StoreError("cannot bind port " + std::to_string(port));
    impl_->port = port;
  }
  if (impl_->port < 0) throw StoreError("cannot bind SPARQL endpoint");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void SparqlEndpoint::stop() {
  if (!impl_->thread.joinable()) return;
  impl_->server.stop();
  impl_->thread.join();
}

std::string SparqlEndpoint::query_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/sparql";
}

std::string SparqlEndpoint::update_url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/update";
}

}  // namespace vrdf
