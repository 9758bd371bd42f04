#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "vrdf/curation_service.hpp"

namespace vrdf {

struct ApiOptions {
  /// Bearer token -> agent IRI. Write requests without a listed token get 401.
  std::map<std::string, std::string> tokens;
  /// Directory served under `/` (the browser bundle); none when empty.
  std::string static_dir;
  std::string host = "127.0.0.1";
};

/// JSON API over a CurationService:
///
///   GET    /api/categories
///   GET    /api/catalog/{class}?page&per_page&sort_by&sort_dir
///   GET    /api/entity?iri=
///   POST   /api/entity            create
///   PATCH  /api/entity            edit
///   DELETE /api/entity?iri=
///   GET    /api/entity/history?iri=
///   POST   /api/entity/restore    {"iri", "snapshot"}
///   GET    /api/search?q&property&class
///   GET    /api/vault
///   GET    /api/form-schema?class=
class HttpApi {
 public:
  HttpApi(std::shared_ptr<CurationService> service, ApiOptions options);
  ~HttpApi();

  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  /// Binds `port` (0 picks one), serves on a background thread and returns the port.
  int start(int port = 0);
  /// Binds and serves on the calling thread until stop().
  void listen(int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vrdf
