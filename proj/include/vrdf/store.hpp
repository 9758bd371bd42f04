#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "vrdf/sparql.hpp"
#include "vrdf/term.hpp"

namespace vrdf {

/// Connection settings for a store. Remote handles name both SPARQL
/// endpoints; memory handles name neither.
struct StoreHandle {
  enum class Kind { memory, remote };

  Kind kind = Kind::memory;
  std::string query_endpoint;
  std::string update_endpoint;
  std::chrono::seconds timeout{30};

  static StoreHandle memory() { return {}; }
  static StoreHandle remote(std::string query_endpoint, std::string update_endpoint,
                            std::chrono::seconds timeout = std::chrono::seconds(30));

  /// Throws ConfigError when the endpoint fields do not match the kind.
  void validate() const;
};

/// Store contract shared by the embedded store and remote endpoints.
///
/// Reads may run concurrently. Updates are serialized per store.
class Store {
 public:
  virtual ~Store() = default;

  /// Runs a SELECT or ASK query. An ASK that holds yields one empty row.
  /// Throws ParseError for malformed queries and StoreError for backend failures.
  virtual SelectResult select(std::string_view query) = 0;

  /// Applies INSERT DATA / DELETE DATA operations in order. Throws ParseError,
  /// DisallowedUpdate or StoreError. A rejected request leaves the store unchanged.
  virtual void update(std::string_view update_text) = 0;

  /// Adds every quad; loading the same set twice is the same as loading it once.
  virtual void load_quads(const QuadSet& quads) = 0;

  virtual const StoreHandle& handle() const = 0;

  bool ask(std::string_view query) { return !select(query).rows.empty(); }
};

/// Embedded quad store with a SPARQL subset (see README for the supported
/// language). Queries hold a shared lock; updates hold an exclusive lock.
class MemoryStore : public Store {
 public:
  MemoryStore();
  ~MemoryStore() override;

  SelectResult select(std::string_view query) override;
  void update(std::string_view update_text) override;
  void load_quads(const QuadSet& quads) override;
  const StoreHandle& handle() const override { return handle_; }

  /// Snapshot of the full contents.
  QuadSet quads() const;
  std::size_t size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  StoreHandle handle_;
};

/// Client for a SPARQL 1.1 Protocol endpoint pair (plain HTTP).
class RemoteStore : public Store {
 public:
  explicit RemoteStore(StoreHandle handle);

  SelectResult select(std::string_view query) override;
  void update(std::string_view update_text) override;
  void load_quads(const QuadSet& quads) override;
  const StoreHandle& handle() const override { return handle_; }

 private:
  std::string post(const std::string& endpoint, const char* content_type, std::string_view body,
                   const char* accept);

  StoreHandle handle_;
  std::mutex write_mutex_;
};

/// Opens a store for `handle`: a fresh MemoryStore or a RemoteStore.
std::shared_ptr<Store> connect(const StoreHandle& handle);

/// Every statement whose subject is `entity`, from the default graph and all
/// named graphs.
QuadSet entity_quads(Store& store, const Term& entity);

/// Minimal SPARQL 1.1 Protocol server in front of any Store. Serves
/// `GET|POST /sparql` and `POST /update` on 127.0.0.1.
class SparqlEndpoint {
 public:
  explicit SparqlEndpoint(std::shared_ptr<Store> store);
  ~SparqlEndpoint();

  SparqlEndpoint(const SparqlEndpoint&) = delete;
  SparqlEndpoint& operator=(const SparqlEndpoint&) = delete;

  /// Starts serving on `port` (0 picks a free port) and returns the bound port.
  int start(int port = 0);
  void stop();

  std::string query_url() const;
  std::string update_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vrdf
