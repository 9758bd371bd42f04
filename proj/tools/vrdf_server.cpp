// Curation server: loads the display rules and shapes, connects the data and
// provenance stores and serves the JSON API.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vrdf/curation_service.hpp"
#include "vrdf/http_api.hpp"
#include "vrdf/log.hpp"
#include "vrdf/rdf_io.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw vrdf::ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

vrdf::QuadSet read_rdf(const std::string& path, const std::string& base) {
  std::string text = read_file(path);
  if (ends_with(path, ".nq") || ends_with(path, ".nt")) return vrdf::skolemize(vrdf::parse_nquads(text), base);
  if (ends_with(path, ".ttl")) return vrdf::skolemize(vrdf::parse_turtle(text, base), base);
  throw vrdf::ConfigError(path + ": expected a .nq, .nt or .ttl file");
}

std::shared_ptr<vrdf::HttpApi> running;

void on_signal(int) {
  if (running) running->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RDF curation server with change tracking"};
  std::string config_path, shapes_path, data_endpoint, prov_endpoint, base_iri = "https://example.org/data";
  std::string static_dir, host = "127.0.0.1";
  std::vector<std::string> tokens, loads;
  bool memory = false, recover_only = false;
  int port = 5000;

  app.add_option("--config", config_path, "YAML display rules")->envname("HT_CONFIG")->check(CLI::ExistingFile);
  app.add_option("--shapes", shapes_path, "SHACL shapes (Turtle)")->envname("HT_SHAPES")->check(CLI::ExistingFile);
  app.add_option("--data-endpoint", data_endpoint, "SPARQL endpoint holding the data")->envname("HT_DATA_ENDPOINT");
  app.add_option("--prov-endpoint", prov_endpoint, "SPARQL endpoint holding provenance (defaults to the data one)")
      ->envname("HT_PROV_ENDPOINT");
  app.add_flag("--memory", memory, "use embedded in-memory stores")->envname("HT_MEMORY");
  app.add_option("--port", port, "HTTP port")->envname("HT_PORT")->check(CLI::Range(0, 65535));
  app.add_option("--host", host, "interface to bind")->envname("HT_HOST");
  app.add_option("--base-iri", base_iri, "prefix for minted entity IRIs")->envname("HT_BASE_IRI");
  app.add_option("--token", tokens, "bearer token allowed to write, as TOKEN or TOKEN=AGENT_IRI")
      ->envname("HT_TOKEN")
      ->delimiter(',');
  app.add_option("--load", loads, "N-Quads or Turtle file to load into the data store at startup")
      ->envname("HT_LOAD")
      ->delimiter(',')
      ->check(CLI::ExistingFile);
  app.add_option("--static-dir", static_dir, "directory served under /")->envname("HT_STATIC_DIR");
  app.add_flag("--recover-only", recover_only, "finish interrupted writes and exit");
  CLI11_PARSE(app, argc, argv);

  try {
    if (memory == !data_endpoint.empty()) {
      throw vrdf::ConfigError("choose exactly one of --memory and --data-endpoint");
    }
    std::shared_ptr<vrdf::Store> data, prov;
    if (memory) {
      data = std::make_shared<vrdf::MemoryStore>();
      prov = std::make_shared<vrdf::MemoryStore>();
    } else {
      data = vrdf::connect(vrdf::StoreHandle::remote(data_endpoint, data_endpoint));
      prov = prov_endpoint.empty() || prov_endpoint == data_endpoint
                 ? data
                 : vrdf::connect(vrdf::StoreHandle::remote(prov_endpoint, prov_endpoint));
    }

    vrdf::ServiceConfig cfg;
    cfg.base_iri = base_iri;
    if (!config_path.empty()) {
      std::vector<std::string> warnings;
      cfg.rules = vrdf::parse_config(read_file(config_path), &warnings);
      for (const auto& w : warnings) vrdf::warn(config_path + ": " + w);
    }
    if (!shapes_path.empty()) {
      std::vector<std::string> warnings;
      cfg.schemas = vrdf::parse_shapes(vrdf::parse_turtle(read_file(shapes_path), "file://" + shapes_path), &warnings);
      for (const auto& w : warnings) vrdf::warn(shapes_path + ": " + w);
    }
    for (const auto& path : loads) data->load_quads(read_rdf(path, base_iri));

    auto service = std::make_shared<vrdf::CurationService>(data, prov, cfg);
    if (std::size_t n = service->recover()) std::clog << "recovered " << n << " interrupted write(s)\n";
    if (recover_only) return 0;

    vrdf::ApiOptions options;
    options.static_dir = static_dir;
    options.host = host;
    for (const auto& t : tokens) {
      auto eq = t.find('=');
      std::string token = t.substr(0, eq);
      std::string agent = eq == std::string::npos ? base_iri + "/agent/" + token : t.substr(eq + 1);
      if (token.empty() || !vrdf::is_absolute_iri(agent)) throw vrdf::ConfigError("bad --token value '" + t + "'");
      options.tokens[token] = agent;
    }
    if (options.tokens.empty()) std::clog << "no --token given: the API is read-only\n";

    running = std::make_shared<vrdf::HttpApi>(service, options);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::clog << "listening on http://" << host << ":" << port << "\n";
    running->listen(port);
  } catch (const vrdf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
