#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include "service_fixture.hpp"
#include "vrdf/http_api.hpp"

using namespace vrdf;
using namespace fixture;
using json = nlohmann::json;

namespace {

class Api : public ::testing::Test {
 protected:
  void SetUp() override {
    ApiOptions options;
    options.tokens["secret"] = kCuratorOrcid;
    api_ = std::make_unique<HttpApi>(fx_.service, options);
    port_ = api_->start(0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { api_->stop(); }

  httplib::Headers auth() const { return {{"Authorization", "Bearer secret"}}; }

  json get_json(const std::string& path, int expected_status = 200) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res);
    if (!res) return nullptr;
    EXPECT_EQ(res->status, expected_status) << res->body;
    return json::parse(res->body);
  }

  static std::string enc(const std::string& s) { return httplib::detail::encode_query_param(s); }

  ServiceFixture fx_;
  std::unique_ptr<HttpApi> api_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

}  // namespace

TEST_F(Api, Categories) {
  json j = get_json("/api/categories");
  ASSERT_EQ(j.size(), 7u);
  EXPECT_EQ(j[0]["displayName"], "Article in Book");
  EXPECT_EQ(j[0]["count"], 153);
}

TEST_F(Api, CatalogPage) {
  json j = get_json("/api/catalog?class=" + enc(ns::fabio + "BookChapter") + "&page=4&per_page=50");
  EXPECT_EQ(j["total"], 153);
  EXPECT_EQ(j["items"].size(), 3u);
  get_json("/api/catalog?class=" + enc(ns::fabio + "BookChapter") + "&per_page=7", 400);
  get_json("/api/catalog?class=" + enc("urn:x:Nope"), 404);
}

TEST_F(Api, EntityView) {
  json j = get_json("/api/entity?iri=" + enc(kChapter));
  EXPECT_EQ(j["display"], kChapterTitle);
  bool saw_identifier = false;
  for (const auto& f : j["fields"]) {
    if (f["label"] == "Identifier") {
      EXPECT_EQ(f["values"][0]["display"], "doi:10.1515/9783110354348-019");
      saw_identifier = true;
    }
  }
  EXPECT_TRUE(saw_identifier);
  get_json("/api/entity?iri=" + enc("urn:x:missing"), 404);
}

TEST_F(Api, WritesNeedAToken) {
  json body = {{"iri", kOpenCitationsArticle},
               {"expectedHead", 0},
               {"additions", {{{"property", ns::prism + "keyword"}, {"value", "citations"}}}}};
  auto res = client_->Patch("/api/entity", body.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 401);
  res = client_->Patch("/api/entity", {{"Authorization", "Bearer wrong"}}, body.dump(), "application/json");
  EXPECT_EQ(res->status, 401);
  res = client_->Delete("/api/entity?iri=" + enc(kOpenCitationsArticle));
  EXPECT_EQ(res->status, 401);
  EXPECT_TRUE(fx_.prov->quads().empty());
}

TEST_F(Api, EditConflictAndValidation) {
  json body = {{"iri", kOpenCitationsArticle},
               {"expectedHead", 0},
               {"additions", {{{"property", ns::prism + "keyword"}, {"value", "citations"}}}},
               {"primarySource", kZenodoSource}};
  auto res = client_->Patch("/api/entity", auth(), body.dump(), "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(json::parse(res->body)["head"], 2);

  res = client_->Patch("/api/entity", auth(), body.dump(), "application/json");
  EXPECT_EQ(res->status, 409);

  json bad = {{"iri", kOpenCitationsArticle},
              {"expectedHead", 2},
              {"additions", {{{"property", ns::dcterms + "title"}, {"value", "Second title"}}}}};
  res = client_->Patch("/api/entity", auth(), bad.dump(), "application/json");
  ASSERT_EQ(res->status, 422);
  json err = json::parse(res->body);
  ASSERT_EQ(err["violations"].size(), 1u);
  EXPECT_EQ(err["violations"][0]["kind"], "max_count");

  res = client_->Patch("/api/entity", auth(), "{not json", "application/json");
  EXPECT_EQ(res->status, 400);
}

TEST_F(Api, CreateHistoryDeleteVaultRestore) {
  json draft = {{"class", ns::fabio + "JournalArticle"},
                {"values", {{{"property", ns::dcterms + "title"}, {"value", "Made over HTTP"}}}}};
  auto res = client_->Post("/api/entity", auth(), draft.dump(), "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 201) << res->body;
  std::string iri = json::parse(res->body)["iri"];

  json history = get_json("/api/entity/history?iri=" + enc(iri));
  ASSERT_EQ(history.size(), 1u);
  EXPECT_TRUE(history[0]["isCreation"]);
  EXPECT_EQ(history[0]["agent"], kCuratorOrcid);

  res = client_->Delete("/api/entity?iri=" + enc(iri), auth());
  ASSERT_EQ(res->status, 200) << res->body;
  json gone = get_json("/api/entity?iri=" + enc(iri), 410);
  EXPECT_EQ(gone["vault"], "/api/vault");
  json vault = get_json("/api/vault");
  ASSERT_EQ(vault.size(), 1u);
  EXPECT_EQ(vault[0]["iri"], iri);

  json restore = {{"iri", iri}, {"snapshot", vault[0]["lastSnapshot"]}};
  res = client_->Post("/api/entity/restore", auth(), restore.dump(), "application/json");
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_TRUE(get_json("/api/vault").empty());
  EXPECT_EQ(get_json("/api/entity?iri=" + enc(iri))["display"], "Made over HTTP");
}

TEST_F(Api, SearchAndFormSchema) {
  json hits = get_json("/api/search?q=Franco&property=" + enc(ns::foaf + "givenName") + "&class=" + enc(ns::foaf + "Agent"));
  ASSERT_FALSE(hits.empty());
  EXPECT_EQ(hits[0]["display"], "Franco Montanari [omid:ra/09110155]");

  json form = get_json("/api/form-schema?class=" + enc(ns::fabio + "JournalArticle"));
  ASSERT_FALSE(form.empty());
  EXPECT_EQ(form[0]["path"], ns::dcterms + "title");
  EXPECT_EQ(form[0]["repeatable"], false);
}

TEST(ApiOptionsTest, MissingStaticDirIsConfigError) {
  ServiceFixture fx;
  ApiOptions options;
  options.static_dir = "/nonexistent/dir/for/test";
  EXPECT_THROW(HttpApi(fx.service, options), ConfigError);
}
