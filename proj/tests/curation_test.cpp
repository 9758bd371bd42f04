#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <thread>

#include "service_fixture.hpp"
#include "vrdf/vocab.hpp"

using namespace vrdf;
using namespace fixture;

namespace {

const std::string kTitle = ns::dcterms + "title";
const std::string kAbstract = ns::dcterms + "abstract";
const std::string kKeyword = ns::prism + "keyword";
const std::string kHasIdentifier = ns::datacite + "hasIdentifier";
const std::string kJournalArticle = ns::fabio + "JournalArticle";
const std::string kBookChapter = ns::fabio + "BookChapter";

const FieldView* field(const EntityView& v, const std::string& property) {
  for (const auto& f : v.fields)
    if (f.property == property) return &f;
  return nullptr;
}

/// Distinct subjects per class across every graph, counted straight from the quads.
std::map<std::string, std::size_t> brute_force_class_counts(const QuadSet& quads) {
  std::map<std::string, std::set<Term>> members;
  for (const auto& q : quads)
    if (q.predicate.value() == ns::rdf_type) members[q.object.value()].insert(q.subject);
  std::map<std::string, std::size_t> out;
  for (const auto& [cls, subjects] : members) out[cls] = subjects.size();
  return out;
}

}  // namespace

TEST(Catalog, CategoriesReproduceTheCatalogPanel) {
  ServiceFixture fx;
  auto categories = fx.service->list_categories();
  std::vector<std::pair<std::string, std::size_t>> got;
  for (const auto& c : categories) got.emplace_back(c.display_name, c.count);
  std::vector<std::pair<std::string, std::size_t>> expected = {
      {"Article in Book", 153}, {"Issue", 25},           {"Journal", 27}, {"Journal Article", 77},
      {"Monograph", 66},        {"Proceedings Paper", 10}, {"Volume", 62}};
  EXPECT_EQ(got, expected);
}

TEST(Catalog, CountsAgreeWithBruteForceOverQuads) {
  ServiceFixture fx;
  auto oracle = brute_force_class_counts(catalog_data());
  for (const auto& c : fx.service->list_categories()) EXPECT_EQ(c.count, oracle.at(c.class_iri)) << c.class_iri;
}

TEST(Catalog, HiddenClassesAreNotListed) {
  ServiceFixture fx;
  for (const auto& c : fx.service->list_categories()) {
    EXPECT_NE(c.class_iri, ns::fabio + "Expression");
    EXPECT_NE(c.class_iri, ns::foaf + "Agent");
    EXPECT_NE(c.class_iri, ns::pro + "RoleInTime");
  }
}

TEST(Catalog, EmptyStoreHasNoCategories) {
  ServiceFixture fx(false);
  EXPECT_TRUE(fx.service->list_categories().empty());
}

TEST(Catalog, LastPageHoldsTheRemainder) {
  ServiceFixture fx;
  const std::size_t total = 153, per_page = 50;
  auto page = fx.service->get_page(kBookChapter, 4, per_page);
  EXPECT_EQ(page.total, total);
  EXPECT_EQ(page.items.size(), total - 3 * per_page);
}

TEST(Catalog, PageBeyondRangeIsEmpty) {
  ServiceFixture fx;
  auto page = fx.service->get_page(kBookChapter, 9, 20);
  EXPECT_TRUE(page.items.empty());
  EXPECT_EQ(page.total, 153u);
}

TEST(Catalog, PagesPartitionTheCategory) {
  ServiceFixture fx;
  std::set<Term> seen;
  std::size_t n = 0;
  for (std::size_t p = 1; p <= 8; ++p) {
    for (const auto& item : fx.service->get_page(kBookChapter, p, 20).items) {
      seen.insert(item.entity);
      ++n;
    }
  }
  EXPECT_EQ(n, 153u);
  EXPECT_EQ(seen.size(), 153u);
}

TEST(Catalog, BadPageArgumentsAreRejected) {
  ServiceFixture fx;
  EXPECT_THROW(fx.service->get_page(kBookChapter, 0, 50), InvalidRequest);
  EXPECT_THROW(fx.service->get_page(kBookChapter, 1, 30), InvalidRequest);
  EXPECT_THROW(fx.service->get_page(kBookChapter, 1, 50, ns::foaf + "name"), InvalidRequest);
  EXPECT_THROW(fx.service->get_page(ns::fabio + "Nothing", 1, 50), NotFound);
}

TEST(Catalog, SortByTitleAndStableTies) {
  ServiceFixture fx;
  // A second title on Issue 1 makes its ascending and descending keys differ.
  fx.data->update("INSERT DATA { <" + ns::meta + "br/0612100> <" + kTitle + "> \"Issue 2\" }");
  auto a = fx.service->get_page(ns::fabio + "JournalIssue", 1, 20, kTitle, SortDir::asc);
  auto b = fx.service->get_page(ns::fabio + "JournalIssue", 1, 20, kTitle, SortDir::asc);
  ASSERT_EQ(a.items.size(), 20u);
  for (std::size_t i = 0; i < a.items.size(); ++i) EXPECT_EQ(a.items[i].entity, b.items[i].entity);
  EXPECT_EQ(a.items[0].entity, meta("br/0612100"));  // min key "issue 1"
  auto desc = fx.service->get_page(ns::fabio + "JournalIssue", 1, 20, kTitle, SortDir::desc);
  EXPECT_EQ(desc.items[0].entity, meta("br/0612108"));  // "Issue 9"
}

TEST(Display, ListingQueryBuildsAuthorListAndTitle) {
  ServiceFixture fx;
  EXPECT_EQ(fx.service->display_of(iri(kOpenCitationsArticle)),
            "Peroni & Shotton. OpenCitations, an infrastructure organization for open scholarship");
}

TEST(Display, ArticleWithoutAuthorsShowsOnlyTitle) {
  ServiceFixture fx;
  fx.data->update("INSERT DATA { <urn:x:a> a <" + kJournalArticle + "> ; <" + kTitle + "> \"Only Title\" }");
  EXPECT_EQ(fx.service->display_of(iri("urn:x:a")), "Only Title");
}

TEST(Entity, DetailViewOfChapter) {
  ServiceFixture fx;
  auto view = fx.service->get_entity(iri(kChapter));
  EXPECT_EQ(view.display, kChapterTitle);
  ASSERT_TRUE(view.rule_class);
  EXPECT_EQ(*view.rule_class, kBookChapter);

  const FieldView* type = field(view, ns::rdf_type);
  ASSERT_NE(type, nullptr);
  std::set<std::string> type_labels;
  for (const auto& v : type->values) type_labels.insert(v.display);
  EXPECT_EQ(type_labels, (std::set<std::string>{"Article in Book", "Expression"}));

  const FieldView* id = field(view, kHasIdentifier);
  ASSERT_NE(id, nullptr);
  EXPECT_EQ(id->label, "Identifier");
  ASSERT_EQ(id->values.size(), 1u);
  EXPECT_EQ(id->values[0].display, "doi:" + kChapterDoi);
  EXPECT_EQ(id->values[0].target, iri(kChapterIdentifier));

  const FieldView* title = field(view, kTitle);
  ASSERT_NE(title, nullptr);
  ASSERT_EQ(title->values.size(), 1u);
  EXPECT_EQ(title->values[0].display, kChapterTitle);
}

TEST(Entity, ShapeDrivenFieldsForArticle) {
  ServiceFixture fx;
  auto view = fx.service->get_entity(iri(kOpenCitationsArticle));
  const FieldView* id = field(view, kHasIdentifier);
  const FieldView* title = field(view, kTitle);
  ASSERT_TRUE(id && id->form && title && title->form);
  EXPECT_TRUE(id->form->repeatable());
  EXPECT_TRUE(id->can_add);
  EXPECT_FALSE(title->form->repeatable());
  EXPECT_FALSE(title->can_add);  // already has its single value
  EXPECT_EQ(view.head, 0u);      // imported, never edited

  const FieldView* issue = field(view, ns::frbr + "partOf");
  ASSERT_TRUE(issue);
  ASSERT_EQ(issue->values.size(), 1u);
  EXPECT_EQ(issue->values[0].display, "Issue 1");
}

TEST(Entity, UnconfiguredClassUsesRawPredicates) {
  ServiceFixture fx;
  fx.data->update("INSERT DATA { <urn:x:thing> a <urn:x:Widget> ; <urn:x:colour> \"red\" }");
  auto view = fx.service->get_entity(iri("urn:x:thing"));
  const FieldView* colour = field(view, "urn:x:colour");
  ASSERT_NE(colour, nullptr);
  EXPECT_EQ(colour->label, "urn:x:colour");
  EXPECT_EQ(view.display, "urn:x:thing");
}

TEST(Entity, UnknownEntityIsNotFound) {
  ServiceFixture fx;
  EXPECT_THROW(fx.service->get_entity(iri("urn:x:missing")), NotFound);
}

TEST(Edit, AbstractAndKeywordsMakeOneSnapshot) {
  ServiceFixture fx;
  fx.clock.set(parse_timestamp("2025-01-28T12:26:09Z"));
  EditRequest req{.entity = iri(kScholiaArticle),
                  .expected_head = 0,
                  .additions = {{kAbstract, lit("Presentation of an ongoing new critical edition.")},
                                {kKeyword, lit("author>Homerus")},
                                {kKeyword, lit("subject>ancient tradition")},
                                {kKeyword, lit("subject>exegetical products")}},
                  .removals = {},
                  .agent = iri(kCuratorOrcid),
                  .primary_source = iri(kZenodoSource)};
  Snapshot s = fx.service->apply_edit(req);
  EXPECT_EQ(s.sequence, 2u);  // 1 is the imported baseline
  EXPECT_EQ(s.delta.insertions().size(), 4u);
  EXPECT_TRUE(s.delta.deletions().empty());

  auto history = fx.service->get_history(iri(kScholiaArticle));
  ASSERT_EQ(history.size(), 2u);
  const auto& latest = history.front();
  EXPECT_EQ(latest.sequence, 2u);
  EXPECT_EQ(latest.agent, iri(kCuratorOrcid));
  EXPECT_EQ(latest.primary_source, iri(kZenodoSource));
  EXPECT_EQ(format_timestamp(latest.generated_at), "2025-01-28T12:26:09.000Z");
  EXPECT_EQ(latest.additions.size(), 4u);
  EXPECT_TRUE(latest.deletions.empty());
  std::multiset<std::string> labels;
  for (const auto& line : latest.additions) labels.insert(line.label);
  EXPECT_EQ(labels.count("Keyword"), 3u);
  EXPECT_TRUE(history.back().is_creation);
}

TEST(Edit, StaleHeadConflictsWithoutChangingState) {
  ServiceFixture fx;
  auto before_data = fx.data->quads();
  auto before_prov = fx.prov->quads();
  EditRequest req{.entity = iri(kOpenCitationsArticle),
                  .expected_head = 3,
                  .additions = {{kAbstract, lit("x")}},
                  .removals = {},
                  .agent = iri(kCuratorOrcid),
                  .primary_source = std::nullopt};
  EXPECT_THROW(fx.service->apply_edit(req), Conflict);
  EXPECT_EQ(fx.data->quads(), before_data);
  EXPECT_EQ(fx.prov->quads(), before_prov);
}

TEST(Edit, SecondTitleViolatesMaxCount) {
  ServiceFixture fx;
  EditRequest req{.entity = iri(kOpenCitationsArticle),
                  .expected_head = 0,
                  .additions = {{kTitle, lit("Another title")}},
                  .removals = {},
                  .agent = iri(kCuratorOrcid),
                  .primary_source = std::nullopt};
  try {
    fx.service->apply_edit(req);
    FAIL() << "expected a validation failure";
  } catch (const ValidationFailed& e) {
    ASSERT_EQ(e.report().violations.size(), 1u);
    EXPECT_EQ(e.report().violations[0].path, kTitle);
    EXPECT_EQ(e.report().violations[0].kind, ViolationKind::max_count);
  }
}

TEST(Create, ArticleWithNestedAuthorRole) {
  ServiceFixture fx;
  EntityDraft role{.class_iri = ns::pro + "RoleInTime",
                   .values = {{ns::pro + "withRole", iri(ns::pro + "author")}, {ns::pro + "isHeldBy", iri(kMontanari)}},
                   .nested = {}};
  EntityDraft article{.class_iri = kJournalArticle,
                      .values = {{kTitle, lit("A new article")}},
                      .nested = {{ns::pro + "isDocumentContextFor", role}}};
  auto result = fx.service->create_entity(article, iri(kCuratorOrcid));
  ASSERT_EQ(result.created.size(), 2u);
  EXPECT_EQ(result.created[0], result.entity);
  for (const auto& e : result.created) {
    auto history = fx.service->get_history(e);
    ASSERT_EQ(history.size(), 1u);
    EXPECT_TRUE(history[0].is_creation);
  }
  auto view = fx.service->get_entity(result.entity);
  EXPECT_EQ(view.display, "Montanari. A new article");
  // Minted identifiers never reuse a number already present.
  auto second = fx.service->create_entity(EntityDraft{kJournalArticle, {{kTitle, lit("Another")}}, {}},
                                          iri(kCuratorOrcid));
  EXPECT_NE(second.entity, result.entity);
}

TEST(Create, MissingTitleIsAMinCountViolation) {
  ServiceFixture fx;
  try {
    fx.service->create_entity(EntityDraft{kJournalArticle, {{kKeyword, lit("k")}}, {}}, iri(kCuratorOrcid));
    FAIL() << "expected a validation failure";
  } catch (const ValidationFailed& e) {
    ASSERT_FALSE(e.report().conforms());
    EXPECT_EQ(e.report().violations[0].kind, ViolationKind::min_count);
    EXPECT_EQ(e.report().violations[0].path, kTitle);
  }
}

TEST(Create, HiddenClassCannotBeCreated) {
  ServiceFixture fx;
  EXPECT_THROW(fx.service->create_entity(EntityDraft{ns::fabio + "Expression", {{kTitle, lit("x")}}, {}},
                                         iri(kCuratorOrcid)),
               InvalidRequest);
}

TEST(Delete, VaultAndRestoreLifecycle) {
  ServiceFixture fx;
  Term article = iri(kOpenCitationsArticle);
  QuadSet live = entity_quads(*fx.data, article);
  fx.service->delete_entity(article, iri(kCuratorOrcid));

  EXPECT_THROW(fx.service->get_entity(article), EntityDeleted);
  auto vault = fx.service->list_vault();
  ASSERT_EQ(vault.size(), 1u);
  EXPECT_EQ(vault[0].entity, article);
  EXPECT_EQ(vault[0].agent, iri(kCuratorOrcid));
  EXPECT_EQ(vault[0].last_live_view.quads, live);

  auto history = fx.service->get_history(article);
  EXPECT_TRUE(history.front().is_deletion);

  auto outcome = fx.service->restore_version(article, vault[0].last_live_view.at_snapshot, iri(kCuratorOrcid));
  EXPECT_TRUE(fx.service->list_vault().empty());
  EXPECT_EQ(entity_quads(*fx.data, article), live);
  EXPECT_NO_THROW(fx.service->get_entity(article));
  EXPECT_EQ(fx.service->get_page(kJournalArticle, 1, 100).total, 77u);
}

TEST(Search, GivenNameSuggestsExistingAgent) {
  ServiceFixture fx;
  auto hits = fx.service->search_suggestions("Franco", ns::foaf + "givenName", ns::foaf + "Agent");
  ASSERT_FALSE(hits.empty());
  EXPECT_EQ(hits[0].display, "Franco Montanari [omid:ra/09110155]");
  EXPECT_EQ(hits[0].score, 0);
  ASSERT_EQ(hits.size(), 3u);  // two inner matches follow
  EXPECT_EQ(hits[1].score, 1);
}

TEST(Search, ShortQueryYieldsNothing) {
  ServiceFixture fx;
  EXPECT_TRUE(fx.service->search_suggestions("F", ns::foaf + "givenName", ns::foaf + "Agent").empty());
}

TEST(Search, IdentifierSearchReturnsTheOwningWork) {
  ServiceFixture fx;
  auto hits = fx.service->search_suggestions("9783110354348", kHasIdentifier, kBookChapter);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].entity, iri(kChapter));
}

TEST(Search, NonSearchablePropertyIsRejected) {
  ServiceFixture fx;
  EXPECT_THROW(fx.service->search_suggestions("Fabio", ns::rdf_type, kJournalArticle), InvalidRequest);
}

TEST(History, SingleSnapshotEntity) {
  ServiceFixture fx;
  auto created = fx.service->create_entity(EntityDraft{kJournalArticle, {{kTitle, lit("Solo")}}, {}},
                                           iri(kCuratorOrcid));
  auto history = fx.service->get_history(created.entity);
  ASSERT_EQ(history.size(), 1u);
  EXPECT_TRUE(history[0].is_creation);
  EXPECT_FALSE(history[0].is_deletion);
  EXPECT_EQ(history[0].additions.size(), 2u);  // type and title
}

TEST(Restore, CascadeRevertsEditedIdentifier) {
  ServiceFixture fx;
  Term chapter = iri(kChapter), ident = iri(kChapterIdentifier);
  Term agent = iri(kCuratorOrcid);
  QuadSet chapter_before = entity_quads(*fx.data, chapter);
  QuadSet ident_before = entity_quads(*fx.data, ident);

  // Snapshot 2 of the chapter, then a later change to its identifier.
  fx.service->apply_edit(EditRequest{chapter, 0, {{kAbstract, lit("An abstract")}}, {}, agent, std::nullopt});
  fx.service->apply_edit(EditRequest{ident,
                                     0,
                                     {{ns::literal + "hasLiteralValue", lit("10.1515/9783110354348-020")}},
                                     {{ns::literal + "hasLiteralValue", lit(kChapterDoi)}},
                                     agent,
                                     std::nullopt});

  auto outcome = fx.service->restore_version(chapter, 1, agent);
  EXPECT_EQ(entity_quads(*fx.data, chapter), chapter_before);
  EXPECT_EQ(entity_quads(*fx.data, ident), ident_before);
  ASSERT_EQ(outcome.cascaded.size(), 1u);
  EXPECT_EQ(outcome.cascaded[0].first, ident);
  EXPECT_EQ(outcome.cascaded[0].second, 1u);
}

TEST(Restore, HeadIsRejected) {
  ServiceFixture fx;
  Term chapter = iri(kChapter);
  fx.service->apply_edit(EditRequest{chapter, 0, {{kAbstract, lit("a")}}, {}, iri(kCuratorOrcid), std::nullopt});
  EXPECT_THROW(fx.service->restore_version(chapter, 2, iri(kCuratorOrcid)), InvalidRequest);
}

TEST(Concurrency, RacingEditsWithSameHead) {
  ServiceFixture fx;
  Term article = iri(kOpenCitationsArticle);
  std::atomic<int> ok{0}, conflicts{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 2; ++i) {
    threads.emplace_back([&, i] {
      try {
        fx.service->apply_edit(EditRequest{article, 0, {{kKeyword, lit("k" + std::to_string(i))}}, {},
                                           iri(kCuratorOrcid), std::nullopt});
        ++ok;
      } catch (const Conflict&) {
        ++conflicts;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(conflicts.load(), 1);
  EXPECT_EQ(fx.service->get_history(article).size(), 2u);
}
