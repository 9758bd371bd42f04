#include <gtest/gtest.h>

#include "random_graphs.hpp"
#include "vrdf/error.hpp"
#include "vrdf/store.hpp"
#include "vrdf/time_travel.hpp"

using namespace vrdf;

namespace {

const Term kAgent = Term::iri("https://orcid.org/0000-0000-0000-0002");
const std::string kArticle = "https://w3id.org/oc/meta/br/1";
const std::string kIdent = "https://w3id.org/oc/meta/id/1";
const Term kHasId = Term::iri("http://purl.org/spar/datacite/hasIdentifier");
const Term kValue = Term::iri("http://www.essepuntato.it/2010/06/literalreification/hasLiteralValue");

Quad t(const std::string& s, const Term& p, const Term& o) { return Quad(Term::iri(s), p, o); }

}  // namespace

TEST(Materialize, HeadEqualsCurrent) {
  fixture::QuadGen gen(21);
  auto h = fixture::random_history(gen, kArticle, 6);
  auto v = materialize(h.chain, h.states.back(), 6);
  EXPECT_EQ(v.quads, h.states.back());
  EXPECT_EQ(v.snapshot_meta, h.chain.head());
}

TEST(Materialize, OneInversion) {
  Quad t1 = t(kArticle, Term::iri("urn:p:1"), Term::literal("t1"));
  Quad t2 = t(kArticle, Term::iri("urn:p:2"), Term::literal("t2"));
  ProvenanceChain c(Term::iri(kArticle));
  auto now = parse_timestamp("2024-01-01T00:00:00Z");
  c = record_snapshot(c, Delta({t1}, {}), kAgent, std::nullopt, "c", now);
  c = record_snapshot(c, Delta({t2}, {}), kAgent, std::nullopt, "e", now + std::chrono::seconds(1));
  EXPECT_EQ(materialize(c, {t1, t2}, 1).quads, QuadSet{t1});
}

TEST(Materialize, RandomHistoriesAgreeWithForwardReplay) {
  fixture::QuadGen gen(22);
  for (int i = 0; i < 30; ++i) {
    auto h = fixture::random_history(gen, kArticle, 20);
    for (std::size_t k = 1; k <= 20; ++k) {
      EXPECT_EQ(materialize(h.chain, h.states.back(), k).quads, h.states[k]);
      EXPECT_EQ(forward_replay(h.chain, k), h.states[k]);
    }
  }
}

TEST(Materialize, TamperedCurrentStateIsDetected) {
  fixture::QuadGen gen(23);
  auto h = fixture::random_history(gen, kArticle, 5);
  QuadSet current = h.states.back();
  current.insert(t(kArticle, Term::iri("urn:p:stray"), Term::literal("x")));
  EXPECT_THROW(materialize(h.chain, current, 2), IntegrityError);
  EXPECT_THROW(materialize(h.chain, h.states.back(), 0), InvalidRequest);
  EXPECT_THROW(materialize(h.chain, h.states.back(), 6), InvalidRequest);
}

TEST(Restore, AppendsSnapshotWithOldState) {
  fixture::QuadGen gen(24);
  auto h = fixture::random_history(gen, kArticle, 5);
  auto later = h.chain.head().generated_at + std::chrono::seconds(1);
  auto r = restore(h.chain, h.states.back(), 2, kAgent, later);
  EXPECT_EQ(r.quads, h.states[2]);
  EXPECT_EQ(r.chain.size(), 6u);
  EXPECT_EQ(materialize(r.chain, r.quads, 6).quads, h.states[2]);
  EXPECT_EQ(vrdf::apply(r.delta, h.states.back()), h.states[2]);
  EXPECT_NO_THROW(r.chain.validate());
  EXPECT_THROW(restore(h.chain, h.states.back(), 5, kAgent, later), InvalidRequest);
}

TEST(SequenceAt, PicksLatestNotAfter) {
  fixture::QuadGen gen(25);
  auto h = fixture::random_history(gen, kArticle, 4);
  const auto& s = h.chain.snapshots;
  EXPECT_EQ(sequence_at(h.chain, s[0].generated_at - std::chrono::milliseconds(1)), 0u);
  EXPECT_EQ(sequence_at(h.chain, s[2].generated_at), 3u);
  EXPECT_EQ(sequence_at(h.chain, s[3].generated_at + std::chrono::hours(1)), 4u);
}

namespace {

// Article and identifier with timestamped histories, written to stores.
struct CascadeFixture {
  MemoryStore data, prov;
  Timestamp t0 = parse_timestamp("2024-01-01T00:00:00Z");
  ProvenanceChain article{Term::iri(kArticle)}, ident{Term::iri(kIdent)};

  void commit(ProvenanceChain& chain, ProvenanceChain next) {
    data.update(to_update_text(next.head().delta));
    prov.load_quads(to_prov_quads(next));
    // Invalidation of the previous head.
    chain = std::move(next);
    prov.load_quads(to_prov_quads(chain));
  }
  void edit(ProvenanceChain& chain, Delta d, Timestamp at) {
    commit(chain, record_snapshot(chain, d, kAgent, std::nullopt, "edit", at));
  }
};

}  // namespace

TEST(Cascade, UnchangedIdentifierIsNotListed) {
  CascadeFixture f;
  f.edit(f.ident, Delta({t(kIdent, kValue, Term::literal("10.1/a"))}, {}), f.t0);
  f.edit(f.article, Delta({t(kArticle, kHasId, Term::iri(kIdent))}, {}), f.t0 + std::chrono::seconds(1));
  QuadSet restored = forward_replay(f.article, 1);
  EXPECT_TRUE(cascade_targets(Term::iri(kArticle), restored, f.data, f.prov, f.t0 + std::chrono::seconds(1)).empty());
}

TEST(Cascade, IdentifierEditedAfterRestorePoint) {
  CascadeFixture f;
  f.edit(f.ident, Delta({t(kIdent, kValue, Term::literal("10.1/a"))}, {}), f.t0);
  f.edit(f.article, Delta({t(kArticle, kHasId, Term::iri(kIdent))}, {}), f.t0 + std::chrono::seconds(1));
  f.edit(f.ident, Delta({t(kIdent, kValue, Term::literal("10.1/b"))}, {t(kIdent, kValue, Term::literal("10.1/a"))}),
         f.t0 + std::chrono::seconds(2));
  auto at = f.article.snapshots[0].generated_at;
  auto targets = cascade_targets(Term::iri(kArticle), forward_replay(f.article, 1), f.data, f.prov, at);
  ASSERT_EQ(targets.size(), 1u);
  EXPECT_EQ(targets[0].first, Term::iri(kIdent));
  // Hand-computed: the identifier's snapshot 1 (t0) is the latest at or before t0+1s.
  EXPECT_EQ(targets[0].second, 1u);
}

TEST(Cascade, IdentifierCreatedAfterRestorePoint) {
  CascadeFixture f;
  f.edit(f.article, Delta({t(kArticle, Term::iri("urn:p:title"), Term::literal("T"))}, {}), f.t0);
  f.edit(f.ident, Delta({t(kIdent, kValue, Term::literal("10.1/a"))}, {}), f.t0 + std::chrono::seconds(5));
  f.edit(f.article, Delta({t(kArticle, kHasId, Term::iri(kIdent))}, {}), f.t0 + std::chrono::seconds(6));
  // The restored state of the current head still links the identifier.
  auto targets = cascade_targets(Term::iri(kArticle), forward_replay(f.article, 2), f.data, f.prov, f.t0);
  ASSERT_EQ(targets.size(), 1u);
  EXPECT_EQ(targets[0].second, 0u);
}

TEST(Vault, EmptyStore) {
  MemoryStore prov;
  EXPECT_TRUE(list_vault(prov).empty());
}

TEST(Vault, DeletionAndRestore) {
  CascadeFixture f;
  Quad title = t(kArticle, Term::iri("urn:p:title"), Term::literal("T"));
  f.edit(f.article, Delta({title}, {}), f.t0);
  EXPECT_TRUE(list_vault(f.prov).empty());
  auto when = f.t0 + std::chrono::seconds(3);
  f.commit(f.article,
           record_snapshot(f.article, Delta({}, {title}), kAgent, std::nullopt, "deleted", when, SnapshotKind::deletion));
  auto vault = list_vault(f.prov);
  ASSERT_EQ(vault.size(), 1u);
  EXPECT_EQ(vault[0].deleted_at, when);
  EXPECT_EQ(vault[0].agent, kAgent);
  EXPECT_EQ(vault[0].last_live_view.quads, QuadSet{title});

  auto r = restore(f.article, {}, 1, kAgent, when + std::chrono::seconds(1));
  f.commit(f.article, r.chain);
  EXPECT_TRUE(list_vault(f.prov).empty());
  EXPECT_EQ(entity_quads(f.data, Term::iri(kArticle)), QuadSet{title});
}

TEST(Restore, DeletionSnapshotIsNotATarget) {
  CascadeFixture f;
  Quad title = t(kArticle, Term::iri("urn:p:title"), Term::literal("T"));
  f.edit(f.article, Delta({title}, {}), f.t0);
  f.commit(f.article, record_snapshot(f.article, Delta({}, {title}), kAgent, std::nullopt, "deleted",
                                      f.t0 + std::chrono::seconds(1), SnapshotKind::deletion));
  f.commit(f.article, restore(f.article, {}, 1, kAgent, f.t0 + std::chrono::seconds(2)).chain);
  EXPECT_THROW(restore(f.article, {title}, 2, kAgent, f.t0 + std::chrono::seconds(3)), InvalidRequest);
}
