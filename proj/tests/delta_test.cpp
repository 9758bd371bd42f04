#include <gtest/gtest.h>

#include "random_graphs.hpp"
#include "vrdf/delta.hpp"
#include "vrdf/error.hpp"

using namespace vrdf;

namespace {
Quad q(const std::string& s, const std::string& o, std::optional<std::string> g = std::nullopt) {
  return Quad(Term::iri(s), Term::iri("urn:p"), Term::literal(o), g ? std::optional(Term::iri(*g)) : std::nullopt);
}
}  // namespace

TEST(Delta, DiffOfEqualGraphsIsEmpty) {
  fixture::QuadGen gen(1);
  auto g = gen.graph(20);
  EXPECT_TRUE(diff(g, g).empty());
}

TEST(Delta, PureCreation) {
  Quad t(Term::iri("urn:e"), Term::iri("http://purl.org/dc/terms/title"), Term::literal("T"));
  Delta d = diff({}, {t});
  EXPECT_EQ(d.insertions(), QuadSet{t});
  EXPECT_TRUE(d.deletions().empty());
}

TEST(Delta, InvertSwaps) {
  EXPECT_TRUE(invert(Delta{}).empty());
  Delta d({q("urn:a", "x")}, {});
  Delta i = invert(d);
  EXPECT_TRUE(i.insertions().empty());
  EXPECT_EQ(i.deletions(), QuadSet{q("urn:a", "x")});
}

TEST(Delta, ApplyEmptyIsIdentity) {
  fixture::QuadGen gen(2);
  auto g = gen.graph(10);
  EXPECT_EQ(vrdf::apply(Delta{}, g), g);
}

TEST(Delta, InvalidDeltas) {
  EXPECT_THROW(Delta({q("urn:a", "x")}, {q("urn:a", "x")}), InvalidDelta);
  EXPECT_THROW(Delta({Quad(Term::blank("b"), Term::iri("urn:p"), Term::literal("x"))}, {}), InvalidDelta);
  EntityGraph a(Term::iri("urn:a")), b(Term::iri("urn:b"));
  EXPECT_THROW(diff(a, b), InvalidDelta);
}

TEST(Delta, RandomGraphsDiffApply) {
  fixture::QuadGen gen(3);
  for (int i = 0; i < 200; ++i) {
    auto a = gen.graph(30), b = gen.graph(30);
    EXPECT_EQ(vrdf::apply(diff(a, b), a), b);
    EXPECT_EQ(vrdf::apply(invert(diff(a, b)), b), a);
  }
}

TEST(UpdateText, EmptyDelta) {
  EXPECT_EQ(to_update_text(Delta{}), "");
  EXPECT_TRUE(from_update_text("").empty());
}

TEST(UpdateText, OneInsertion) {
  Delta d({Quad(Term::iri("urn:s"), Term::iri("urn:p"), Term::literal("o"))}, {});
  EXPECT_EQ(to_update_text(d), "INSERT DATA { <urn:s> <urn:p> \"o\" . }");
}

TEST(UpdateText, DeletionBlockComesFirst) {
  Delta d({q("urn:a", "new")}, {q("urn:a", "old", "urn:g")});
  EXPECT_EQ(to_update_text(d),
            "DELETE DATA { GRAPH <urn:g> { <urn:a> <urn:p> \"old\" . } }; INSERT DATA { <urn:a> <urn:p> \"new\" . }");
}

TEST(UpdateText, ParsesDeleteInGraph) {
  Delta d = from_update_text("DELETE DATA { GRAPH <urn:g> { <urn:a> <urn:p> \"x\" } }");
  EXPECT_TRUE(d.insertions().empty());
  EXPECT_EQ(d.deletions(), QuadSet{q("urn:a", "x", "urn:g")});
}

TEST(UpdateText, MergesBlocksAndRejectsOverlap) {
  Delta d = from_update_text(
      "INSERT DATA { <urn:a> <urn:p> \"1\" } ; INSERT DATA { <urn:b> <urn:p> \"2\" } ; DELETE DATA { <urn:c> <urn:p> \"3\" }");
  EXPECT_EQ(d.insertions().size(), 2u);
  EXPECT_EQ(d.deletions().size(), 1u);
  EXPECT_THROW(from_update_text("INSERT DATA { <urn:a> <urn:p> \"1\" } ; DELETE DATA { <urn:a> <urn:p> \"1\" }"),
               InvalidDelta);
  EXPECT_THROW(from_update_text("INSERT DATA { _:b <urn:p> \"1\" }"), InvalidDelta);
  EXPECT_THROW(from_update_text("DELETE WHERE { ?s ?p ?o }"), DisallowedUpdate);
}

TEST(UpdateText, GeneratedCorpusRoundTrips) {
  fixture::QuadGen gen(4);
  for (int i = 0; i < 300; ++i) {
    auto a = gen.graph(gen.pick(15)), b = gen.graph(gen.pick(15));
    Delta d = diff(a, b);
    EXPECT_EQ(from_update_text(to_update_text(d)), d) << to_update_text(d);
  }
}
