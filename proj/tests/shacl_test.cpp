#include <gtest/gtest.h>

#include <boost/regex.hpp>

#include "catalog.hpp"
#include "shacl_corpus.hpp"
#include "vrdf/error.hpp"
#include "vrdf/rdf_io.hpp"
#include "vrdf/shacl.hpp"
#include "xsd_oracle.hpp"

using namespace vrdf;

namespace {

const std::string kXsd = "http://www.w3.org/2001/XMLSchema#";

const PropertyConstraint* constraint(const std::vector<ShapeSchema>& schemas, const std::string& cls,
                                     const std::string& path) {
  for (const auto& s : schemas)
    if (s.target_class == cls)
      for (const auto& c : s.constraints)
        if (c.path == path) return &c;
  return nullptr;
}

std::vector<ShapeSchema> shapes(const std::string& body, std::vector<std::string>* warnings = nullptr) {
  return parse_shapes(parse_turtle(fixture::kShapePrologue + body), warnings);
}

}  // namespace

TEST(ShapeParsing, EmptyGraph) { EXPECT_TRUE(parse_shapes({}).empty()); }

TEST(ShapeParsing, DateAlternativesBecomeOneConstraint) {
  auto schemas = fixture::catalog_shapes();
  auto* c = constraint(schemas, fixture::ns::fabio + "JournalArticle", fixture::ns::prism + "publicationDate");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->datatypes, (std::vector<std::string>{kXsd + "date", kXsd + "gYearMonth", kXsd + "gYear"}));
  EXPECT_EQ(c->max_count, 1u);
}

TEST(ShapeParsing, CardinalitiesAreKeptAsWritten) {
  auto schemas = fixture::catalog_shapes();
  auto* title = constraint(schemas, fixture::ns::fabio + "JournalArticle", fixture::ns::dcterms + "title");
  auto* ids = constraint(schemas, fixture::ns::fabio + "JournalArticle", fixture::ns::datacite + "hasIdentifier");
  ASSERT_TRUE(title && ids);
  EXPECT_EQ(title->max_count, 1u);
  EXPECT_EQ(title->min_count, 1u);
  EXPECT_FALSE(ids->max_count);
  EXPECT_EQ(ids->object_class, fixture::ns::datacite + "Identifier");
}

TEST(ShapeParsing, UnsupportedComponentsWarn) {
  std::vector<std::string> warnings;
  auto s = shapes(R"(ex:S a sh:NodeShape ; sh:targetClass ex:C ;
      sh:property [ sh:path ex:a ; sh:minLength 3 ; sh:maxCount 1 ] ;
      sh:property [ sh:path ( ex:a ex:b ) ; sh:minCount 1 ] .)",
                  &warnings);
  ASSERT_EQ(s.size(), 1u);
  ASSERT_EQ(s[0].constraints.size(), 1u);
  EXPECT_EQ(s[0].constraints[0].max_count, 1u);
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(ShapeParsing, InconsistentShapesAreConfigErrors) {
  EXPECT_THROW(shapes("ex:S a sh:NodeShape ; sh:property [ sh:path ex:a ] ."), ConfigError);
  EXPECT_THROW(shapes("ex:S a sh:NodeShape ; sh:targetClass ex:C ; sh:property [ sh:path ex:a ; sh:minCount 2 ; "
                      "sh:maxCount 1 ] ."),
               ConfigError);
  EXPECT_THROW(shapes("ex:S a sh:NodeShape ; sh:targetClass ex:C ; sh:property [ sh:path ex:a ; sh:datatype "
                      "xsd:string ; sh:class ex:D ] ."),
               ConfigError);
  EXPECT_THROW(shapes("ex:S a sh:NodeShape ; sh:targetClass ex:C ; sh:property [ sh:path ex:a ; sh:pattern \"(\" ] ."),
               ConfigError);
}

class ShaclCorpus : public ::testing::TestWithParam<fixture::ShaclCase> {};

TEST_P(ShaclCorpus, VerdictMatchesHandDerivation) { EXPECT_EQ(fixture::run_shacl_case(GetParam()), ""); }

INSTANTIATE_TEST_SUITE_P(Cases, ShaclCorpus, ::testing::ValuesIn(fixture::shacl_corpus()), [](const auto& info) {
  std::string n;
  for (char c : info.param.name) n += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return n;
});

TEST(Validation, CustomMessageOnPatternViolation) {
  auto schemas = fixture::catalog_shapes();
  Term id = Term::iri("https://w3id.org/oc/meta/id/1");
  EntityGraph g(id);
  g.add(Term::iri(fixture::ns::rdf_type), Term::iri(fixture::ns::datacite + "Identifier"));
  g.add(Term::iri(fixture::ns::datacite + "usesIdentifierScheme"), Term::iri(fixture::ns::datacite + "doi"));
  g.add(Term::iri(fixture::ns::literal + "hasLiteralValue"), Term::literal(fixture::kChapterDoi));
  EXPECT_TRUE(validate_all(g, schemas).conforms());

  // Independent check of the fixture pattern with another regex engine.
  EXPECT_TRUE(boost::regex_search(fixture::kChapterDoi, boost::regex(R"(^10\.\d{4,9}/\S+$)")));
  EXPECT_FALSE(boost::regex_search(std::string("doi:banana"), boost::regex(R"(^10\.\d{4,9}/\S+$)")));

  EntityGraph bad(id);
  bad.quads = g.quads;
  std::erase_if(bad.quads, [](const Quad& q) { return q.predicate.value() == fixture::ns::literal + "hasLiteralValue"; });
  bad.add(Term::iri(fixture::ns::literal + "hasLiteralValue"), Term::literal("doi:banana"));
  auto report = validate_all(bad, schemas);
  ASSERT_EQ(report.violations.size(), 1u);
  EXPECT_EQ(report.violations[0].kind, ViolationKind::pattern);
  EXPECT_EQ(report.violations[0].message, "A DOI starts with 10. followed by a registrant code and a suffix");
  EXPECT_EQ(report.violations[0].offending_value, Term::literal("doi:banana"));
}

TEST(Validation, DefaultMessagesNameThePath) {
  auto s = shapes("ex:S a sh:NodeShape ; sh:targetClass ex:C ; sh:property [ sh:path ex:title ; sh:minCount 1 ] .");
  EntityGraph g(Term::iri("https://example.org/e"));
  g.add(Term::iri(fixture::ns::rdf_type), Term::iri("https://example.org/C"));
  auto r = validate_all(g, s);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_NE(r.violations[0].message.find("https://example.org/title"), std::string::npos);
}

TEST(Validation, ShapesForEveryTypeApply) {
  auto s = shapes(R"(ex:S a sh:NodeShape ; sh:targetClass ex:C ; sh:property [ sh:path ex:a ; sh:minCount 1 ] .
                     ex:T a sh:NodeShape ; sh:targetClass ex:D ; sh:property [ sh:path ex:b ; sh:minCount 1 ] .)");
  EntityGraph g(Term::iri("https://example.org/e"));
  g.add(Term::iri(fixture::ns::rdf_type), Term::iri("https://example.org/C"));
  g.add(Term::iri(fixture::ns::rdf_type), Term::iri("https://example.org/D"));
  EXPECT_EQ(validate_all(g, s).violations.size(), 2u);
  EntityGraph none(Term::iri("https://example.org/e"));
  EXPECT_TRUE(validate_all(none, s).conforms());
}

TEST(Forms, WidgetsFollowConstraints) {
  auto schemas = fixture::catalog_shapes();
  auto rules = fixture::catalog_rules();
  const ShapeSchema* article = nullptr;
  for (const auto& s : schemas)
    if (s.target_class == fixture::ns::fabio + "JournalArticle") article = &s;
  ASSERT_NE(article, nullptr);
  auto form = compile_form(*article, resolve_rule({fixture::ns::fabio + "JournalArticle"}, rules));
  auto find = [&](const std::string& p) {
    for (const auto& f : form)
      if (f.path == p) return f;
    throw std::runtime_error("no field " + p);
  };
  auto date = find(fixture::ns::prism + "publicationDate");
  EXPECT_EQ(date.widget, Widget::dropdown);
  EXPECT_EQ(date.datatype_options.size(), 3u);

  auto title = find(fixture::ns::dcterms + "title");
  EXPECT_EQ(title.widget, Widget::textarea);  // inputType in the display rule
  EXPECT_FALSE(title.repeatable());
  EXPECT_TRUE(title.required);
  EXPECT_EQ(title.label, "Title");

  auto ids = find(fixture::ns::datacite + "hasIdentifier");
  EXPECT_TRUE(ids.repeatable());
  EXPECT_EQ(ids.widget, Widget::nested_entity);
  EXPECT_FALSE(ids.required);

  EXPECT_EQ(widget_for_datatype(kXsd + "date"), Widget::date_full);
  EXPECT_EQ(widget_for_datatype(kXsd + "gYearMonth"), Widget::date_year_month);
  EXPECT_EQ(widget_for_datatype(kXsd + "gYear"), Widget::date_year);
  EXPECT_EQ(widget_for_datatype(kXsd + "integer"), Widget::number);
  EXPECT_EQ(widget_for_datatype(kXsd + "string"), Widget::text);
}

TEST(Lexical, CalendarAndSignCases) {
  EXPECT_TRUE(lexical_valid("2024-02-29", kXsd + "date"));
  EXPECT_FALSE(lexical_valid("2023-02-29", kXsd + "date"));
  EXPECT_TRUE(lexical_valid("-0042", kXsd + "gYear"));
  EXPECT_TRUE(lexical_valid("2020-05", kXsd + "gYearMonth"));
  EXPECT_FALSE(lexical_valid("2020-13", kXsd + "gYearMonth"));
  EXPECT_FALSE(lexical_valid(" 1", kXsd + "integer"));
  EXPECT_TRUE(lexical_valid("2024-09-16T24:00:00", kXsd + "dateTime"));
  EXPECT_FALSE(lexical_valid("2024-09-16T24:00:01", kXsd + "dateTime"));
  EXPECT_THROW(lexical_valid("x", kXsd + "duration"), InvalidRequest);
}

TEST(Lexical, AgreesWithRegexOracleOnHandPickedEdges) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"0000", "gYear"},          {"-0000", "gYear"},        {"00042", "gYear"},      {"2020Z", "gYear"},
      {"2020+14:00", "gYear"},    {"2020+14:01", "gYear"},   {"2020-00", "gYearMonth"}, {"1.", "decimal"},
      {".", "decimal"},           {"-.5", "decimal"},        {"+", "integer"},        {"TRUE", "boolean"},
      {"a b", "anyURI"},          {"%zz", "anyURI"},         {"%41", "anyURI"},       {"http://x/é", "anyURI"},
      {"2000-02-29", "date"},     {"1900-02-29", "date"},    {"2024-04-31", "date"},  {"\x01", "string"},
      {"\xC3\x28", "string"},     {"\xEF\xBF\xBE", "string"}, {"ok\tfine", "string"}, {"\xF0\x9F\x93\x9A", "string"},
  };
  for (const auto& [v, dt] : cases) {
    EXPECT_EQ(lexical_valid(v, kXsd + dt), fixture::oracle_lexical_valid(v, kXsd + dt)) << dt << " '" << v << "'";
  }
}
