#include "shacl_corpus.hpp"

#include <algorithm>
#include <sstream>

#include "vrdf/rdf_io.hpp"

namespace fixture {

namespace {

using vrdf::ViolationKind;

const std::string kDates = R"(
ex:S a sh:NodeShape ; sh:targetClass ex:C ;
  sh:property [ sh:path ex:date ; sh:maxCount 1 ;
    sh:or ( [ sh:datatype xsd:date ] [ sh:datatype xsd:gYearMonth ] [ sh:datatype xsd:gYear ] ) ] .
)";

const std::string kCounts = R"(
ex:S a sh:NodeShape ; sh:targetClass ex:C ;
  sh:property [ sh:path ex:title ; sh:datatype xsd:string ; sh:minCount 1 ; sh:maxCount 1 ] ;
  sh:property [ sh:path ex:keyword ; sh:datatype xsd:string ] ;
  sh:property [ sh:path ex:editor ; sh:minCount 2 ] .
)";

const std::string kDoi = R"(
ex:S a sh:NodeShape ; sh:targetClass ex:C ;
  sh:property [ sh:path ex:doi ; sh:datatype xsd:string ;
    sh:pattern "^10\\.\\d{4,9}/\\S+$" ; sh:message "not a DOI" ] .
)";

const std::string kMisc = R"(
ex:S a sh:NodeShape ; sh:targetClass ex:C ;
  sh:property [ sh:path ex:code ; sh:pattern "^abc" ; sh:flags "i" ] ;
  sh:property [ sh:path ex:home ; sh:pattern "^https://" ] ;
  sh:property [ sh:path ex:author ; sh:class ex:Agent ] ;
  sh:property [ sh:path ex:scheme ; sh:in ( ex:doi ex:orcid ) ] ;
  sh:property [ sh:path ex:pages ; sh:datatype xsd:integer ] ;
  sh:property [ sh:path ex:open ; sh:datatype xsd:boolean ] ;
  sh:property [ sh:path ex:price ; sh:datatype xsd:decimal ] .
)";

std::string e(const std::string& body) { return "ex:e a ex:C " + body + " .\n"; }

}  // namespace

std::vector<ShaclCase> shacl_corpus() {
  const auto dt = ViolationKind::datatype;
  const auto minc = ViolationKind::min_count;
  const auto maxc = ViolationKind::max_count;
  const auto pat = ViolationKind::pattern;
  const auto cls = ViolationKind::class_;
  const auto val = ViolationKind::value;
  const std::string ok_title = "; ex:title \"T\" ; ex:editor ex:p1, ex:p2";
  return {
      {"full date", kDates, e("; ex:date \"2020-05-17\"^^xsd:date"), {}},
      {"year and month", kDates, e("; ex:date \"2020-05\"^^xsd:gYearMonth"), {}},
      {"year only", kDates, e("; ex:date \"2020\"^^xsd:gYear"), {}},
      {"plain year-month string", kDates, e("; ex:date \"2020-05\""), {}},
      {"plain month 13", kDates, e("; ex:date \"2020-13\""), {{"date", dt}}},
      {"typed month 13", kDates, e("; ex:date \"2020-13\"^^xsd:gYearMonth"), {{"date", dt}}},
      {"29 Feb in a common year", kDates, e("; ex:date \"2023-02-29\"^^xsd:date"), {{"date", dt}}},
      {"29 Feb in a leap year", kDates, e("; ex:date \"2024-02-29\"^^xsd:date"), {}},
      {"29 Feb 1900", kDates, e("; ex:date \"1900-02-29\"^^xsd:date"), {{"date", dt}}},
      {"29 Feb 2000", kDates, e("; ex:date \"2000-02-29\"^^xsd:date"), {}},
      {"dateTime not among alternatives", kDates, e("; ex:date \"2020-05-17T10:00:00\"^^xsd:dateTime"), {{"date", dt}}},
      {"negative year", kDates, e("; ex:date \"-0042\"^^xsd:gYear"), {}},
      {"five-digit year", kDates, e("; ex:date \"20200\"^^xsd:gYear"), {}},
      {"three-digit year", kDates, e("; ex:date \"202\"^^xsd:gYear"), {{"date", dt}}},
      {"date with timezone", kDates, e("; ex:date \"2020-05-17+02:00\"^^xsd:date"), {}},
      {"two dates", kDates, e("; ex:date \"2020\"^^xsd:gYear, \"2021\"^^xsd:gYear"), {{"date", maxc}}},
      {"free text date", kDates, e("; ex:date \"May 2020\""), {{"date", dt}}},
      {"no date at all", kDates, e(""), {}},
      {"title once", kCounts, e(ok_title), {}},
      {"no title", kCounts, e("; ex:editor ex:p1, ex:p2"), {{"title", minc}}},
      {"two titles", kCounts, e("; ex:title \"T\", \"U\" ; ex:editor ex:p1, ex:p2"), {{"title", maxc}}},
      {"many keywords", kCounts, e(ok_title + " ; ex:keyword \"a\", \"b\", \"c\", \"d\", \"e\""), {}},
      {"integer title", kCounts, e("; ex:title 5 ; ex:editor ex:p1, ex:p2"), {{"title", dt}}},
      {"language-tagged title", kCounts, e("; ex:title \"T\"@en ; ex:editor ex:p1, ex:p2"), {{"title", dt}}},
      {"one editor of two", kCounts, e("; ex:title \"T\" ; ex:editor ex:p1"), {{"editor", minc}}},
      {"missing everything", kCounts, e(""), {{"title", minc}, {"editor", minc}}},
      {"well-formed DOI", kDoi, e("; ex:doi \"10.1515/9783110354348-019\""), {}},
      {"prefixed DOI", kDoi, e("; ex:doi \"doi:banana\""), {{"doi", pat}}},
      {"short registrant", kDoi, e("; ex:doi \"10.123/x\""), {{"doi", pat}}},
      {"DOI with a space", kDoi, e("; ex:doi \"10.1515/has space\""), {{"doi", pat}}},
      {"one good one bad DOI", kDoi, e("; ex:doi \"10.1515/a\", \"11.1515/a\""), {{"doi", pat}}},
      {"case-insensitive pattern", kMisc, e("; ex:code \"ABCd\""), {}},
      {"pattern on IRI", kMisc, e("; ex:home <http://example.org/>"), {{"home", pat}}},
      {"pattern on IRI holds", kMisc, e("; ex:home <https://example.org/>"), {}},
      {"author is an agent", kMisc, e("; ex:author ex:a1") + "ex:a1 a ex:Agent .", {}},
      {"author of another class", kMisc, e("; ex:author ex:a1") + "ex:a1 a ex:Other .", {{"author", cls}}},
      {"author as literal", kMisc, e("; ex:author \"Montanari\""), {{"author", cls}}},
      {"scheme in list", kMisc, e("; ex:scheme ex:doi"), {}},
      {"scheme outside list", kMisc, e("; ex:scheme ex:isbn"), {{"scheme", val}}},
      {"signed integer", kMisc, e("; ex:pages \"+12\"^^xsd:integer"), {}},
      {"decimal where integer expected", kMisc, e("; ex:pages 12.0"), {{"pages", dt}}},
      {"integer lexical in plain string", kMisc, e("; ex:pages \"12\""), {}},
      {"boolean one", kMisc, e("; ex:open \"1\"^^xsd:boolean"), {}},
      {"boolean yes", kMisc, e("; ex:open \"yes\"^^xsd:boolean"), {{"open", dt}}},
      {"decimal without leading digit", kMisc, e("; ex:price \".5\"^^xsd:decimal"), {}},
      {"two problems at once", kMisc, e("; ex:scheme ex:isbn ; ex:open \"maybe\""), {{"scheme", val}, {"open", dt}}},
  };
}

std::string run_shacl_case(const ShaclCase& c) {
  auto schemas = vrdf::parse_shapes(vrdf::parse_turtle(kShapePrologue + c.shapes));
  vrdf::QuadSet all = vrdf::parse_turtle(kShapePrologue + c.entity);
  const vrdf::Term focus = vrdf::Term::iri("https://example.org/e");
  vrdf::EntityGraph g(focus);
  for (const auto& q : all)
    if (q.subject == focus) g.quads.insert(q);
  auto types = [&](const vrdf::Term& t) {
    std::set<std::string> out;
    for (const auto& q : all)
      if (q.subject == t && q.predicate.value() == "http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
        out.insert(q.object.value());
    return out;
  };
  auto report = vrdf::validate_all(g, schemas, types);

  std::vector<std::pair<std::string, vrdf::ViolationKind>> got;
  for (const auto& v : report.violations) got.emplace_back(vrdf::local_name(v.path), v.kind);
  auto want = c.expected;
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  if (got == want) return {};
  std::ostringstream msg;
  msg << c.name << ": got";
  for (const auto& v : report.violations) msg << " [" << vrdf::to_string(v.kind) << " " << v.message << "]";
  msg << ", expected " << want.size() << " violation(s)";
  return msg.str();
}

}  // namespace fixture
