#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "medkg/errors.hpp"
#include "medkg/ingest.hpp"
#include "medkg/syngen.hpp"

using namespace medkg;

namespace {

std::string wrap(const std::string& citations) {
    return "<?xml version=\"1.0\"?><PubmedArticleSet>" + citations + "</PubmedArticleSet>";
}

std::vector<ingest::Citation> parse_all(const std::string& doc, ingest::IngestReport* report = nullptr) {
    std::istringstream in(doc);
    std::vector<ingest::Citation> out;
    ingest::IngestReport rep = ingest::parse_citation_xml(in, [&](ingest::Citation&& c) {
        out.push_back(std::move(c));
    });
    if (report) *report = rep;
    return out;
}

const char* kThreeAuthors = R"(<PubmedArticle><MedlineCitation>
  <PMID Version="1">101</PMID>
  <Article>
    <Journal><Title>J Test</Title><JournalIssue><PubDate><Year>2007</Year></PubDate></JournalIssue></Journal>
    <ArticleTitle>A title, with comma</ArticleTitle>
    <Abstract><AbstractText>Background text.</AbstractText><AbstractText>More text.</AbstractText></Abstract>
    <AuthorList>
      <Author><LastName>Smith</LastName><ForeName>John</ForeName><Initials>J</Initials>
        <AffiliationInfo><Affiliation>Dept A, Univ B</Affiliation></AffiliationInfo>
        <AffiliationInfo><Affiliation>Second place</Affiliation></AffiliationInfo>
      </Author>
      <Author><LastName>Doe</LastName><ForeName>Jane</ForeName><Initials>J</Initials><Suffix>Jr</Suffix></Author>
      <Author><CollectiveName>The Group</CollectiveName></Author>
    </AuthorList>
    <ELocationID EIdType="pii">S000</ELocationID>
    <ELocationID EIdType="doi"> 10.1000/j.test.101 </ELocationID>
  </Article>
</MedlineCitation></PubmedArticle>)";

}  // namespace

TEST_CASE("one citation, three authors in order") {
    auto citations = parse_all(wrap(kThreeAuthors));
    REQUIRE(citations.size() == 1);
    const auto& c = citations[0];
    CHECK(c.article.pmid == 101);
    CHECK(c.article.pub_year == 2007);
    CHECK(c.article.journal == "J Test");
    CHECK(c.article.title == "A title, with comma");
    CHECK(c.article.doi == "10.1000/j.test.101");  // trimmed, pii ignored
    CHECK(c.article.has_abstract);
    CHECK(c.article.abstract_text == "Background text. More text.");

    REQUIRE(c.authors.size() == 3);
    CHECK(c.authors[0].au_order == 1);
    CHECK(c.authors[1].au_order == 2);
    CHECK(c.authors[2].au_order == 3);
    CHECK(c.authors[0].last_name == "Smith");
    CHECK(c.authors[0].affiliations ==
          std::vector<std::string>{"Dept A, Univ B", "Second place"});
    CHECK(c.authors[1].suffix == "Jr");
    CHECK(c.authors[2].collective);
    CHECK(c.authors[2].last_name.empty());
}

TEST_CASE("citation without an abstract") {
    auto citations = parse_all(wrap(
        "<MedlineCitation><PMID>7</PMID><Article><ArticleTitle>T</ArticleTitle></Article></MedlineCitation>"));
    REQUIRE(citations.size() == 1);
    CHECK(!citations[0].article.has_abstract);
    CHECK(citations[0].article.abstract_text.empty());
}

TEST_CASE("missing pmid is skipped and counted") {
    ingest::IngestReport report;
    auto citations = parse_all(
        wrap("<MedlineCitation><Article><ArticleTitle>No id</ArticleTitle></Article></MedlineCitation>"
             "<MedlineCitation><PMID>9</PMID></MedlineCitation>"),
        &report);
    REQUIRE(citations.size() == 1);
    CHECK(citations[0].article.pmid == 9);
    CHECK(report.skipped_missing_pmid == 1);
    CHECK(report.citations == 1);
}

TEST_CASE("year fallback to MedlineDate; suspect years flagged") {
    ingest::IngestReport report;
    auto citations = parse_all(
        wrap("<MedlineCitation><PMID>1</PMID><Article><Journal><JournalIssue><PubDate>"
             "<MedlineDate>1998 Dec-1999 Jan</MedlineDate>"
             "</PubDate></JournalIssue></Journal></Article></MedlineCitation>"
             "<MedlineCitation><PMID>2</PMID><Article><Journal><JournalIssue><PubDate>"
             "<MedlineDate>Winter</MedlineDate>"
             "</PubDate></JournalIssue></Journal></Article></MedlineCitation>"
             "<MedlineCitation><PMID>3</PMID><Article><Journal><JournalIssue><PubDate>"
             "<Year>1254</Year>"
             "</PubDate></JournalIssue></Journal></Article></MedlineCitation>"),
        &report);
    REQUIRE(citations.size() == 3);
    CHECK(citations[0].article.pub_year == 1998);
    CHECK(!citations[1].article.pub_year.has_value());
    CHECK(citations[2].article.pub_year == 1254);
    CHECK(citations[2].article.year_suspect);
    CHECK(report.years_flagged == 1);
}

TEST_CASE("text fields are NFC normalized and invalid UTF-8 is repaired") {
    // combining acute in the title; a stray 0xFF byte in the journal
    std::string doc = wrap(
        "<MedlineCitation><PMID>4</PMID><Article>"
        "<Journal><Title>Bad\xff journal</Title></Journal>"
        "<ArticleTitle>Cafe\xcc\x81</ArticleTitle>"
        "</Article></MedlineCitation>");
    ingest::IngestReport report;
    auto citations = parse_all(doc, &report);
    REQUIRE(citations.size() == 1);
    CHECK(citations[0].article.title == "Caf\xc3\xa9");
    CHECK(report.invalid_utf8_replacements == 1);
}

TEST_CASE("malformed XML raises a parse error with a byte offset") {
    std::istringstream in("<PubmedArticleSet><MedlineCitation><PMID>1</PMID>");
    ingest::CitationReader reader(in);
    CHECK_THROWS_AS(reader.next(), ParseError);
}

TEST_CASE("synthetic fixture counts match an independent text scan") {
    syn::CorpusOptions options;
    options.papers = 1000;
    options.seed = 7;
    std::string xml = syn::citation_xml(options);

    // grep-style oracle: count citation and author start tags in the bytes
    auto count_occurrences = [&](const std::string& needle) {
        std::size_t count = 0, at = 0;
        while ((at = xml.find(needle, at)) != std::string::npos) {
            ++count;
            at += needle.size();
        }
        return count;
    };
    std::size_t citation_tags = count_occurrences("<MedlineCitation>");
    std::size_t author_tags = count_occurrences("<Author>");

    ingest::IngestReport report;
    auto citations = parse_all(xml, &report);
    CHECK(citations.size() == 1000);
    CHECK(citations.size() == citation_tags);
    std::size_t instances = 0;
    for (const auto& c : citations) instances += c.authors.size();
    CHECK(instances == author_tags);
    CHECK(report.author_instances == author_tags);
}

TEST_CASE("parsing is deterministic") {
    syn::CorpusOptions options;
    options.papers = 50;
    std::string xml = syn::citation_xml(options);
    auto a = parse_all(xml);
    auto b = parse_all(xml);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].article.pmid == b[i].article.pmid);
        CHECK(a[i].article.title == b[i].article.title);
        REQUIRE(a[i].authors.size() == b[i].authors.size());
        for (std::size_t j = 0; j < a[i].authors.size(); ++j)
            CHECK(a[i].authors[j].last_name == b[i].authors[j].last_name);
    }
}

TEST_CASE("reader memory stays bounded by one citation") {
    syn::CorpusOptions options;
    options.papers = 2000;
    std::istringstream in(syn::citation_xml(options));
    ingest::CitationReader reader(in);
    std::size_t citations = 0;
    while (reader.next()) ++citations;
    CHECK(citations == 2000);
    CHECK(reader.peak_buffer_bytes() < 1024 * 1024);
}

TEST_CASE("load_clustering") {
    auto c = ingest::parse_clustering("5\t1\t42\n6\t2\t42\n", "primary");
    CHECK(c.assignments.size() == 2);
    CHECK(c.assignments.at({5, 1}) == 42);

    CHECK_THROWS_AS(ingest::parse_clustering("5\t1\t42\n5\t1\t43\n", "x"), IntegrityError);
    try {
        ingest::parse_clustering("5\t1\t42\n5\t1\t43\n", "x");
    } catch (const IntegrityError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(ingest::parse_clustering("a\t1\t2\n", "x"), ParseError);
    CHECK_THROWS_AS(ingest::parse_clustering("1\t1\n", "x"), ParseError);
    CHECK_THROWS_AS(ingest::parse_clustering("1\t1\t0\n", "x"), ParseError);
}

TEST_CASE("clustering line-count oracle") {
    std::string data;
    for (int i = 0; i < 1000; ++i)
        data += std::to_string(100 + i) + "\t1\t" + std::to_string(1 + i % 37) + "\n";
    std::size_t newlines = 0;
    for (char ch : data)
        if (ch == '\n') ++newlines;
    auto c = ingest::parse_clustering(data, "big");
    CHECK(c.assignments.size() == 1000);
    CHECK(c.assignments.size() == newlines);
}

TEST_CASE("tabular source: schema check and typed rows") {
    std::string data =
        "PI_ID,PI_Name,ProjectNumber,subProjectNumber,FiscalYear\n"
        "P1,\"SMITH, JOHN\",R01X,,2015\n";
    auto t = ingest::parse_tabular_source(data, "exporter_projects");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][1] == "SMITH, JOHN");
    CHECK(t.rows[0][3] == "");  // empty string = absent
    CHECK(t.column("ProjectNumber") == 2);

    CHECK_THROWS_AS(ingest::parse_tabular_source("Nope\n", "exporter_projects"), SchemaError);
    try {
        ingest::parse_tabular_source(
            "PI_ID,PI_Name,ProjectNumber,subProjectNumber,FiscalYear,Extra\nx,x,x,x,x,x\n",
            "exporter_projects");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("Extra") != std::string::npos);
    }
    CHECK_THROWS_AS(ingest::parse_tabular_source("a,b\n", "no_such_schema"), SchemaError);
}

TEST_CASE("tabular round trip is byte identical") {
    std::string data = "ORCID,LastName,ForeName,DOI,Title,Journal,PubYear\n";
    for (int i = 0; i < 500; ++i) {
        data += "0000-0000-0000-000" + std::to_string(i % 10) + ",Last" + std::to_string(i) +
                ",\"F, irst\",10.1/x" + std::to_string(i) + ",Title " + std::to_string(i) +
                ",J,20" + std::to_string(10 + i % 10) + "\n";
    }
    auto t = ingest::parse_tabular_source(data, "orcid_person");
    CHECK(t.rows.size() == 500);
    CHECK(ingest::format_tabular(t) == data);
}
