#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "medkg/affilparse.hpp"
#include "testutil.hpp"

using namespace medkg;
using namespace medkg::affilparse;

namespace {

Gazetteer small_gazetteer() {
    Gazetteer g;
    g.load_csv_text(
        "city,state,country,latitude,longitude,fips\n"
        "Philadelphia,PA,United States,39.9526,-75.1652,42101\n"
        "Boston,MA,United States,42.3601,-71.0589,25025\n"
        "Springfield,IL,United States,39.7817,-89.6501,17167\n"
        "Springfield,MA,United States,42.1015,-72.5898,25013\n"
        "Basel,BS,Switzerland,47.5596,7.5886,\n"
        "London,,United Kingdom,51.5074,-0.1278,\n");
    return g;
}

AffiliationParser make_parser(const Gazetteer* g) {
    return AffiliationParser(KeywordTables::defaults(), CountryTable::defaults(), g);
}

}  // namespace

TEST_CASE("full worked example: department, institution, city, state, zip, country, email") {
    Gazetteer g = small_gazetteer();
    AffiliationParser parser = make_parser(&g);
    auto p = parser.parse(
        "Dept. of Neurology, Thomas Jefferson University, Philadelphia, PA 19107, USA. jxu@tju.edu");
    CHECK(p.department == "Dept. of Neurology");
    CHECK(p.institution == "Thomas Jefferson University");
    CHECK(p.city == "Philadelphia");
    CHECK(p.state == "PA");
    CHECK(p.zip_code == "19107");
    CHECK(p.country == "United States");  // USA canonicalized
    CHECK(p.email == "jxu@tju.edu");
    CHECK(p.affiliation_type == AffiliationType::EDU);

    auto outcome = parser.geocode(p);
    CHECK(outcome == GeocodeOutcome::Geocoded);
    CHECK(*p.latitude == doctest::Approx(39.9526));
    CHECK(*p.longitude == doctest::Approx(-75.1652));
    CHECK(*p.fips == 42101);
}

TEST_CASE("empty string parses to an all-absent, UNK record") {
    AffiliationParser parser = make_parser(nullptr);
    auto p = parser.parse("");
    CHECK(p.raw == "");
    CHECK(p.department == "");
    CHECK(p.institution == "");
    CHECK(p.email == "");
    CHECK(p.country == "");
    CHECK(p.affiliation_type == AffiliationType::UNK);
    CHECK(!p.has_affiliation_data());
}

TEST_CASE("hospital plus university reads as EDU-HOS") {
    Gazetteer g = small_gazetteer();
    AffiliationParser parser = make_parser(&g);
    auto p = parser.parse("University Hospital Basel, Basel, Switzerland");
    CHECK(p.institution == "University Hospital Basel");
    CHECK(p.country == "Switzerland");
    CHECK(p.city == "Basel");
    CHECK(p.affiliation_type == AffiliationType::EDU_HOS);
}

TEST_CASE("classification keyword precedence") {
    AffiliationParser parser = make_parser(nullptr);
    CHECK(parser.classify("Pfizer Inc, New York") == AffiliationType::COM);
    CHECK(parser.classify("Walter Reed Army Institute of Research") == AffiliationType::MIL);
    CHECK(parser.classify("Ministry of Health, Beijing") == AffiliationType::GOV);
    CHECK(parser.classify("Mayo Clinic") == AffiliationType::HOS);
    CHECK(parser.classify("Heart Health Foundation") == AffiliationType::ORG);
    CHECK(parser.classify("no keywords at all") == AffiliationType::UNK);
    // whole words only: "operating" must not trip any keyword with "rat" etc.
    CHECK(parser.classify("operating theatre supplies") == AffiliationType::UNK);
}

TEST_CASE("parse is pure: identical input yields identical fields") {
    Gazetteer g = small_gazetteer();
    AffiliationParser parser = make_parser(&g);
    const char* raw = "Division of Oncology, Boston Children's Hospital, Boston, MA 02115, USA";
    auto a = parser.parse(raw);
    auto b = parser.parse(raw);
    CHECK(a.department == b.department);
    CHECK(a.institution == b.institution);
    CHECK(a.city == b.city);
    CHECK(a.state == b.state);
    CHECK(a.zip_code == b.zip_code);
    CHECK(a.country == b.country);
    CHECK(a.affiliation_type == b.affiliation_type);
}

TEST_CASE("geocode fallbacks and ambiguity") {
    Gazetteer g = small_gazetteer();
    AffiliationParser parser = make_parser(&g);

    SUBCASE("unique (city, country) works without a state") {
        ParsedAffiliation p;
        p.city = "Boston";
        p.country = "United States";
        CHECK(parser.geocode(p) == GeocodeOutcome::Geocoded);
        CHECK(*p.fips == 25025);
    }
    SUBCASE("two candidate states with no state parsed: ambiguous, absent") {
        ParsedAffiliation p;
        p.city = "Springfield";
        p.country = "United States";
        CHECK(parser.geocode(p) == GeocodeOutcome::Ambiguous);
        CHECK(!p.latitude.has_value());
        CHECK(!p.longitude.has_value());
    }
    SUBCASE("city absent from the gazetteer") {
        ParsedAffiliation p;
        p.city = "Nowhereville";
        p.country = "United States";
        CHECK(parser.geocode(p) == GeocodeOutcome::NoMatch);
        CHECK(!p.latitude.has_value());
    }
    SUBCASE("no city, nothing to do") {
        ParsedAffiliation p;
        CHECK(parser.geocode(p) == GeocodeOutcome::NoCity);
    }
    SUBCASE("coordinates, when present, are always in range") {
        ParsedAffiliation p;
        p.city = "Basel";
        p.state = "BS";
        p.country = "Switzerland";
        REQUIRE(parser.geocode(p) == GeocodeOutcome::Geocoded);
        CHECK(*p.latitude >= -90.0);
        CHECK(*p.latitude <= 90.0);
        CHECK(*p.longitude >= -180.0);
        CHECK(*p.longitude <= 180.0);
    }
}

namespace {

ParsedAffiliation record(std::uint64_t pmid, std::uint32_t order, std::uint64_t and_id, int year,
                         const char* institution) {
    ParsedAffiliation p;
    p.pmid = pmid;
    p.au_order = order;
    p.and_id = and_id;
    p.affiliation_order = 1;
    p.raw = institution;
    p.institution = institution;
    p.pub_year = year;
    return p;
}

AuthorStub stub(std::uint64_t pmid, std::uint32_t order, std::uint64_t and_id, int year) {
    return {pmid, order, and_id, year};
}

}  // namespace

TEST_CASE("affiliation succession") {
    SUBCASE("a 2014 record fills the author's 2017 affiliation-less instance") {
        std::vector<ParsedAffiliation> records = {record(1, 1, 7, 2014, "Old University")};
        std::vector<AuthorStub> instances = {stub(1, 1, 7, 2014), stub(2, 1, 7, 2017)};
        auto report = inherit_affiliations(records, instances, 2016);
        REQUIRE(records.size() == 2);
        const auto& added = records.back();
        CHECK(added.pmid == 2);
        CHECK(added.inherited);
        CHECK(added.institution == "Old University");
        CHECK(added.raw == "");  // the later paper had no affiliation string
        CHECK(report.inherited_records == 1);
        CHECK(report.covered_after == 2);
        CHECK(report.covered_before == 1);
    }

    SUBCASE("the latest pre-cutoff record donates") {
        std::vector<ParsedAffiliation> records = {record(1, 1, 7, 2010, "Older University"),
                                                  record(2, 1, 7, 2015, "Newer University")};
        std::vector<AuthorStub> instances = {stub(1, 1, 7, 2010), stub(2, 1, 7, 2015),
                                             stub(3, 1, 7, 2018)};
        inherit_affiliations(records, instances, 2016);
        REQUIRE(records.size() == 3);
        CHECK(records.back().institution == "Newer University");
    }

    SUBCASE("authors first published after the cutoff inherit nothing") {
        std::vector<ParsedAffiliation> records = {record(1, 1, 7, 2017, "New University")};
        std::vector<AuthorStub> instances = {stub(1, 1, 7, 2017), stub(2, 1, 7, 2019)};
        auto report = inherit_affiliations(records, instances, 2016);
        CHECK(records.size() == 1);
        CHECK(report.inherited_records == 0);
    }

    SUBCASE("undisambiguated instances never inherit") {
        std::vector<ParsedAffiliation> records = {record(1, 1, 7, 2010, "U")};
        std::vector<AuthorStub> instances = {stub(1, 1, 7, 2010), stub(2, 1, 0, 2018)};
        auto report = inherit_affiliations(records, instances, 2016);
        CHECK(records.size() == 1);
        CHECK(report.inherited_records == 0);
    }

    SUBCASE("coverage never decreases and existing fields are never touched") {
        testutil::Rng rng(13);
        for (int iter = 0; iter < 40; ++iter) {
            std::vector<ParsedAffiliation> records;
            std::vector<AuthorStub> instances;
            std::size_t n = 1 + rng.below(30);
            for (std::size_t i = 0; i < n; ++i) {
                std::uint64_t and_id = rng.below(6);  // 0 sometimes
                int year = 2008 + rng.range(0, 12);
                instances.push_back(stub(100 + i, 1, and_id, year));
                if (rng.chance(50))
                    records.push_back(record(100 + i, 1, and_id, year,
                                             rng.chance(50) ? "Alpha Institute" : "Beta College"));
            }
            auto before = records;
            auto report = inherit_affiliations(records, instances, 2016);
            CHECK(report.covered_after >= report.covered_before);
            // prefix unchanged: succession only appends
            REQUIRE(records.size() >= before.size());
            for (std::size_t i = 0; i < before.size(); ++i) {
                CHECK(records[i].institution == before[i].institution);
                CHECK(records[i].raw == before[i].raw);
                CHECK(!records[i].inherited);
            }
            for (std::size_t i = before.size(); i < records.size(); ++i)
                CHECK(records[i].inherited);
        }
    }
}

TEST_CASE("country canonicalization variants") {
    CountryTable t = CountryTable::defaults();
    CHECK(*t.canonicalize("USA") == "United States");
    CHECK(*t.canonicalize("U.S.A.") == "United States");
    CHECK(*t.canonicalize("UK") == "United Kingdom");
    CHECK(*t.canonicalize("United Kingdom.") == "United Kingdom");
    CHECK(*t.canonicalize("the netherlands") == "Netherlands");
    CHECK(!t.canonicalize("Atlantis").has_value());
}

TEST_CASE("postal patterns follow the parsed country") {
    Gazetteer g = small_gazetteer();
    AffiliationParser parser = make_parser(&g);
    auto uk = parser.parse("Institute of Child Health, London, WC1N 1EH, UK");
    CHECK(uk.zip_code == "WC1N 1EH");
    CHECK(uk.country == "United Kingdom");
    auto us = parser.parse("Some Lab, Boston, MA 02115, USA");
    CHECK(us.zip_code == "02115");
}
