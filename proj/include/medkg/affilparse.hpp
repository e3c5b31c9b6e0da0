#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace medkg::affilparse {

enum class AffiliationType : std::uint8_t { COM, EDU, EDU_HOS, GOV, HOS, MIL, ORG, UNK };

std::string_view affiliation_type_name(AffiliationType t);
std::optional<AffiliationType> affiliation_type_from_name(std::string_view s);

// The fine-grained affiliation record. Empty string = absent field.
struct ParsedAffiliation {
    std::uint64_t pmid = 0;
    std::uint32_t au_order = 0;
    std::uint64_t and_id = 0;  // 0 = undisambiguated
    std::uint32_t affiliation_order = 1;
    std::string raw;
    std::string department;
    std::string institution;
    std::string email;
    std::string zip_code;
    std::string location;
    std::string country;
    std::string city;
    std::string state;
    AffiliationType affiliation_type = AffiliationType::UNK;
    std::optional<double> latitude;
    std::optional<double> longitude;
    std::optional<std::int64_t> fips;
    bool inherited = false;
    std::optional<int> pub_year;  // carried for the succession rule

    bool has_affiliation_data() const;
};

struct GazetteerEntry {
    std::string city;
    std::string state;
    std::string country;
    double latitude = 0.0;
    double longitude = 0.0;
    std::optional<std::int64_t> fips;
};

class Gazetteer {
public:
    // CSV with header city,state,country,latitude,longitude,fips.
    // Country names are canonicalized through the same table the parser uses.
    void load_file(const std::string& path);
    void load_csv_text(std::string_view data);
    void add(GazetteerEntry entry);

    const GazetteerEntry* lookup_exact(std::string_view city, std::string_view state,
                                       std::string_view country) const;
    // nullptr + count>1 when (city, country) is ambiguous.
    std::pair<const GazetteerEntry*, std::size_t> lookup_city_country(std::string_view city,
                                                                      std::string_view country) const;

    bool is_city(std::string_view folded) const { return city_names_.contains(std::string(folded)); }
    bool is_state(std::string_view folded) const { return state_names_.contains(std::string(folded)); }
    const std::string* canonical_city(std::string_view folded) const;
    const std::string* canonical_state(std::string_view folded) const;

    std::size_t size() const { return entries_.size(); }

private:
    std::vector<GazetteerEntry> entries_;
    std::unordered_map<std::string, std::size_t> exact_;                 // city|state|country
    std::unordered_map<std::string, std::vector<std::size_t>> by_city_country_;
    std::unordered_set<std::string> city_names_;
    std::unordered_set<std::string> state_names_;
    std::unordered_map<std::string, std::string> canonical_city_;
    std::unordered_map<std::string, std::string> canonical_state_;
};

// Editable keyword tables; one term per line in data files, lower case,
// multi-word terms allowed. defaults() carries a built-in set so the
// parser works with no data directory at all.
struct KeywordTables {
    std::vector<std::string> department;
    std::vector<std::string> institution;
    std::vector<std::string> edu;
    std::vector<std::string> hos;
    std::vector<std::string> com;
    std::vector<std::string> gov;
    std::vector<std::string> mil;
    std::vector<std::string> org;

    static KeywordTables defaults();
    // Reads <dir>/{department,institution,edu,hos,com,gov,mil,org}.txt,
    // falling back to the default list for any missing file.
    static KeywordTables load_dir(const std::string& dir);
};

// variant -> canonical English short name ("usa" -> "United States")
struct CountryTable {
    std::unordered_map<std::string, std::string> canonical_by_variant;  // folded variant

    static CountryTable defaults();
    // TSV canonical<TAB>variant, one per line; canonical maps to itself.
    static CountryTable load_file(const std::string& path);

    std::optional<std::string> canonicalize(std::string_view raw) const;
};

enum class GeocodeOutcome : std::uint8_t { Geocoded, Ambiguous, NoMatch, NoCity };

struct GeocodeStats {
    std::uint64_t geocoded = 0;
    std::uint64_t ambiguous = 0;
    std::uint64_t unmatched = 0;

    void add(GeocodeOutcome o) {
        if (o == GeocodeOutcome::Geocoded) ++geocoded;
        else if (o == GeocodeOutcome::Ambiguous) ++ambiguous;
        else if (o == GeocodeOutcome::NoMatch) ++unmatched;
    }
};

class AffiliationParser {
public:
    AffiliationParser(KeywordTables keywords, CountryTable countries,
                      const Gazetteer* gazetteer = nullptr);

    // Pure field extraction; keys (pmid etc.) are the caller's business.
    ParsedAffiliation parse(std::string_view raw) const;

    AffiliationType classify(std::string_view raw) const;

    // Fills latitude/longitude/fips from the gazetteer (both coordinates or
    // neither). Requires a gazetteer.
    GeocodeOutcome geocode(ParsedAffiliation& parsed) const;

private:
    KeywordTables keywords_;
    CountryTable countries_;
    const Gazetteer* gazetteer_;
};

struct AuthorStub {
    std::uint64_t pmid = 0;
    std::uint32_t au_order = 0;
    std::uint64_t and_id = 0;
    std::optional<int> pub_year;
};

struct InheritReport {
    std::uint64_t instances = 0;
    std::uint64_t covered_before = 0;
    std::uint64_t covered_after = 0;
    std::uint64_t inherited_records = 0;

    double coverage_before() const {
        return instances ? static_cast<double>(covered_before) / static_cast<double>(instances) : 0.0;
    }
    double coverage_after() const {
        return instances ? static_cast<double>(covered_after) / static_cast<double>(instances) : 0.0;
    }
};

// Affiliation succession: a disambiguated author whose pre-cutoff record
// carries affiliation data donates those fields to their affiliation-less
// instances at or after the cutoff year. Donated rows are appended with
// inherited = true; existing rows are never modified.
InheritReport inherit_affiliations(std::vector<ParsedAffiliation>& records,
                                   const std::vector<AuthorStub>& instances, int cutoff_year);

}  // namespace medkg::affilparse
