#include "medkg/affilparse.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "medkg/errors.hpp"
#include "medkg/ingest.hpp"
#include "medkg/text.hpp"

namespace medkg::affilparse {

namespace {

const std::regex& email_regex() {
    static const std::regex re(R"(([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}))");
    return re;
}

// Postal patterns by canonical country; everything else uses the US rule.
const std::regex& zip_regex_for(const std::string& country) {
    static const std::regex us(R"(\b(\d{5}(?:-\d{4})?)\b)");
    static const std::regex uk(R"(\b([A-Z]{1,2}\d[A-Z\d]? ?\d[A-Z]{2})\b)");
    static const std::regex ca(R"(\b([A-Z]\d[A-Z] ?\d[A-Z]\d)\b)");
    static const std::regex nl(R"(\b(\d{4} ?[A-Z]{2})\b)");
    static const std::regex jp(R"(\b(\d{3}-\d{4})\b)");
    static const std::regex br(R"(\b(\d{5}-\d{3})\b)");
    static const std::regex pl(R"(\b(\d{2}-\d{3})\b)");
    static const std::regex four(R"(\b(\d{4})\b)");
    static const std::regex five(R"(\b(\d{5})\b)");
    static const std::regex six(R"(\b(\d{6})\b)");

    static const std::map<std::string, const std::regex*> table = {
        {"United Kingdom", &uk}, {"Canada", &ca},      {"Netherlands", &nl},
        {"Japan", &jp},          {"Brazil", &br},      {"Poland", &pl},
        {"Switzerland", &four},  {"Austria", &four},   {"Australia", &four},
        {"Belgium", &four},      {"Denmark", &four},   {"Norway", &four},
        {"Hungary", &four},      {"New Zealand", &four}, {"South Africa", &four},
        {"Germany", &five},      {"France", &five},    {"Italy", &five},
        {"Spain", &five},        {"Mexico", &five},    {"South Korea", &five},
        {"Finland", &five},      {"Sweden", &five},    {"Turkey", &five},
        {"China", &six},         {"India", &six},      {"Singapore", &six},
        {"Russia", &six},
    };
    auto it = table.find(country);
    return it == table.end() ? us : *it->second;
}

// Word-level tokenization for keyword matching: lower-cased alnum runs.
std::vector<std::string> words_of(std::string_view s) {
    std::vector<std::string> words;
    std::string folded = text::casefold(s);
    std::string current;
    std::size_t i = 0;
    while (i <= folded.size()) {
        char32_t cp = 0;
        bool w = false;
        if (i < folded.size()) {
            cp = text::decode_cp(folded, i);
            w = text::is_word_cp(cp);
        } else {
            ++i;
        }
        if (w) {
            text::append_cp(current, cp);
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    return words;
}

// keyword = space-separated word sequence; matches whole words only, so
// "rat" never fires inside "operating".
bool contains_keyword(const std::vector<std::string>& words, const std::string& keyword) {
    std::vector<std::string> kw = words_of(keyword);
    if (kw.empty() || words.size() < kw.size()) return false;
    for (std::size_t i = 0; i + kw.size() <= words.size(); ++i) {
        bool all = true;
        for (std::size_t j = 0; j < kw.size(); ++j) {
            if (words[i + j] != kw[j]) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

bool contains_any(const std::vector<std::string>& words, const std::vector<std::string>& table) {
    for (const std::string& kw : table)
        if (contains_keyword(words, kw)) return true;
    return false;
}

std::string strip_trailing_periods(std::string_view s) {
    std::string_view t = text::trim(s);
    while (!t.empty() && (t.back() == '.' || t.back() == ';')) {
        t.remove_suffix(1);
        t = text::trim(t);
    }
    return std::string(t);
}

std::vector<std::string> read_lines_or(const std::string& path, std::vector<std::string> fallback) {
    std::ifstream in(path);
    if (!in) return fallback;
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view t = text::trim(line);
        if (!t.empty() && t.front() != '#') out.emplace_back(t);
    }
    return out;
}

std::string gaz_key(std::string_view city, std::string_view state, std::string_view country) {
    return text::fold_key(city) + "|" + text::fold_key(state) + "|" + text::fold_key(country);
}

}  // namespace

bool ParsedAffiliation::has_affiliation_data() const {
    return !(raw.empty() && department.empty() && institution.empty() && email.empty() &&
             zip_code.empty() && location.empty() && country.empty() && city.empty() &&
             state.empty());
}

std::string_view affiliation_type_name(AffiliationType t) {
    switch (t) {
        case AffiliationType::COM: return "COM";
        case AffiliationType::EDU: return "EDU";
        case AffiliationType::EDU_HOS: return "EDU-HOS";
        case AffiliationType::GOV: return "GOV";
        case AffiliationType::HOS: return "HOS";
        case AffiliationType::MIL: return "MIL";
        case AffiliationType::ORG: return "ORG";
        case AffiliationType::UNK: return "UNK";
    }
    return "UNK";
}

std::optional<AffiliationType> affiliation_type_from_name(std::string_view s) {
    for (auto t : {AffiliationType::COM, AffiliationType::EDU, AffiliationType::EDU_HOS,
                   AffiliationType::GOV, AffiliationType::HOS, AffiliationType::MIL,
                   AffiliationType::ORG, AffiliationType::UNK})
        if (affiliation_type_name(t) == s) return t;
    return std::nullopt;
}

// --- gazetteer ---------------------------------------------------------------

void Gazetteer::add(GazetteerEntry entry) {
    std::size_t idx = entries_.size();
    std::string city_f = text::fold_key(entry.city);
    std::string state_f = text::fold_key(entry.state);
    std::string country_f = text::fold_key(entry.country);
    exact_.emplace(gaz_key(entry.city, entry.state, entry.country), idx);
    by_city_country_[city_f + "|" + country_f].push_back(idx);
    city_names_.insert(city_f);
    canonical_city_.emplace(city_f, entry.city);
    if (!state_f.empty()) {
        state_names_.insert(state_f);
        canonical_state_.emplace(state_f, entry.state);
    }
    entries_.push_back(std::move(entry));
}

void Gazetteer::load_csv_text(std::string_view data) {
    ingest::TabularData t = ingest::parse_tabular_source(data, "gazetteer");
    CountryTable countries = CountryTable::defaults();
    for (const auto& row : t.rows) {
        GazetteerEntry e;
        e.city = row[0];
        e.state = row[1];
        e.country = countries.canonicalize(row[2]).value_or(row[2]);
        e.latitude = std::stod(row[3]);
        e.longitude = std::stod(row[4]);
        if (!row[5].empty()) e.fips = std::stoll(row[5]);
        if (e.latitude < -90 || e.latitude > 90 || e.longitude < -180 || e.longitude > 180)
            throw Error("gazetteer coordinates out of range for " + e.city);
        add(std::move(e));
    }
}

void Gazetteer::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open gazetteer: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    load_csv_text(buf.str());
}

const GazetteerEntry* Gazetteer::lookup_exact(std::string_view city, std::string_view state,
                                              std::string_view country) const {
    auto it = exact_.find(gaz_key(city, state, country));
    return it == exact_.end() ? nullptr : &entries_[it->second];
}

std::pair<const GazetteerEntry*, std::size_t> Gazetteer::lookup_city_country(
    std::string_view city, std::string_view country) const {
    auto it = by_city_country_.find(text::fold_key(city) + "|" + text::fold_key(country));
    if (it == by_city_country_.end()) return {nullptr, 0};
    if (it->second.size() == 1) return {&entries_[it->second.front()], 1};
    return {nullptr, it->second.size()};
}

const std::string* Gazetteer::canonical_city(std::string_view folded) const {
    auto it = canonical_city_.find(std::string(folded));
    return it == canonical_city_.end() ? nullptr : &it->second;
}

const std::string* Gazetteer::canonical_state(std::string_view folded) const {
    auto it = canonical_state_.find(std::string(folded));
    return it == canonical_state_.end() ? nullptr : &it->second;
}

// --- keyword tables ----------------------------------------------------------

KeywordTables KeywordTables::defaults() {
    KeywordTables t;
    t.department = {"dept", "department", "division", "school", "institute of", "laboratory of",
                    "unit of", "section of", "faculty of", "program in"};
    t.institution = {"university", "univ", "college", "hospital", "institute", "institut",
                     "center", "centre", "clinic", "academy", "foundation", "laboratories",
                     "inc", "ltd", "llc", "corp", "corporation", "gmbh", "company", "agency",
                     "ministry", "institutes"};
    t.edu = {"university", "univ", "college", "school", "academy", "polytechnic"};
    t.hos = {"hospital", "clinic", "medical center", "medical centre", "infirmary", "hopital",
             "hospitals", "health system", "medical school"};
    t.com = {"inc", "ltd", "llc", "corp", "corporation", "pharma", "pharmaceuticals",
             "pharmaceutical", "gmbh", "biotech", "company"};
    t.gov = {"ministry", "national institutes", "national institute", "federal", "agency",
             "government", "public health service", "centers for disease control",
             "food and drug administration", "veterans affairs"};
    t.mil = {"army", "navy", "air force", "military", "armed forces", "defence", "defense"};
    t.org = {"foundation", "association", "society", "ngo", "trust", "charity",
             "organization", "organisation"};
    return t;
}

KeywordTables KeywordTables::load_dir(const std::string& dir) {
    KeywordTables d = defaults();
    namespace fs = std::filesystem;
    auto path = [&](const char* name) { return (fs::path(dir) / (std::string(name) + ".txt")).string(); };
    d.department = read_lines_or(path("department"), std::move(d.department));
    d.institution = read_lines_or(path("institution"), std::move(d.institution));
    d.edu = read_lines_or(path("edu"), std::move(d.edu));
    d.hos = read_lines_or(path("hos"), std::move(d.hos));
    d.com = read_lines_or(path("com"), std::move(d.com));
    d.gov = read_lines_or(path("gov"), std::move(d.gov));
    d.mil = read_lines_or(path("mil"), std::move(d.mil));
    d.org = read_lines_or(path("org"), std::move(d.org));
    return d;
}

// --- country table -----------------------------------------------------------

CountryTable CountryTable::defaults() {
    // canonical name, then variants
    static const std::vector<std::pair<std::string, std::vector<std::string>>> base = {
        {"United States", {"usa", "u.s.a", "u.s.a.", "us", "u.s.", "united states of america",
                           "united states"}},
        {"United Kingdom", {"uk", "u.k.", "great britain", "england", "scotland", "wales",
                            "northern ireland", "united kingdom"}},
        {"South Korea", {"korea", "republic of korea", "south korea"}},
        {"China", {"china", "people's republic of china", "pr china", "p.r. china"}},
        {"Germany", {"germany", "deutschland", "federal republic of germany"}},
        {"France", {"france"}},
        {"Italy", {"italy", "italia"}},
        {"Spain", {"spain", "espana", "españa"}},
        {"Japan", {"japan"}},
        {"Canada", {"canada"}},
        {"Australia", {"australia"}},
        {"Netherlands", {"netherlands", "the netherlands", "holland"}},
        {"Switzerland", {"switzerland", "suisse", "schweiz"}},
        {"Sweden", {"sweden"}},
        {"Norway", {"norway"}},
        {"Denmark", {"denmark"}},
        {"Finland", {"finland"}},
        {"Belgium", {"belgium"}},
        {"Austria", {"austria"}},
        {"Poland", {"poland"}},
        {"Hungary", {"hungary"}},
        {"Brazil", {"brazil", "brasil"}},
        {"Mexico", {"mexico", "méxico"}},
        {"India", {"india"}},
        {"Russia", {"russia", "russian federation", "ussr"}},
        {"Turkey", {"turkey", "türkiye"}},
        {"Israel", {"israel"}},
        {"Singapore", {"singapore"}},
        {"New Zealand", {"new zealand"}},
        {"Ireland", {"ireland"}},
        {"Portugal", {"portugal"}},
        {"Greece", {"greece"}},
        {"Czech Republic", {"czech republic", "czechia", "czechoslovakia"}},
        {"South Africa", {"south africa"}},
        {"Argentina", {"argentina"}},
        {"Chile", {"chile"}},
        {"Taiwan", {"taiwan", "republic of china"}},
        {"Egypt", {"egypt"}},
        {"Iran", {"iran"}},
        {"Saudi Arabia", {"saudi arabia"}},
        {"Thailand", {"thailand"}},
        {"Malaysia", {"malaysia"}},
        {"Nigeria", {"nigeria"}},
        {"Kenya", {"kenya"}},
    };
    CountryTable t;
    for (const auto& [canonical, variants] : base) {
        t.canonical_by_variant[text::fold_key(canonical)] = canonical;
        for (const std::string& v : variants) t.canonical_by_variant[text::fold_key(v)] = canonical;
    }
    return t;
}

CountryTable CountryTable::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open country table: " + path);
    CountryTable t;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view l = text::trim(line);
        if (l.empty() || l.front() == '#') continue;
        std::size_t tab = l.find('\t');
        if (tab == std::string_view::npos)
            throw ParseError("country table line needs canonical<TAB>variant", line_no,
                             ParseError::Unit::LineNumber);
        std::string canonical(text::trim(l.substr(0, tab)));
        std::string variant(text::trim(l.substr(tab + 1)));
        t.canonical_by_variant[text::fold_key(canonical)] = canonical;
        t.canonical_by_variant[text::fold_key(variant)] = canonical;
    }
    return t;
}

std::optional<std::string> CountryTable::canonicalize(std::string_view raw) const {
    std::string key = text::fold_key(strip_trailing_periods(raw));
    auto it = canonical_by_variant.find(key);
    if (it == canonical_by_variant.end()) return std::nullopt;
    return it->second;
}

// --- parser ------------------------------------------------------------------

AffiliationParser::AffiliationParser(KeywordTables keywords, CountryTable countries,
                                     const Gazetteer* gazetteer)
    : keywords_(std::move(keywords)), countries_(std::move(countries)), gazetteer_(gazetteer) {}

AffiliationType AffiliationParser::classify(std::string_view raw) const {
    std::vector<std::string> words = words_of(raw);
    bool edu = contains_any(words, keywords_.edu);
    bool hos = contains_any(words, keywords_.hos);
    if (edu && hos) return AffiliationType::EDU_HOS;
    if (edu) return AffiliationType::EDU;
    if (hos) return AffiliationType::HOS;
    if (contains_any(words, keywords_.gov)) return AffiliationType::GOV;
    if (contains_any(words, keywords_.mil)) return AffiliationType::MIL;
    if (contains_any(words, keywords_.com)) return AffiliationType::COM;
    if (contains_any(words, keywords_.org)) return AffiliationType::ORG;
    return AffiliationType::UNK;
}

ParsedAffiliation AffiliationParser::parse(std::string_view raw) const {
    ParsedAffiliation out;
    out.raw = std::string(text::trim(raw));
    if (out.raw.empty()) return out;

    // comma-split segments
    std::vector<std::string> segments;
    {
        std::string_view rest = out.raw;
        while (true) {
            std::size_t comma = rest.find(',');
            segments.emplace_back(text::trim(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }

    // email: first mailbox match anywhere, removed from its segment
    for (std::string& seg : segments) {
        std::smatch m;
        if (std::regex_search(seg, m, email_regex())) {
            out.email = m[1];
            seg.erase(static_cast<std::size_t>(m.position(1)), static_cast<std::size_t>(m.length(1)));
            // drop a stranded label such as "Electronic address:"
            std::string lowered = text::casefold(seg);
            std::size_t at = lowered.find("electronic address");
            if (at != std::string::npos) {
                std::size_t end = at + std::string("electronic address").size();
                while (end < seg.size() && (seg[end] == ':' || seg[end] == ' ')) ++end;
                seg.erase(at, end - at);
            }
            seg = std::string(text::trim(seg));
            break;
        }
    }

    // country: last segment that canonicalizes
    std::size_t country_seg = segments.size();
    for (std::size_t i = segments.size(); i-- > 0;) {
        if (auto c = countries_.canonicalize(segments[i])) {
            out.country = *c;
            country_seg = i;
            break;
        }
    }

    // postal code: country-specific pattern, scanned from the tail
    {
        const std::regex& re = zip_regex_for(out.country);
        for (std::size_t i = segments.size(); i-- > 0;) {
            if (i == country_seg) continue;
            std::smatch m;
            if (std::regex_search(segments[i], m, re)) {
                out.zip_code = m[1];
                segments[i].erase(static_cast<std::size_t>(m.position(1)),
                                  static_cast<std::size_t>(m.length(1)));
                segments[i] = std::string(text::trim(segments[i]));
                break;
            }
        }
    }

    // department and institution by keyword tables
    std::size_t dept_seg = segments.size(), inst_seg = segments.size();
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].empty() || i == country_seg) continue;
        std::vector<std::string> words = words_of(segments[i]);
        if (dept_seg == segments.size() && contains_any(words, keywords_.department)) {
            dept_seg = i;
            out.department = strip_trailing_periods(segments[i]);
        }
        if (inst_seg == segments.size() && contains_any(words, keywords_.institution)) {
            inst_seg = i;
            out.institution = strip_trailing_periods(segments[i]);
        }
    }

    // city and state against the gazetteer, scanning from the tail
    std::size_t city_seg = segments.size(), state_seg = segments.size();
    if (gazetteer_) {
        for (std::size_t i = segments.size(); i-- > 0;) {
            if (i == country_seg || i == dept_seg || i == inst_seg || segments[i].empty()) continue;
            std::string folded = text::fold_key(strip_trailing_periods(segments[i]));
            if (folded.empty()) continue;
            if (out.state.empty() && gazetteer_->is_state(folded)) {
                if (const std::string* s = gazetteer_->canonical_state(folded)) {
                    out.state = *s;
                    state_seg = i;
                    continue;
                }
            }
            if (out.city.empty() && gazetteer_->is_city(folded)) {
                if (const std::string* c = gazetteer_->canonical_city(folded)) {
                    out.city = *c;
                    city_seg = i;
                }
            }
        }
    }

    // location: unconsumed tail after the institution (or department)
    std::size_t tail_from = inst_seg < segments.size() ? inst_seg + 1
                          : dept_seg < segments.size() ? dept_seg + 1
                                                       : 0;
    std::string location;
    for (std::size_t i = tail_from; i < segments.size(); ++i) {
        if (i == country_seg || i == dept_seg || i == inst_seg || i == city_seg || i == state_seg)
            continue;
        std::string cleaned = strip_trailing_periods(segments[i]);
        if (cleaned.empty()) continue;
        if (!location.empty()) location += ", ";
        location += cleaned;
    }
    out.location = std::move(location);

    out.affiliation_type = classify(out.raw);
    return out;
}

GeocodeOutcome AffiliationParser::geocode(ParsedAffiliation& parsed) const {
    if (!gazetteer_) throw Error("geocode requires a gazetteer");
    if (parsed.city.empty()) return GeocodeOutcome::NoCity;

    const GazetteerEntry* hit = nullptr;
    if (!parsed.state.empty() && !parsed.country.empty())
        hit = gazetteer_->lookup_exact(parsed.city, parsed.state, parsed.country);

    if (!hit && !parsed.country.empty()) {
        auto [entry, count] = gazetteer_->lookup_city_country(parsed.city, parsed.country);
        if (!entry && count > 1) return GeocodeOutcome::Ambiguous;
        hit = entry;
    }

    if (!hit) return GeocodeOutcome::NoMatch;
    parsed.latitude = hit->latitude;
    parsed.longitude = hit->longitude;
    parsed.fips = hit->fips;
    return GeocodeOutcome::Geocoded;
}

// --- succession --------------------------------------------------------------

InheritReport inherit_affiliations(std::vector<ParsedAffiliation>& records,
                                   const std::vector<AuthorStub>& instances, int cutoff_year) {
    InheritReport report;
    report.instances = instances.size();

    // instance -> has data, via existing records
    std::map<std::pair<std::uint64_t, std::uint32_t>, bool> instance_covered;
    for (const AuthorStub& s : instances) instance_covered[{s.pmid, s.au_order}] = false;
    for (const ParsedAffiliation& r : records) {
        auto it = instance_covered.find({r.pmid, r.au_order});
        if (it != instance_covered.end() && r.has_affiliation_data()) it->second = true;
    }
    for (const auto& [key, covered] : instance_covered)
        if (covered) ++report.covered_before;

    // latest pre-cutoff donor per author id
    std::map<std::uint64_t, const ParsedAffiliation*> donor;
    for (const ParsedAffiliation& r : records) {
        if (r.inherited || r.and_id == 0 || !r.pub_year || *r.pub_year >= cutoff_year) continue;
        if (!r.has_affiliation_data()) continue;
        auto [it, inserted] = donor.emplace(r.and_id, &r);
        if (!inserted) {
            const ParsedAffiliation& cur = *it->second;
            auto key = [](const ParsedAffiliation& p) {
                return std::tuple(*p.pub_year, p.pmid, p.au_order, p.affiliation_order);
            };
            if (key(r) > key(cur)) it->second = &r;
        }
    }

    // receivers: at/after the cutoff, no affiliation data, disambiguated
    std::vector<ParsedAffiliation> added;
    for (const AuthorStub& s : instances) {
        if (s.and_id == 0 || !s.pub_year || *s.pub_year < cutoff_year) continue;
        if (instance_covered[{s.pmid, s.au_order}]) continue;
        auto it = donor.find(s.and_id);
        if (it == donor.end()) continue;
        const ParsedAffiliation& src = *it->second;

        ParsedAffiliation r;
        r.pmid = s.pmid;
        r.au_order = s.au_order;
        r.and_id = s.and_id;
        r.affiliation_order = 1;
        r.department = src.department;
        r.institution = src.institution;
        r.email = src.email;
        r.zip_code = src.zip_code;
        r.location = src.location;
        r.country = src.country;
        r.city = src.city;
        r.state = src.state;
        r.affiliation_type = src.affiliation_type;
        r.latitude = src.latitude;
        r.longitude = src.longitude;
        r.fips = src.fips;
        r.inherited = true;
        r.pub_year = s.pub_year;
        added.push_back(std::move(r));
        instance_covered[{s.pmid, s.au_order}] = true;
    }

    std::sort(added.begin(), added.end(), [](const ParsedAffiliation& a, const ParsedAffiliation& b) {
        return std::tuple(a.pmid, a.au_order, a.affiliation_order) <
               std::tuple(b.pmid, b.au_order, b.affiliation_order);
    });
    report.inherited_records = added.size();
    for (ParsedAffiliation& r : added) records.push_back(std::move(r));

    for (const auto& [key, covered] : instance_covered)
        if (covered) ++report.covered_after;
    return report;
}

}  // namespace medkg::affilparse
