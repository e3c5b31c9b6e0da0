#include "medkg/syngen.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "medkg/csv.hpp"
#include "medkg/errors.hpp"

namespace medkg::syn {

namespace {

namespace fs = std::filesystem;

// mt19937_64 is specified bit-exactly; modulo keeps draws portable.
struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}
    std::uint64_t below(std::uint64_t n) { return engine() % n; }
    int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1))); }
    bool chance(int percent) { return static_cast<int>(below(100)) < percent; }
};

const std::vector<std::string>& last_names() {
    static const std::vector<std::string> v = {
        "Smith",  "Chen",    "Müller", "Kim",     "García", "Okafor", "Ivanov", "Tanaka",
        "Nguyen", "Kowalski", "Silva",  "Johnson", "Olsen",  "Rossi",  "Dubois", "Patel",
        "Haddad", "Eriksson", "Novak",  "Brown",
    };
    return v;
}

const std::vector<std::string>& fore_names() {
    static const std::vector<std::string> v = {
        "John",  "Wei",   "Anna",   "Min",    "Lucía", "Chidi", "Dmitri", "Yuki",
        "Linh",  "Piotr", "Maria",  "Emily",  "Lars",  "Giulia", "Claire", "Raj",
        "Leila", "Erik",  "Petra",  "Ashley",
    };
    return v;
}

const std::vector<std::string>& journals() {
    static const std::vector<std::string> v = {
        "Journal of Synthetic Medicine", "Annals of Test Biology", "Fixture Letters",
        "Archive of Generated Results", "Synthetic Neurology",
    };
    return v;
}

struct City {
    const char* city;
    const char* state;
    const char* country;
    double lat, lon;
    long fips;  // 0 = none
};

const std::vector<City>& cities() {
    static const std::vector<City> v = {
        {"Philadelphia", "PA", "United States", 39.9526, -75.1652, 42101},
        {"Boston", "MA", "United States", 42.3601, -71.0589, 25025},
        {"Springfield", "IL", "United States", 39.7817, -89.6501, 17167},
        {"Springfield", "MA", "United States", 42.1015, -72.5898, 25013},
        {"Basel", "BS", "Switzerland", 47.5596, 7.5886, 0},
        {"London", "", "United Kingdom", 51.5074, -0.1278, 0},
        {"Seoul", "", "South Korea", 37.5665, 126.9780, 0},
        {"Guangzhou", "", "China", 23.1291, 113.2644, 0},
        {"Toronto", "ON", "Canada", 43.6532, -79.3832, 0},
        {"Berlin", "", "Germany", 52.5200, 13.4050, 0},
        {"Tokyo", "", "Japan", 35.6762, 139.6503, 0},
        {"Melbourne", "VIC", "Australia", -37.8136, 144.9631, 0},
    };
    return v;
}

struct DictEntry {
    const char* id;
    const char* name;
};

const std::vector<DictEntry>& gene_dict() {
    static const std::vector<DictEntry> v = {
        {"G:672", "BRCA1"},   {"G:672", "breast cancer 1 gene"},
        {"G:7157", "TP53"},   {"G:59272", "ACE2"},
        {"G:1956", "EGFR"},   {"G:796", "calcitonin gene-related peptide"},
        {"G:796", "CGRP"},    {"G:673", "BRAF"},
        {"G:3569", "interleukin 6"}, {"G:3569", "IL-6"},
    };
    return v;
}

const std::vector<DictEntry>& disease_dict() {
    static const std::vector<DictEntry> v = {
        {"D:8875", "migraine"},    {"D:6261", "headache"},
        {"D:1249", "asthma"},      {"D:7251", "influenza"},
        {"D:9352", "diabetes"},    {"D:2841", "lung cancer"},
        {"D:3459", "hypertension"}, {"D:2908", "coronavirus infection"},
        {"D:2908", "SARS"},        {"D:7154", "melanoma"},
    };
    return v;
}

const std::vector<DictEntry>& drug_dict() {
    static const std::vector<DictEntry> v = {
        {"C:1191", "aspirin"},     {"C:5219", "sumatriptan"},
        {"C:3672", "ibuprofen"},   {"C:2192", "calcitonin"},
        {"C:9814", "metformin"},   {"C:4024", "erenumab"},
        {"C:1317", "remdesivir"},  {"C:7754", "propranolol"},
    };
    return v;
}

const std::vector<DictEntry>& species_dict() {
    static const std::vector<DictEntry> v = {
        {"S:9606", "human"},        {"S:9606", "Homo sapiens"},
        {"S:10090", "mouse"},       {"S:10090", "Mus musculus"},
        {"S:10116", "rat"},         {"S:7955", "zebrafish"},
        {"S:694009", "SARS-CoV"},
    };
    return v;
}

const std::vector<DictEntry>& mutation_dict() {
    static const std::vector<DictEntry> v = {
        {"M:rs113488022", "V600E"},      {"M:rs113488022", "rs113488022"},
        {"M:rs121913529", "rs121913529"}, {"M:rs334", "rs334"},
        {"M:c.76A>T", "c.76A>T"},
    };
    return v;
}

// sentence templates; {g} gene, {d} disease, {c} drug, {s} species, {m} mutation
const std::vector<std::string>& sentence_templates() {
    static const std::vector<std::string> v = {
        "We studied {g} expression in {s} models of {d}.",
        "Treatment with {c} reduced {d} severity in {s} cohorts.",
        "The {m} variant of {g} was associated with {d}.",
        "Levels of {g} correlated with {c} response.",
        "Patients with {d} received {c} and reported fewer episodes.",
        "Analysis of {s} tissue revealed elevated {g}.",
        "No association between {m} and {d} was observed.",
        "Serum {g} predicts {d} progression in {s}.",
    };
    return v;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

struct Person {
    std::size_t id;  // 0-based
    std::string last, fore, initials;
    std::size_t city;     // index into cities()
    bool has_orcid;
    std::string orcid;
    bool is_pi;
    std::string pi_id;
};

struct Paper {
    std::uint64_t pmid;
    int year;
    bool medline_date;    // emit MedlineDate instead of Year
    std::string journal;
    std::string title;
    std::string doi;      // empty = none
    std::string abstract_text;  // empty = none
    std::vector<std::size_t> author_people;  // person ids; SIZE_MAX = collective
    std::vector<std::string> affiliations;   // parallel to authors, empty = none
};

std::string orcid_with_checksum(std::uint64_t base) {
    std::string digits = std::to_string(base % 1000000000000000ULL);
    digits.insert(0, 15 - digits.size(), '0');
    int total = 0;
    for (char c : digits) total = (total + (c - '0')) * 2;
    int result = (12 - total % 11) % 11;
    digits.push_back(result == 10 ? 'X' : static_cast<char>('0' + result));
    std::string out;
    for (std::size_t i = 0; i < 16; ++i) {
        if (i && i % 4 == 0) out.push_back('-');
        out.push_back(digits[i]);
    }
    return out;
}

std::string pick_name(Rng& rng, const std::vector<DictEntry>& dict) {
    return dict[rng.below(dict.size())].name;
}

std::string make_abstract(Rng& rng) {
    int sentences = rng.range(2, 4);
    std::string out;
    for (int i = 0; i < sentences; ++i) {
        std::string s = sentence_templates()[rng.below(sentence_templates().size())];
        auto sub = [&](const char* tag, const std::vector<DictEntry>& dict) {
            std::size_t at = s.find(tag);
            if (at != std::string::npos) s.replace(at, 3, pick_name(rng, dict));
        };
        sub("{g}", gene_dict());
        sub("{d}", disease_dict());
        sub("{c}", drug_dict());
        sub("{s}", species_dict());
        sub("{m}", mutation_dict());
        if (!out.empty()) out.push_back(' ');
        out += s;
    }
    return out;
}

std::vector<Person> make_people(Rng& rng, std::size_t count) {
    std::vector<Person> people;
    people.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Person p;
        p.id = i;
        p.last = last_names()[i % last_names().size()];
        p.fore = fore_names()[(i / last_names().size() + i) % fore_names().size()];
        p.initials = std::string(1, p.fore[0]);
        p.city = rng.below(cities().size());
        p.has_orcid = rng.chance(40);
        if (p.has_orcid) p.orcid = orcid_with_checksum(1000000000ULL + i * 7919ULL);
        p.is_pi = rng.chance(25);
        if (p.is_pi) p.pi_id = "PI" + std::to_string(100000 + i);
        people.push_back(std::move(p));
    }
    return people;
}

std::string make_affiliation(Rng& rng, const Person& p) {
    const City& c = cities()[p.city];
    const bool us = std::string(c.country) == "United States";
    std::string out;
    switch (rng.below(3)) {
        case 0: out = "Dept. of Neurology, "; break;
        case 1: out = "Department of Biology, "; break;
        default: out = "Division of Genetics, "; break;
    }
    out += p.last + " University, " + c.city + ", ";
    if (us) {
        out += std::string(c.state) + " " + std::to_string(10000 + 7 * static_cast<int>(p.city)) + ", ";
        out += rng.chance(50) ? "USA" : "United States";
    } else {
        if (c.state[0] != '\0') out += std::string(c.state) + ", ";
        out += c.country;
    }
    if (rng.chance(25)) {
        std::string handle = p.fore.substr(0, 1) + p.last;
        std::string clean;
        for (char ch : handle)
            if (ch > 0 && std::isalnum(static_cast<unsigned char>(ch)))
                clean.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        out += ". " + clean + "@example.org";
    }
    return out;
}

std::vector<Paper> make_papers(Rng& rng, const CorpusOptions& opt, const std::vector<Person>& people) {
    std::vector<Paper> papers;
    papers.reserve(opt.papers);
    for (std::size_t i = 0; i < opt.papers; ++i) {
        Paper p;
        p.pmid = 1000 + i;
        p.year = rng.range(opt.first_year, opt.last_year);
        p.medline_date = rng.chance(8);
        p.journal = journals()[rng.below(journals().size())];
        p.title = "Study " + std::to_string(i + 1) + " of " +
                  pick_name(rng, gene_dict()) + " in " + pick_name(rng, disease_dict());
        if (rng.chance(70)) p.doi = "10.5555/synth." + std::to_string(p.pmid);
        if (rng.chance(92)) p.abstract_text = make_abstract(rng);

        int nauthors = rng.range(1, 4);
        std::set<std::size_t> used;
        for (int a = 0; a < nauthors; ++a) {
            if (a == nauthors - 1 && rng.chance(3)) {
                p.author_people.push_back(static_cast<std::size_t>(-1));  // collective
                p.affiliations.emplace_back();
                continue;
            }
            std::size_t person = rng.below(people.size());
            if (used.contains(person)) continue;
            used.insert(person);
            p.author_people.push_back(person);
            p.affiliations.push_back(rng.chance(75) ? make_affiliation(rng, people[person]) : "");
        }
        papers.push_back(std::move(p));
    }
    return papers;
}

std::string papers_to_xml(const std::vector<Paper>& papers, const std::vector<Person>& people) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<PubmedArticleSet>\n";
    for (const Paper& p : papers) {
        out << "<PubmedArticle><MedlineCitation>\n";
        out << "  <PMID Version=\"1\">" << p.pmid << "</PMID>\n";
        out << "  <Article>\n";
        out << "    <Journal><Title>" << xml_escape(p.journal) << "</Title><JournalIssue><PubDate>";
        if (p.medline_date)
            out << "<MedlineDate>" << p.year << " Jan-Feb</MedlineDate>";
        else
            out << "<Year>" << p.year << "</Year>";
        out << "</PubDate></JournalIssue></Journal>\n";
        out << "    <ArticleTitle>" << xml_escape(p.title) << "</ArticleTitle>\n";
        if (!p.abstract_text.empty())
            out << "    <Abstract><AbstractText>" << xml_escape(p.abstract_text)
                << "</AbstractText></Abstract>\n";
        out << "    <AuthorList>\n";
        for (std::size_t a = 0; a < p.author_people.size(); ++a) {
            out << "      <Author>";
            if (p.author_people[a] == static_cast<std::size_t>(-1)) {
                out << "<CollectiveName>The Synthetic Consortium</CollectiveName>";
            } else {
                const Person& person = people[p.author_people[a]];
                out << "<LastName>" << xml_escape(person.last) << "</LastName>"
                    << "<ForeName>" << xml_escape(person.fore) << "</ForeName>"
                    << "<Initials>" << xml_escape(person.initials) << "</Initials>";
                if (!p.affiliations[a].empty())
                    out << "<AffiliationInfo><Affiliation>" << xml_escape(p.affiliations[a])
                        << "</Affiliation></AffiliationInfo>";
            }
            out << "</Author>\n";
        }
        out << "    </AuthorList>\n";
        if (!p.doi.empty())
            out << "    <ELocationID EIdType=\"doi\">" << xml_escape(p.doi) << "</ELocationID>\n";
        out << "  </Article>\n";
        out << "</MedlineCitation></PubmedArticle>\n";
    }
    out << "</PubmedArticleSet>\n";
    return out.str();
}

void write_text(const fs::path& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << data;
}

void write_dict(const fs::path& path, const std::vector<DictEntry>& dict) {
    std::string out;
    for (const DictEntry& e : dict) {
        out += e.id;
        out.push_back('\t');
        out += e.name;
        out.push_back('\n');
    }
    write_text(path, out);
}

}  // namespace

std::string citation_xml(const CorpusOptions& options) {
    Rng rng(options.seed);
    std::vector<Person> people = make_people(rng, options.people);
    std::vector<Paper> papers = make_papers(rng, options, people);
    return papers_to_xml(papers, people);
}

CorpusSummary write_corpus(const std::string& dir, const CorpusOptions& opt) {
    fs::create_directories(dir);
    Rng rng(opt.seed);
    std::vector<Person> people = make_people(rng, opt.people);
    std::vector<Paper> papers = make_papers(rng, opt, people);

    CorpusSummary summary;
    summary.papers = papers.size();
    summary.people = people.size();
    for (const Paper& p : papers) summary.author_instances += p.author_people.size();

    write_text(fs::path(dir) / "corpus.xml", papers_to_xml(papers, people));
    if (!opt.side_inputs) return summary;

    // clusterings: primary covers years up to the coverage end; secondary
    // covers almost everything; a sliver stays uncovered entirely
    std::string primary, secondary;
    for (const Paper& p : papers) {
        for (std::size_t a = 0; a < p.author_people.size(); ++a) {
            std::size_t person = p.author_people[a];
            if (person == static_cast<std::size_t>(-1)) continue;  // collectives stay uncovered
            std::string key = std::to_string(p.pmid) + "\t" + std::to_string(a + 1) + "\t";
            bool in_secondary = (p.pmid + a) % 37 != 0;  // ~3% in neither source
            if (p.year <= opt.primary_coverage_end_year)
                primary += key + std::to_string(person + 1) + "\n";
            if (in_secondary)
                secondary += key + std::to_string(100000 + person + 1) + "\n";
        }
    }
    write_text(fs::path(dir) / "primary.tsv", primary);
    write_text(fs::path(dir) / "secondary.tsv", secondary);

    write_dict(fs::path(dir) / "dict_gene.tsv", gene_dict());
    write_dict(fs::path(dir) / "dict_disease.tsv", disease_dict());
    write_dict(fs::path(dir) / "dict_drug.tsv", drug_dict());
    write_dict(fs::path(dir) / "dict_species.tsv", species_dict());
    write_dict(fs::path(dir) / "dict_mutation.tsv", mutation_dict());

    // gazetteer
    {
        std::vector<csv::Row> rows = {{"city", "state", "country", "latitude", "longitude", "fips"}};
        for (const City& c : cities()) {
            csv::Row row = {c.city, c.state, c.country, std::to_string(c.lat), std::to_string(c.lon),
                            c.fips ? std::to_string(c.fips) : ""};
            rows.push_back(std::move(row));
        }
        csv::write_file((fs::path(dir) / "gazetteer.csv").string(), rows);
    }

    // papers per person (for funding and registry extracts)
    std::map<std::size_t, std::vector<const Paper*>> papers_by_person;
    for (const Paper& p : papers)
        for (std::size_t person : p.author_people)
            if (person != static_cast<std::size_t>(-1)) papers_by_person[person].push_back(&p);

    // funding: one project per PI, pubs = that PI's papers
    {
        std::vector<csv::Row> projects = {{"PI_ID", "PI_Name", "ProjectNumber", "subProjectNumber",
                                           "FiscalYear"}};
        std::vector<csv::Row> pubs = {{"ProjectNumber", "PMID"}};
        for (const Person& p : people) {
            if (!p.is_pi || !papers_by_person.contains(p.id)) continue;
            std::string project = "R01SYN" + std::to_string(600000 + p.id);
            std::string upper_last = p.last, upper_fore = p.fore;
            for (char& c : upper_last) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            for (char& c : upper_fore) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            projects.push_back({p.pi_id, upper_last + ", " + upper_fore, project, "", "2015"});
            for (const Paper* paper : papers_by_person[p.id])
                pubs.push_back({project, std::to_string(paper->pmid)});
        }
        csv::write_file((fs::path(dir) / "exporter_projects.csv").string(), projects);
        csv::write_file((fs::path(dir) / "exporter_pubs.csv").string(), pubs);
    }

    // registry extracts
    {
        std::vector<csv::Row> person_rows = {{"ORCID", "LastName", "ForeName", "DOI", "Title",
                                              "Journal", "PubYear"}};
        std::vector<csv::Row> employment = {{"ORCID", "Organization", "Department", "City",
                                             "Region", "Country", "BeginYear", "EndYear",
                                             "Identifier", "IdSource"}};
        std::vector<csv::Row> education = {{"ORCID", "Organization", "City", "Region", "Country",
                                            "BeginYear", "EndYear", "Role", "Identifier",
                                            "IdSource"}};
        for (const Person& p : people) {
            if (!p.has_orcid) continue;
            auto it = papers_by_person.find(p.id);
            if (it == papers_by_person.end()) {
                person_rows.push_back({p.orcid, p.last, p.fore, "", "", "", ""});
            } else {
                for (const Paper* paper : it->second) {
                    person_rows.push_back({p.orcid, p.last, p.fore, paper->doi, paper->title,
                                           paper->journal, std::to_string(paper->year)});
                }
            }
            const City& c = cities()[p.city];
            employment.push_back({p.orcid, p.last + " University", "Research", c.city, c.state,
                                  c.country, "2010", "", "ROR:" + std::to_string(p.id), "ROR"});
            education.push_back({p.orcid, p.last + " University", c.city, c.state, c.country,
                                 "2002", "2008", "PhD", "ROR:" + std::to_string(p.id), "ROR"});
        }
        csv::write_file((fs::path(dir) / "orcid_person.csv").string(), person_rows);
        csv::write_file((fs::path(dir) / "orcid_employment.csv").string(), employment);
        csv::write_file((fs::path(dir) / "orcid_education.csv").string(), education);
    }

    // ready-to-run config
    {
        std::string cfg = R"({
  "citation_xml": "corpus.xml",
  "primary_clustering": "primary.tsv",
  "secondary_clustering": "secondary.tsv",
  "primary_coverage_end_year": )" + std::to_string(opt.primary_coverage_end_year) + R"(,
  "dictionaries": {
    "gene": ["dict_gene.tsv"],
    "disease": ["dict_disease.tsv"],
    "drug": ["dict_drug.tsv"],
    "species": ["dict_species.tsv"],
    "mutation": ["dict_mutation.tsv"]
  },
  "gazetteer": "gazetteer.csv",
  "exporter_projects": "exporter_projects.csv",
  "exporter_pubs": "exporter_pubs.csv",
  "orcid_person": "orcid_person.csv",
  "orcid_employment": "orcid_employment.csv",
  "orcid_education": "orcid_education.csv",
  "cutoff_year": 2016,
  "output_dir": "out"
}
)";
        write_text(fs::path(dir) / "config.json", cfg);
    }
    return summary;
}

}  // namespace medkg::syn
