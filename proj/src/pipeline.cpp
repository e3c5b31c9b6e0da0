#include "medkg/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <concepts>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "medkg/affilparse.hpp"
#include "medkg/andmerge.hpp"
#include "medkg/bioentity.hpp"
#include "medkg/csv.hpp"
#include "medkg/errors.hpp"
#include "medkg/evalmetrics.hpp"
#include "medkg/ingest.hpp"
#include "medkg/kernels.hpp"
#include "medkg/kgraph.hpp"
#include "medkg/linkage.hpp"
#include "medkg/text.hpp"

namespace medkg::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <std::integral T>
std::string num(T v) {
    return std::to_string(v);
}

std::string num(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

std::int64_t to_i64(const std::string& s, std::int64_t absent = 0) {
    if (s.empty()) return absent;
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw Error("expected an integer, got '" + s + "'");
    return v;
}

std::optional<double> to_f64(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw Error("expected a real number, got '" + s + "'");
    return v;
}

std::optional<int> to_year(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return static_cast<int>(to_i64(s));
}

void require_input(const std::string& path, const std::string& what) {
    if (path.empty()) throw Error("config is missing the " + what + " path");
    if (!fs::exists(path)) throw Error(what + " not found: " + path);
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

// Intermediate-file helpers. All of these go through the registered
// schemas so external tools can produce or consume any stage boundary.

struct LoadedCorpus {
    std::vector<ingest::ArticleRecord> articles;
    std::vector<ingest::AuthorInstance> authors;
};

LoadedCorpus load_corpus_intermediates(const PipelineConfig& cfg) {
    LoadedCorpus c;
    ingest::TabularData articles = ingest::load_tabular_source(cfg.out_path("articles.csv"), "articles");
    for (const auto& row : articles.rows) {
        ingest::ArticleRecord a;
        a.pmid = static_cast<std::uint64_t>(to_i64(row[0]));
        a.pub_year = to_year(row[1]);
        a.journal = row[2];
        a.title = row[3];
        a.doi = row[4];
        a.abstract_text = row[5];
        a.has_abstract = !row[5].empty();
        c.articles.push_back(std::move(a));
    }
    ingest::TabularData authors = ingest::load_tabular_source(cfg.out_path("authors.csv"), "authors");
    for (const auto& row : authors.rows) {
        ingest::AuthorInstance a;
        a.pmid = static_cast<std::uint64_t>(to_i64(row[0]));
        a.au_order = static_cast<std::uint32_t>(to_i64(row[1]));
        a.last_name = row[2];
        a.fore_name = row[3];
        a.initials = row[4];
        a.suffix = row[5];
        c.authors.push_back(std::move(a));
    }
    return c;
}

andmerge::UnifiedAssignment load_unified(const PipelineConfig& cfg) {
    ingest::SourceClustering s = ingest::load_clustering(cfg.out_path("unified.tsv"), "unified");
    andmerge::UnifiedAssignment u;
    for (const auto& [key, id] : s.assignments) u.and_id_of[key] = id;
    return u;
}

bioentity::DictionarySet load_dictionaries(const PipelineConfig& cfg) {
    bioentity::DictionarySet dicts = {
        bioentity::Dictionary(bioentity::EntityType::Gene),
        bioentity::Dictionary(bioentity::EntityType::Disease),
        bioentity::Dictionary(bioentity::EntityType::Drug),
        bioentity::Dictionary(bioentity::EntityType::Species),
        bioentity::Dictionary(bioentity::EntityType::Mutation),
    };
    for (const auto& [type_name, files] : cfg.dictionaries) {
        auto type = bioentity::type_from_name(type_name);
        if (!type) throw Error("unknown entity type in config: " + type_name);
        for (const std::string& file : files) {
            std::string path = cfg.resolve(file);
            require_input(path, type_name + " dictionary");
            dicts[static_cast<std::size_t>(*type)].load_file(path);
        }
    }
    return dicts;
}

std::vector<bioentity::EntitySpan> load_spans(const std::string& path, const char* schema) {
    ingest::TabularData t = ingest::load_tabular_source(path, schema);
    std::vector<bioentity::EntitySpan> spans;
    spans.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        bioentity::EntitySpan s;
        s.pmid = static_cast<std::uint64_t>(to_i64(row[0]));
        s.begin = static_cast<std::uint32_t>(to_i64(row[1]));
        s.end = static_cast<std::uint32_t>(to_i64(row[2]));
        s.mention = row[3];
        auto type = bioentity::type_from_name(row[4]);
        if (!type) throw Error("unknown entity type '" + row[4] + "' in " + path);
        s.type = *type;
        s.score = to_f64(row[5]).value_or(0.0);
        spans.push_back(std::move(s));
    }
    return spans;
}

// --- external tagger exchange format -----------------------------------------

std::vector<kernels::TaggedAbstract> decode_tagger_output(const std::string& path,
                                                          const LoadedCorpus& corpus,
                                                          bioentity::DecodeStats* stats) {
    std::map<std::uint64_t, const std::string*> abstract_by_pmid;
    for (const auto& a : corpus.articles)
        if (!a.abstract_text.empty()) abstract_by_pmid[a.pmid] = &a.abstract_text;

    std::ifstream in(path);
    if (!in) throw Error("cannot open tagger output: " + path);

    std::vector<kernels::TaggedAbstract> out;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("tagger output is not valid JSON: ") + e.what(), line_no,
                             ParseError::Unit::LineNumber);
        }
        std::uint64_t pmid = j.at("pmid").get<std::uint64_t>();
        auto abstract_it = abstract_by_pmid.find(pmid);
        if (abstract_it == abstract_by_pmid.end()) continue;  // not in this corpus
        const std::string& abstract_text = *abstract_it->second;

        // tokens with a probs object: one 7-vector per entity type
        std::map<bioentity::EntityType, std::vector<bioentity::TaggedToken>> per_type;
        for (const json& tok : j.at("tokens")) {
            bioentity::TaggedToken base;
            base.token_text = tok.at("text").get<std::string>();
            base.begin = tok.at("start").get<std::uint32_t>();
            base.end = tok.at("end").get<std::uint32_t>();
            for (const auto& [type_name, probs] : tok.at("probs").items()) {
                auto type = bioentity::type_from_name(type_name);
                if (!type) throw Error("unknown entity type in tagger output: " + type_name);
                if (probs.size() != bioentity::kTagCount)
                    throw Error("tagger output needs 7 probabilities per type");
                bioentity::TaggedToken t = base;
                for (std::size_t k = 0; k < bioentity::kTagCount; ++k)
                    t.probs[k] = probs[k].get<double>();
                per_type[*type].push_back(std::move(t));
            }
        }

        std::vector<bioentity::EntitySpan> spans;
        for (const auto& [type, tokens] : per_type) {
            auto decoded = bioentity::decode_tag_sequence(tokens, type, abstract_text, pmid, stats);
            spans.insert(spans.end(), decoded.begin(), decoded.end());
        }
        auto resolved = bioentity::resolve_type_overlaps(std::move(spans));
        kernels::TaggedAbstract t;
        t.pmid = pmid;
        t.spans = std::move(resolved.kept);
        t.dropped_overlaps = resolved.dropped;
        out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end(),
              [](const kernels::TaggedAbstract& a, const kernels::TaggedAbstract& b) {
                  return a.pmid < b.pmid;
              });
    return out;
}

}  // namespace

// --- config -------------------------------------------------------------------

PipelineConfig PipelineConfig::from_json(const json& j, const std::string& base_dir) {
    PipelineConfig c;
    c.base_dir = base_dir.empty() ? "." : base_dir;
    auto str = [&](const char* key) { return j.contains(key) ? j.at(key).get<std::string>() : std::string(); };
    c.citation_xml = str("citation_xml");
    c.primary_clustering = str("primary_clustering");
    c.secondary_clustering = str("secondary_clustering");
    if (j.contains("primary_coverage_end_year"))
        c.primary_coverage_end_year = j.at("primary_coverage_end_year").get<int>();
    if (j.contains("dictionaries"))
        for (const auto& [type, files] : j.at("dictionaries").items())
            for (const json& f : files) c.dictionaries[type].push_back(f.get<std::string>());
    c.gazetteer = str("gazetteer");
    c.exporter_projects = str("exporter_projects");
    c.exporter_pubs = str("exporter_pubs");
    c.orcid_person = str("orcid_person");
    c.orcid_employment = str("orcid_employment");
    c.orcid_education = str("orcid_education");
    c.keyword_dir = str("keyword_dir");
    c.country_table = str("country_table");
    c.tagger_output = str("tagger_output");
    if (j.contains("cutoff_year")) c.cutoff_year = j.at("cutoff_year").get<int>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("jobs")) c.jobs = j.at("jobs").get<int>();
    return c;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("config is not valid JSON: " + std::string(e.what()));
    }
    return from_json(j, fs::path(path).parent_path().string());
}

std::string PipelineConfig::resolve(const std::string& path) const {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base_dir) / p).lexically_normal().string();
}

std::string PipelineConfig::out_path(const std::string& name) const {
    return (fs::path(resolve(output_dir)) / name).string();
}

// --- runner -------------------------------------------------------------------

Runner::Runner(PipelineConfig config) : config_(std::move(config)) {
    kernels::set_jobs(config_.jobs);
    fs::create_directories(config_.resolve(config_.output_dir));
}

void Runner::append_report(const StageResult& result) {
    std::ofstream out(config_.out_path("run_report.jsonl"), std::ios::app | std::ios::binary);
    json line = result.details;
    line["stage"] = result.stage;
    line["duration_ms"] = result.duration_ms;
    out << line.dump() << "\n";
}

StageResult Runner::run_stage(const std::string& name) {
    StageResult result;
    if (name == "ingest") result = stage_ingest();
    else if (name == "tag") result = stage_tag();
    else if (name == "normalize") result = stage_normalize();
    else if (name == "and-merge") result = stage_and_merge();
    else if (name == "affil") result = stage_affil();
    else if (name == "link") result = stage_link();
    else if (name == "emit") result = stage_emit();
    else if (name == "graph") result = stage_graph();
    else if (name == "eval") result = stage_eval();
    else throw Error("unknown stage: " + name);
    append_report(result);
    return result;
}

std::vector<StageResult> Runner::run_all() {
    std::vector<StageResult> results;
    for (const char* stage : kStageNames) results.push_back(run_stage(stage));
    return results;
}

StageResult Runner::stage_ingest() {
    Timer timer;
    std::string xml_path = config_.resolve(config_.citation_xml);
    require_input(xml_path, "citation_xml");

    ingest::TabularData articles, authors, affil_strings;
    articles.schema = ingest::find_schema("articles");
    authors.schema = ingest::find_schema("authors");
    affil_strings.schema = ingest::find_schema("affil_strings");

    std::ifstream in(xml_path, std::ios::binary);
    ingest::CitationReader reader(in);
    while (auto c = reader.next()) {
        const auto& a = c->article;
        articles.rows.push_back({num(static_cast<std::int64_t>(a.pmid)),
                                 a.pub_year ? num(*a.pub_year) : "", a.journal, a.title, a.doi,
                                 a.abstract_text});
        for (const auto& au : c->authors) {
            authors.rows.push_back({num(static_cast<std::int64_t>(au.pmid)), num(au.au_order),
                                    au.last_name, au.fore_name, au.initials, au.suffix});
            for (std::size_t i = 0; i < au.affiliations.size(); ++i) {
                if (au.affiliations[i].empty()) continue;
                affil_strings.rows.push_back({num(static_cast<std::int64_t>(au.pmid)),
                                              num(au.au_order), num(static_cast<std::int64_t>(i + 1)),
                                              au.affiliations[i]});
            }
        }
    }
    ingest::write_tabular(config_.out_path("articles.csv"), articles);
    ingest::write_tabular(config_.out_path("authors.csv"), authors);
    ingest::write_tabular(config_.out_path("affil_strings.csv"), affil_strings);

    const ingest::IngestReport& rep = reader.report();
    StageResult r;
    r.stage = "ingest";
    r.details = {
        {"citations", rep.citations},
        {"author_instances", rep.author_instances},
        {"affiliation_strings", affil_strings.rows.size()},
        {"skipped_missing_pmid", rep.skipped_missing_pmid},
        {"invalid_utf8_replacements", rep.invalid_utf8_replacements},
        {"years_flagged", rep.years_flagged},
    };
    r.duration_ms = timer.ms();
    return r;
}

StageResult Runner::stage_tag() {
    Timer timer;
    LoadedCorpus corpus = load_corpus_intermediates(config_);

    std::vector<kernels::TaggedAbstract> tagged;
    bioentity::DecodeStats decode_stats;
    if (!config_.tagger_output.empty()) {
        std::string path = config_.resolve(config_.tagger_output);
        require_input(path, "tagger_output");
        tagged = decode_tagger_output(path, corpus, &decode_stats);
    } else {
        if (config_.dictionaries.empty())
            throw Error("tag stage needs dictionaries (baseline) or tagger_output");
        bioentity::DictionarySet dicts = load_dictionaries(config_);
        std::vector<kernels::AbstractInput> abstracts;
        for (const auto& a : corpus.articles)
            if (!a.abstract_text.empty()) abstracts.push_back({a.pmid, a.abstract_text});
        tagged = kernels::tag_corpus(abstracts, dicts);
    }

    bioentity::OverlapStats overlap_stats;
    ingest::TabularData spans;
    spans.schema = ingest::find_schema("spans");
    for (const auto& t : tagged) {
        bioentity::OverlapResolution r;
        r.dropped = t.dropped_overlaps;
        overlap_stats.add(r);
        for (const auto& s : t.spans) {
            spans.rows.push_back({num(static_cast<std::int64_t>(s.pmid)), num(s.begin), num(s.end),
                                  s.mention, std::string(bioentity::type_name(s.type)),
                                  num(s.score)});
        }
    }
    ingest::write_tabular(config_.out_path("spans.csv"), spans);

    StageResult r;
    r.stage = "tag";
    r.details = {
        {"abstracts", overlap_stats.abstracts},
        {"spans", spans.rows.size()},
        {"abstracts_with_overlap", overlap_stats.abstracts_with_overlap},
        {"overlap_rate", overlap_stats.rate()},
        {"orphan_inside_repairs", decode_stats.orphan_inside_repairs},
        {"mode", config_.tagger_output.empty() ? "baseline" : "external"},
    };
    r.duration_ms = timer.ms();
    return r;
}

StageResult Runner::stage_normalize() {
    Timer timer;
    bioentity::DictionarySet dicts = load_dictionaries(config_);
    std::vector<bioentity::EntitySpan> spans = load_spans(config_.out_path("spans.csv"), "spans");

    ingest::TabularData mentions, mutations;
    mentions.schema = ingest::find_schema("mentions");
    mutations.schema = ingest::find_schema("mutations");

    std::uint64_t normalized = 0;
    for (const auto& s : spans) {
        auto id = bioentity::normalize_mention(s.mention, dicts[static_cast<std::size_t>(s.type)]);
        if (id) ++normalized;
        mentions.rows.push_back({num(static_cast<std::int64_t>(s.pmid)), num(s.begin), num(s.end),
                                 s.mention, std::string(bioentity::type_name(s.type)), num(s.score),
                                 id.value_or("")});
        if (s.type == bioentity::EntityType::Mutation) {
            if (auto m = bioentity::normalize_mutation(s.mention)) {
                mutations.rows.push_back({num(static_cast<std::int64_t>(s.pmid)), num(s.begin),
                                          num(s.end), s.mention,
                                          std::string(bioentity::mutation_type_name(m->type)),
                                          m->normalized_name});
            }
        }
    }
    ingest::write_tabular(config_.out_path("mentions.csv"), mentions);
    ingest::write_tabular(config_.out_path("mutations.csv"), mutations);

    StageResult r;
    r.stage = "normalize";
    r.details = {
        {"mentions", mentions.rows.size()},
        {"normalized", normalized},
        {"mutations_normalized", mutations.rows.size()},
    };
    r.duration_ms = timer.ms();
    return r;
}

StageResult Runner::stage_and_merge() {
    Timer timer;
    std::string primary_path = config_.resolve(config_.primary_clustering);
    std::string secondary_path = config_.resolve(config_.secondary_clustering);
    require_input(primary_path, "primary_clustering");
    require_input(secondary_path, "secondary_clustering");

    ingest::SourceClustering primary = ingest::load_clustering(primary_path, "primary");
    primary.coverage_end_year = config_.primary_coverage_end_year;
    ingest::SourceClustering secondary = ingest::load_clustering(secondary_path, "secondary");

    andmerge::UnifiedAssignment merged = andmerge::merge_clusterings(primary, secondary);
    andmerge::MergeValidation validation = andmerge::validate_merge(merged, primary, secondary);
    if (!validation.ok) {
        std::string msg = "merge validation failed:";
        for (const std::string& f : validation.failures) msg += " " + f + ";";
        throw Error(msg);
    }

    andmerge::write_unified(config_.out_path("unified.tsv"), merged);

    ingest::TabularData conflicts;
    conflicts.schema = ingest::find_schema("conflicts");
    for (const auto& c : merged.conflicts) {
        std::string counts;
        for (const auto& [id, count] : c.primary_id_counts) {
            if (!counts.empty()) counts += ";";
            counts += std::to_string(id) + ":" + std::to_string(count);
        }
        conflicts.rows.push_back({num(static_cast<std::int64_t>(c.secondary_cluster)), counts,
                                  num(static_cast<std::int64_t>(c.resolution)), c.rule});
    }
    ingest::write_tabular(config_.out_path("conflicts.csv"), conflicts);

    StageResult r;
    r.stage = "and-merge";
    r.details = {
        {"assigned_instances", merged.and_id_of.size()},
        {"step1_instances", merged.step1_instances},
        {"step2_instances", merged.step2_instances},
        {"step3_instances", merged.step3_instances},
        {"fresh_ids_allocated", merged.fresh_ids_allocated},
        {"fresh_id_floor", merged.fresh_id_floor},
        {"conflicts", merged.conflicts.size()},
    };
    r.duration_ms = timer.ms();
    return r;
}

StageResult Runner::stage_affil() {
    Timer timer;
    LoadedCorpus corpus = load_corpus_intermediates(config_);
    andmerge::UnifiedAssignment unified = load_unified(config_);

    affilparse::Gazetteer gazetteer;
    bool have_gazetteer = !config_.gazetteer.empty();
    if (have_gazetteer) {
        std::string path = config_.resolve(config_.gazetteer);
        require_input(path, "gazetteer");
        gazetteer.load_file(path);
    }
    affilparse::KeywordTables keywords =
        config_.keyword_dir.empty() ? affilparse::KeywordTables::defaults()
                                    : affilparse::KeywordTables::load_dir(config_.resolve(config_.keyword_dir));
    affilparse::CountryTable countries =
        config_.country_table.empty() ? affilparse::CountryTable::defaults()
                                      : affilparse::CountryTable::load_file(config_.resolve(config_.country_table));
    affilparse::AffiliationParser parser(std::move(keywords), std::move(countries),
                                         have_gazetteer ? &gazetteer : nullptr);

    std::map<std::uint64_t, std::optional<int>> year_by_pmid;
    for (const auto& a : corpus.articles) year_by_pmid[a.pmid] = a.pub_year;

    ingest::TabularData strings =
        ingest::load_tabular_source(config_.out_path("affil_strings.csv"), "affil_strings");
    std::vector<std::string> raw;
    raw.reserve(strings.rows.size());
    for (const auto& row : strings.rows) raw.push_back(row[3]);

    std::vector<affilparse::ParsedAffiliation> records =
        kernels::parse_affiliations(parser, raw, have_gazetteer);

    affilparse::GeocodeStats geo;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& row = strings.rows[i];
        records[i].pmid = static_cast<std::uint64_t>(to_i64(row[0]));
        records[i].au_order = static_cast<std::uint32_t>(to_i64(row[1]));
        records[i].affiliation_order = static_cast<std::uint32_t>(to_i64(row[2]));
        records[i].and_id = unified.and_id_for(records[i].pmid, records[i].au_order);
        records[i].pub_year = year_by_pmid[records[i].pmid];
        if (records[i].latitude) ++geo.geocoded;
    }

    std::vector<affilparse::AuthorStub> instances;
    instances.reserve(corpus.authors.size());
    for (const auto& a : corpus.authors) {
        affilparse::AuthorStub s;
        s.pmid = a.pmid;
        s.au_order = a.au_order;
        s.and_id = unified.and_id_for(a.pmid, a.au_order);
        s.pub_year = year_by_pmid[a.pmid];
        instances.push_back(s);
    }

    affilparse::InheritReport inherit =
        affilparse::inherit_affiliations(records, instances, config_.cutoff_year);

    std::sort(records.begin(), records.end(),
              [](const affilparse::ParsedAffiliation& a, const affilparse::ParsedAffiliation& b) {
                  return std::tuple(a.pmid, a.au_order, a.affiliation_order, a.inherited) <
                         std::tuple(b.pmid, b.au_order, b.affiliation_order, b.inherited);
              });

    ingest::TabularData out;
    out.schema = ingest::find_schema("affil_parsed");
    for (const auto& p : records) {
        out.rows.push_back({num(static_cast<std::int64_t>(p.pmid)), num(p.au_order),
                            p.and_id ? num(static_cast<std::int64_t>(p.and_id)) : "",
                            num(p.affiliation_order), p.raw, p.department, p.institution, p.email,
                            p.zip_code, p.location, p.country, p.city, p.state,
                            std::string(affilparse::affiliation_type_name(p.affiliation_type)),
                            p.latitude ? num(*p.latitude) : "", p.longitude ? num(*p.longitude) : "",
                            p.fips ? num(*p.fips) : "", p.inherited ? "1" : "0",
                            p.pub_year ? num(*p.pub_year) : ""});
    }
    ingest::write_tabular(config_.out_path("affil_parsed.csv"), out);

    StageResult r;
    r.stage = "affil";
    r.details = {
        {"records", records.size()},
        {"geocoded", geo.geocoded},
        {"inherited_records", inherit.inherited_records},
        {"instances", inherit.instances},
        {"covered_before", inherit.covered_before},
        {"covered_after", inherit.covered_after},
        {"coverage_before", inherit.coverage_before()},
        {"coverage_after", inherit.coverage_after()},
    };
    r.duration_ms = timer.ms();
    return r;
}

StageResult Runner::stage_link() {
    Timer timer;
    LoadedCorpus loaded = load_corpus_intermediates(config_);
    andmerge::UnifiedAssignment unified = load_unified(config_);
    linkage::Corpus corpus = linkage::Corpus::build(loaded.articles, loaded.authors);

    ingest::TabularData links_out, ambiguities_out, nih_out, crosswalk_out;
    links_out.schema = ingest::find_schema("links");
    ambiguities_out.schema = ingest::find_schema("link_ambiguities");
    nih_out.schema = ingest::find_schema("nih_rows");
    crosswalk_out.schema = ingest::find_schema("crosswalk");

    auto links_to_rows = [&](const std::vector<linkage::LinkRecord>& links) {
        for (const auto& link : links) {
            std::string pmids, features;
            std::set<std::string> feature_set;
            for (const auto& e : link.evidence) {
                if (!pmids.empty()) pmids += ";";
                pmids += std::to_string(e.pmid);
                feature_set.insert(e.features);
            }
            for (const auto& f : feature_set) {
                if (!features.empty()) features += ";";
                features += f;
            }
            links_out.rows.push_back({num(static_cast<std::int64_t>(link.and_id)),
                                      std::string(linkage::counterpart_kind_name(link.kind)),
                                      link.counterpart_id, pmids, features});
        }
    };

    StageResult r;
    r.stage = "link";
    r.details = json::object();

    // registry linkage
    if (!config_.orcid_person.empty()) {
        std::string person_path = config_.resolve(config_.orcid_person);
        require_input(person_path, "orcid_person");
        ingest::TabularData person = ingest::load_tabular_source(person_path, "orcid_person");
        std::optional<ingest::TabularData> employment, education;
        if (!config_.orcid_employment.empty())
            employment = ingest::load_tabular_source(config_.resolve(config_.orcid_employment),
                                                     "orcid_employment");
        if (!config_.orcid_education.empty())
            education = ingest::load_tabular_source(config_.resolve(config_.orcid_education),
                                                    "orcid_education");
        linkage::OrcidLoadReport load_report;
        std::vector<linkage::OrcidRecord> orcid_records = linkage::load_orcid_records(
            person, employment ? &*employment : nullptr, education ? &*education : nullptr,
            &load_report);

        linkage::OrcidLinkResult orcid = linkage::link_orcid(corpus, unified, orcid_records);
        links_to_rows(orcid.links);
        for (const std::string& a : orcid.ambiguities)
            ambiguities_out.rows.push_back({"ORCID", a});

        r.details["orcid_records"] = load_report.records;
        r.details["orcid_invalid_checksum_skipped"] = load_report.invalid_checksum_skipped;
        r.details["orcid_candidate_pairs"] = orcid.candidate_pairs;
        r.details["orcid_links"] = orcid.links.size();
        r.details["orcid_ambiguities"] = orcid.ambiguities.size();
    }

    // funding linkage
    if (!config_.exporter_projects.empty()) {
        std::string projects_path = config_.resolve(config_.exporter_projects);
        std::string pubs_path = config_.resolve(config_.exporter_pubs);
        require_input(projects_path, "exporter_projects");
        require_input(pubs_path, "exporter_pubs");
        linkage::NihProjectSet projects = linkage::load_nih_projects(
            ingest::load_tabular_source(projects_path, "exporter_projects"),
            ingest::load_tabular_source(pubs_path, "exporter_pubs"));

        linkage::NihLinkResult nih = linkage::link_nih(projects, corpus, unified);
        links_to_rows(nih.links);
        for (const auto& row : nih.rows) {
            nih_out.rows.push_back({row.and_id ? num(static_cast<std::int64_t>(row.and_id)) : "",
                                    row.pi_id, num(static_cast<std::int64_t>(row.pmid)),
                                    row.project_number, row.sub_project_number, row.pi_name});
        }

        linkage::CrosswalkResult xw = linkage::build_eval_crosswalk(projects, corpus, unified);
        for (const auto& t : xw.triples) {
            crosswalk_out.rows.push_back({num(static_cast<std::int64_t>(t.pmid)), t.pi_id,
                                          num(static_cast<std::int64_t>(t.and_id))});
        }

        r.details["nih_rows"] = nih.rows.size();
        r.details["nih_links"] = nih.links.size();
        r.details["funnel"] = {
            {"project_records_total", xw.funnel.project_records_total},
            {"projects_total", xw.funnel.projects_total},
            {"projects_with_articles", xw.funnel.projects_with_articles},
            {"records_with_articles", xw.funnel.records_with_articles},
            {"multi_pi_records_removed", xw.funnel.multi_pi_records_removed},
            {"projects_final", xw.funnel.projects_final},
            {"pis_final", xw.funnel.pis_final},
            {"articles_final", xw.funnel.articles_final},
            {"crosswalk_articles", xw.funnel.crosswalk_articles},
            {"crosswalk_pis", xw.funnel.crosswalk_pis},
            {"crosswalk_and_ids", xw.funnel.crosswalk_and_ids},
        };
    }

    ingest::write_tabular(config_.out_path("links.csv"), links_out);
    ingest::write_tabular(config_.out_path("link_ambiguities.csv"), ambiguities_out);
    ingest::write_tabular(config_.out_path("nih_rows.csv"), nih_out);
    ingest::write_tabular(config_.out_path("crosswalk.csv"), crosswalk_out);

    r.details["links_total"] = links_out.rows.size();
    r.duration_ms = timer.ms();
    return r;
}

StageResult Runner::stage_emit() {
    Timer timer;
    LoadedCorpus loaded = load_corpus_intermediates(config_);
    andmerge::UnifiedAssignment unified = load_unified(config_);

    using kgraph::Cell;
    using kgraph::CellRow;
    auto text_cell = [](const std::string& s) -> Cell {
        if (s.empty()) return std::monostate{};
        return s;
    };
    auto opt_i64 = [](const std::string& s, bool zero_is_empty = false) -> Cell {
        if (s.empty()) return std::monostate{};
        std::int64_t v = 0;
        std::from_chars(s.data(), s.data() + s.size(), v);
        if (zero_is_empty && v == 0) return std::monostate{};
        return v;
    };

    json counts = json::object();

    // Author_List
    {
        auto rows = kgraph::derive_author_list_fields(loaded.articles, loaded.authors, unified);
        kgraph::emit_table_file(config_.out_path("Author_List.csv"),
                                kgraph::table_schema(kgraph::TableId::AuthorList),
                                kgraph::author_list_cells(rows));
        counts["Author_List"] = rows.size();
    }

    // Bio_entities_Main and Bio_entities_Mutation
    {
        ingest::TabularData mentions =
            ingest::load_tabular_source(config_.out_path("mentions.csv"), "mentions");
        std::vector<std::size_t> order(mentions.rows.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto& ra = mentions.rows[a];
            const auto& rb = mentions.rows[b];
            return std::tuple(to_i64(ra[0]), to_i64(ra[1]), to_i64(ra[2]), ra[4]) <
                   std::tuple(to_i64(rb[0]), to_i64(rb[1]), to_i64(rb[2]), rb[4]);
        });

        std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::int64_t> main_id;
        std::vector<CellRow> main_rows;
        main_rows.reserve(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            const auto& row = mentions.rows[order[i]];
            std::int64_t id = static_cast<std::int64_t>(i + 1);
            if (row[4] == "mutation") main_id[{to_i64(row[0]), to_i64(row[1]), to_i64(row[2])}] = id;
            main_rows.push_back({id, to_i64(row[0]), to_i64(row[1]), to_i64(row[2]),
                                 text_cell(row[3]), text_cell(row[6]), text_cell(row[4])});
        }
        kgraph::emit_table_file(config_.out_path("Bio_entities_Main.csv"),
                                kgraph::table_schema(kgraph::TableId::BioEntitiesMain), main_rows);
        counts["Bio_entities_Main"] = main_rows.size();

        ingest::TabularData mutations =
            ingest::load_tabular_source(config_.out_path("mutations.csv"), "mutations");
        std::vector<CellRow> mutation_rows;
        for (const auto& row : mutations.rows) {
            auto it = main_id.find({to_i64(row[0]), to_i64(row[1]), to_i64(row[2])});
            if (it == main_id.end()) continue;
            mutation_rows.push_back({it->second, text_cell(row[3]), text_cell(row[4]),
                                     text_cell(row[5])});
        }
        std::sort(mutation_rows.begin(), mutation_rows.end(),
                  [](const CellRow& a, const CellRow& b) {
                      return std::get<std::int64_t>(a[0]) < std::get<std::int64_t>(b[0]);
                  });
        kgraph::emit_table_file(config_.out_path("Bio_entities_Mutation.csv"),
                                kgraph::table_schema(kgraph::TableId::BioEntitiesMutation),
                                mutation_rows);
        counts["Bio_entities_Mutation"] = mutation_rows.size();
    }

    // Affiliations
    {
        ingest::TabularData parsed =
            ingest::load_tabular_source(config_.out_path("affil_parsed.csv"), "affil_parsed");
        std::vector<CellRow> rows;
        rows.reserve(parsed.rows.size());
        for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
            const auto& p = parsed.rows[i];
            CellRow row;
            row.emplace_back(static_cast<std::int64_t>(i + 1));
            row.emplace_back(to_i64(p[0]));
            row.emplace_back(to_i64(p[1]));
            row.emplace_back(opt_i64(p[2], /*zero_is_empty=*/true));
            row.emplace_back(to_i64(p[3]));
            for (std::size_t c = 4; c <= 13; ++c) row.emplace_back(text_cell(p[c]));
            auto lat = to_f64(p[14]);
            auto lon = to_f64(p[15]);
            row.emplace_back(lat ? Cell(*lat) : Cell{});
            row.emplace_back(lon ? Cell(*lon) : Cell{});
            row.emplace_back(opt_i64(p[16]));
            rows.push_back(std::move(row));
        }
        kgraph::emit_table_file(config_.out_path("Affiliations.csv"),
                                kgraph::table_schema(kgraph::TableId::Affiliations), rows);
        counts["Affiliations"] = rows.size();
    }

    // Researcher_Employment / Researcher_Education from the linked records
    {
        ingest::TabularData links =
            ingest::load_tabular_source(config_.out_path("links.csv"), "links");
        std::map<std::string, std::int64_t> and_by_orcid;
        for (const auto& row : links.rows)
            if (row[1] == "ORCID") and_by_orcid[row[2]] = to_i64(row[0]);

        auto emit_entries = [&](const std::string& source_path, const char* source_schema,
                                kgraph::TableId table, bool is_employment, const char* out_name) {
            std::vector<CellRow> rows;
            if (!source_path.empty()) {
                ingest::TabularData t =
                    ingest::load_tabular_source(config_.resolve(source_path), source_schema);
                std::vector<std::vector<std::string>> sorted = t.rows;
                std::sort(sorted.begin(), sorted.end());
                for (const auto& e : sorted) {
                    auto linked = and_by_orcid.find(e[0]);
                    if (linked == and_by_orcid.end()) continue;
                    CellRow row;
                    row.emplace_back(static_cast<std::int64_t>(rows.size() + 1));
                    row.emplace_back(linked->second);
                    row.emplace_back(e[0]);
                    if (is_employment) {
                        // ORCID,Organization,Department,City,Region,Country,BeginYear,EndYear,Identifier,IdSource
                        row.emplace_back(text_cell(e[2]));  // Department
                        row.emplace_back(text_cell(e[6]));  // BeginYear
                        row.emplace_back(text_cell(e[1]));  // Organization
                        row.emplace_back(text_cell(e[3]));  // City
                        row.emplace_back(text_cell(e[4]));  // Region
                        row.emplace_back(text_cell(e[5]));  // Country
                        row.emplace_back(text_cell(e[8]));  // Identifier
                        row.emplace_back(text_cell(e[9]));  // IdSource
                        row.emplace_back(text_cell(e[7]));  // EndYear
                    } else {
                        // ORCID,Organization,City,Region,Country,BeginYear,EndYear,Role,Identifier,IdSource
                        row.emplace_back(text_cell(e[5]));  // BeginYear
                        row.emplace_back(text_cell(e[1]));  // Organization
                        row.emplace_back(text_cell(e[2]));  // City
                        row.emplace_back(text_cell(e[3]));  // Region
                        row.emplace_back(text_cell(e[4]));  // Country
                        row.emplace_back(text_cell(e[8]));  // Identifier
                        row.emplace_back(text_cell(e[9]));  // IdSource
                        row.emplace_back(text_cell(e[6]));  // EndYear
                        row.emplace_back(text_cell(e[7]));  // Role
                    }
                    rows.push_back(std::move(row));
                }
            }
            kgraph::emit_table_file(config_.out_path(std::string(out_name) + ".csv"),
                                    kgraph::table_schema(table), rows);
            counts[out_name] = rows.size();
        };
        emit_entries(config_.orcid_employment, "orcid_employment",
                     kgraph::TableId::ResearcherEmployment, true, "Researcher_Employment");
        emit_entries(config_.orcid_education, "orcid_education",
                     kgraph::TableId::ResearcherEducation, false, "Researcher_Education");
    }

    // NIH_Projects
    {
        ingest::TabularData nih = ingest::load_tabular_source(config_.out_path("nih_rows.csv"),
                                                              "nih_rows");
        std::vector<CellRow> rows;
        rows.reserve(nih.rows.size());
        for (const auto& p : nih.rows) {
            CellRow row;
            row.emplace_back(static_cast<std::int64_t>(rows.size() + 1));
            row.emplace_back(opt_i64(p[0], /*zero_is_empty=*/true));
            row.emplace_back(text_cell(p[1]));
            row.emplace_back(to_i64(p[2]));
            row.emplace_back(text_cell(p[3]));
            row.emplace_back(text_cell(p[4]));
            row.emplace_back(text_cell(p[5]));
            rows.push_back(std::move(row));
        }
        kgraph::emit_table_file(config_.out_path("NIH_Projects.csv"),
                                kgraph::table_schema(kgraph::TableId::NihProjects), rows);
        counts["NIH_Projects"] = rows.size();
    }

    StageResult r;
    r.stage = "emit";
    r.details = {{"rows", counts}};
    r.duration_ms = timer.ms();
    return r;
}

StageResult Runner::stage_graph() {
    Timer timer;
    LoadedCorpus loaded = load_corpus_intermediates(config_);
    andmerge::UnifiedAssignment unified = load_unified(config_);

    std::vector<kgraph::AuthorOccurrence> author_occ;
    for (const auto& a : loaded.authors) {
        std::uint64_t and_id = unified.and_id_for(a.pmid, a.au_order);
        if (and_id != 0) author_occ.push_back({and_id, a.pmid});
    }

    ingest::TabularData mentions =
        ingest::load_tabular_source(config_.out_path("mentions.csv"), "mentions");
    std::vector<kgraph::EntityOccurrence> entity_occ;
    for (const auto& row : mentions.rows) {
        if (row[6].empty()) continue;  // unnormalized mentions stay out of the graph
        entity_occ.push_back({row[4] + ":" + row[6], static_cast<std::uint64_t>(to_i64(row[0]))});
    }

    kgraph::BipartiteGraph graph = kgraph::build_bipartite(author_occ, entity_occ);
    kgraph::ProjectedGraph author_projection = kgraph::project(graph, kgraph::Side::Author);
    kgraph::ProjectedGraph entity_projection = kgraph::project(graph, kgraph::Side::Entity);

    auto write_text_file = [&](const std::string& name, const std::string& data) {
        std::ofstream out(config_.out_path(name), std::ios::binary);
        if (!out) throw Error("cannot write " + name);
        out << data;
    };
    write_text_file("bipartite.csv", kgraph::bipartite_edge_csv(graph));
    write_text_file("projection_authors.csv", kgraph::projection_edge_csv(graph, author_projection));
    write_text_file("projection_entities.csv", kgraph::projection_edge_csv(graph, entity_projection));

    StageResult r;
    r.stage = "graph";
    r.details = {
        {"author_vertices", graph.authors().size()},
        {"entity_vertices", graph.entities().size()},
        {"edges", graph.edges().size()},
        {"author_projection_edges", author_projection.edges.size()},
        {"entity_projection_edges", entity_projection.edges.size()},
    };
    r.duration_ms = timer.ms();
    return r;
}

StageResult Runner::stage_eval() {
    Timer timer;
    ingest::TabularData xw_rows =
        ingest::load_tabular_source(config_.out_path("crosswalk.csv"), "crosswalk");
    evalmetrics::Crosswalk xw;
    for (const auto& row : xw_rows.rows) {
        xw.insert({static_cast<std::uint64_t>(to_i64(row[0])), row[1],
                   static_cast<std::uint64_t>(to_i64(row[2]))});
    }

    StageResult r;
    r.stage = "eval";
    ingest::TabularData report;
    report.schema = ingest::find_schema("eval_report");
    std::string human;
    if (xw.empty()) {
        human = "crosswalk is empty; no metrics computed\n";
        r.details = {{"triples", 0}};
    } else {
        evalmetrics::EvalReport rep = evalmetrics::evaluate(xw);
        evalmetrics::EvalReport macro = evalmetrics::evaluate(xw, evalmetrics::Averaging::Macro);
        report.rows.push_back({"precision", num(rep.precision)});
        report.rows.push_back({"recall", num(rep.recall)});
        report.rows.push_back({"f1", num(rep.f1)});
        report.rows.push_back({"precision_macro", num(macro.precision)});
        report.rows.push_back({"recall_macro", num(macro.recall)});
        report.rows.push_back({"f1_macro", num(macro.f1)});
        human = "triples: " + std::to_string(xw.size()) + "\n" +
                "precision: " + num(rep.precision) + "\n" +
                "recall: " + num(rep.recall) + "\n" +
                "f1: " + num(rep.f1) + "\n";
        r.details = {
            {"triples", xw.size()},
            {"precision", rep.precision},
            {"recall", rep.recall},
            {"f1", rep.f1},
            {"precision_macro", macro.precision},
            {"recall_macro", macro.recall},
            {"f1_macro", macro.f1},
        };
    }
    ingest::write_tabular(config_.out_path("eval_report.csv"), report);
    std::ofstream txt(config_.out_path("eval_report.txt"), std::ios::binary);
    txt << human;

    r.duration_ms = timer.ms();
    return r;
}

}  // namespace medkg::pipeline
