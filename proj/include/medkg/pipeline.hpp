#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace medkg::pipeline {

// Declarative run configuration; a JSON file plus flag overrides. Relative
// paths resolve against the config file's directory.
struct PipelineConfig {
    std::string base_dir = ".";
    std::string citation_xml;
    std::string primary_clustering;
    std::string secondary_clustering;
    int primary_coverage_end_year = 2009;
    std::map<std::string, std::vector<std::string>> dictionaries;  // type -> files
    std::string gazetteer;
    std::string exporter_projects;
    std::string exporter_pubs;
    std::string orcid_person;
    std::string orcid_employment;
    std::string orcid_education;
    std::string keyword_dir;
    std::string country_table;
    std::string tagger_output;  // JSONL from an external tagger; baseline otherwise
    int cutoff_year = 2016;
    std::string output_dir = "out";
    int jobs = 0;

    static PipelineConfig from_file(const std::string& path);
    static PipelineConfig from_json(const nlohmann::json& j, const std::string& base_dir);

    // empty stays empty; relative paths are joined onto base_dir
    std::string resolve(const std::string& path) const;
    std::string out_path(const std::string& name) const;
};

struct StageResult {
    std::string stage;
    double duration_ms = 0.0;
    nlohmann::json details;  // counts, metric values, warnings
};

inline constexpr const char* kStageNames[] = {
    "ingest", "tag", "normalize", "and-merge", "affil", "link", "emit", "graph", "eval",
};

class Runner {
public:
    explicit Runner(PipelineConfig config);

    // Runs one stage by name, writes its artifacts and appends a line to
    // run_report.jsonl. Unknown names are an Error.
    StageResult run_stage(const std::string& name);

    // The full chain, in pipeline order.
    std::vector<StageResult> run_all();

    const PipelineConfig& config() const { return config_; }

private:
    StageResult stage_ingest();
    StageResult stage_tag();
    StageResult stage_normalize();
    StageResult stage_and_merge();
    StageResult stage_affil();
    StageResult stage_link();
    StageResult stage_emit();
    StageResult stage_graph();
    StageResult stage_eval();

    void append_report(const StageResult& result);

    PipelineConfig config_;
};

}  // namespace medkg::pipeline
