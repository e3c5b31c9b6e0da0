#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "medkg/errors.hpp"
#include "medkg/pipeline.hpp"

// Pipeline driver. Every stage reads and writes documented files under the
// output directory, so stages can run standalone or be replaced by external
// tools (a real sequence tagger plugs in at the `tag` boundary via
// --config's tagger_output).
int main(int argc, char** argv) {
    CLI::App app{"medkg: bibliographic knowledge-graph construction pipeline"};
    app.require_subcommand(1);
    app.fallthrough();  // --config may follow the subcommand

    std::string config_path;
    std::string out_dir;
    int jobs = -1;
    int cutoff_year = -1;

    app.add_option("--config", config_path, "pipeline configuration (JSON)")->required();
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--jobs", jobs, "worker threads (overrides config)");
    app.add_option("--cutoff-year", cutoff_year, "affiliation succession cutoff (overrides config)");

    const char* stage_help[] = {
        "parse citation XML into article/author/affiliation files",
        "tag abstracts (baseline dictionary tagger or external tagger output)",
        "normalize mentions and mutations against the dictionaries",
        "merge the two source clusterings into unified author ids",
        "parse, classify, geocode and inherit affiliations",
        "link authors to registry and funding records",
        "emit the seven output tables",
        "build the bipartite author-entity network and its projections",
        "score the unified clustering against the funding crosswalk",
    };
    for (std::size_t i = 0; i < std::size(medkg::pipeline::kStageNames); ++i)
        app.add_subcommand(medkg::pipeline::kStageNames[i], stage_help[i]);
    app.add_subcommand("all", "run the whole pipeline in order");

    CLI11_PARSE(app, argc, argv);

    try {
        medkg::pipeline::PipelineConfig config =
            medkg::pipeline::PipelineConfig::from_file(config_path);
        if (!out_dir.empty()) {
            config.output_dir = out_dir;
            config.base_dir = config.base_dir.empty() ? "." : config.base_dir;
        }
        if (jobs >= 0) config.jobs = jobs;
        if (cutoff_year >= 0) config.cutoff_year = cutoff_year;

        medkg::pipeline::Runner runner(std::move(config));
        auto print = [](const medkg::pipeline::StageResult& r) {
            std::cout << r.stage << ": " << r.details.dump() << "\n";
        };
        for (const CLI::App* sub : app.get_subcommands()) {
            if (sub->get_name() == "all") {
                for (const auto& r : runner.run_all()) print(r);
            } else {
                print(runner.run_stage(sub->get_name()));
            }
        }
    } catch (const medkg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
