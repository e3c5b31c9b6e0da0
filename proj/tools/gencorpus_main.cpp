#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

#include "medkg/syngen.hpp"

// Deterministic synthetic corpus generator: citation XML plus all side
// inputs and a ready-to-run config.json. Same seed, same bytes.
int main(int argc, char** argv) {
    CLI::App app{"medkg-gencorpus: synthetic corpus generator"};

    std::string out_dir = "corpus";
    medkg::syn::CorpusOptions options;
    bool xml_only = false;

    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--papers", options.papers, "number of citations");
    app.add_option("--people", options.people, "size of the author pool");
    app.add_option("--seed", options.seed, "RNG seed");
    app.add_option("--first-year", options.first_year, "earliest publication year");
    app.add_option("--last-year", options.last_year, "latest publication year");
    app.add_flag("--xml-only", xml_only, "write only corpus.xml");

    CLI11_PARSE(app, argc, argv);

    options.side_inputs = !xml_only;
    auto summary = medkg::syn::write_corpus(out_dir, options);
    std::cout << "papers: " << summary.papers << "\n"
              << "author instances: " << summary.author_instances << "\n"
              << "people: " << summary.people << "\n";
    return 0;
}
