#pragma once

#include <cstdint>
#include <string>

namespace medkg::syn {

// Deterministic synthetic corpus: citation XML plus every side input the
// pipeline consumes (clusterings, dictionaries, gazetteer, funding and
// registry extracts) and a ready-to-run config.json. Same options, same
// bytes.
struct CorpusOptions {
    std::uint64_t seed = 42;
    std::size_t papers = 100;
    std::size_t people = 40;
    int first_year = 2000;
    int last_year = 2020;
    int primary_coverage_end_year = 2009;  // primary clustering stops here
    bool side_inputs = true;               // everything beyond the XML
};

struct CorpusSummary {
    std::size_t papers = 0;
    std::size_t author_instances = 0;
    std::size_t people = 0;
};

CorpusSummary write_corpus(const std::string& dir, const CorpusOptions& options);

// Just the citation XML, as a string (used by ingest benchmarks/tests).
std::string citation_xml(const CorpusOptions& options);

}  // namespace medkg::syn
