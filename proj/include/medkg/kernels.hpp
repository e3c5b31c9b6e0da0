#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "medkg/affilparse.hpp"
#include "medkg/bioentity.hpp"

namespace medkg::kgraph {
class BipartiteGraph;
struct ProjectedGraph;
enum class Side : std::uint8_t;
}  // namespace medkg::kgraph

// OpenMP-parallel kernels for the per-record hot loops. Every kernel writes
// into slots indexed by input position, so the result is bit-identical for
// any thread count; the serial counterparts in medkg::reference exist to
// pin that down in tests and benchmarks.
namespace medkg::kernels {

void set_jobs(int jobs);  // <= 0 leaves the OpenMP default
int jobs();

struct AbstractInput {
    std::uint64_t pmid = 0;
    std::string text;
};

struct TaggedAbstract {
    std::uint64_t pmid = 0;
    std::vector<bioentity::EntitySpan> spans;  // overlap-resolved
    std::uint64_t dropped_overlaps = 0;
};

// Dictionary tagging + cross-type overlap resolution over a corpus.
std::vector<TaggedAbstract> tag_corpus(const std::vector<AbstractInput>& abstracts,
                                       const bioentity::DictionarySet& dicts);

// Field extraction (and optional geocoding) over many raw strings.
std::vector<affilparse::ParsedAffiliation> parse_affiliations(
    const affilparse::AffiliationParser& parser, const std::vector<std::string>& raw,
    bool geocode);

// One-side bipartite projection by per-vertex neighborhood intersection.
kgraph::ProjectedGraph project_graph(const kgraph::BipartiteGraph& graph, kgraph::Side side);

}  // namespace medkg::kernels
