#pragma once

#include "medkg/kernels.hpp"
#include "medkg/kgraph.hpp"

// Serial reference implementations of the parallel kernels. Where it
// matters, these use a structurally different algorithm (projection counts
// pairs through the opposite side instead of intersecting neighborhoods)
// so agreement is meaningful. Tests and the benchmark compare the two.
namespace medkg::reference {

std::vector<kernels::TaggedAbstract> tag_corpus(const std::vector<kernels::AbstractInput>& abstracts,
                                                const bioentity::DictionarySet& dicts);

std::vector<affilparse::ParsedAffiliation> parse_affiliations(
    const affilparse::AffiliationParser& parser, const std::vector<std::string>& raw,
    bool geocode);

kgraph::ProjectedGraph project_graph(const kgraph::BipartiteGraph& graph, kgraph::Side side);

}  // namespace medkg::reference
