#include "medkg/reference.hpp"

#include <map>

namespace medkg::reference {

std::vector<kernels::TaggedAbstract> tag_corpus(const std::vector<kernels::AbstractInput>& abstracts,
                                                const bioentity::DictionarySet& dicts) {
    std::vector<kernels::TaggedAbstract> out;
    out.reserve(abstracts.size());
    for (const kernels::AbstractInput& in : abstracts) {
        auto resolved = bioentity::resolve_type_overlaps(bioentity::baseline_tag(in.text, in.pmid, dicts));
        kernels::TaggedAbstract t;
        t.pmid = in.pmid;
        t.spans = std::move(resolved.kept);
        t.dropped_overlaps = resolved.dropped;
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<affilparse::ParsedAffiliation> parse_affiliations(
    const affilparse::AffiliationParser& parser, const std::vector<std::string>& raw,
    bool geocode) {
    std::vector<affilparse::ParsedAffiliation> out;
    out.reserve(raw.size());
    for (const std::string& r : raw) {
        auto parsed = parser.parse(r);
        if (geocode) parser.geocode(parsed);
        out.push_back(std::move(parsed));
    }
    return out;
}

kgraph::ProjectedGraph project_graph(const kgraph::BipartiteGraph& graph, kgraph::Side side) {
    using kgraph::Side;

    // Walk the opposite side: every opposite vertex contributes one common
    // neighbor to each pair in its adjacency list.
    const auto opposite =
        side == Side::Author ? graph.entity_adjacency() : graph.author_adjacency();
    const std::size_t vertex_count =
        side == Side::Author ? graph.authors().size() : graph.entities().size();

    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> weights;
    for (const auto& adj : opposite) {
        for (std::size_t i = 0; i < adj.size(); ++i)
            for (std::size_t j = i + 1; j < adj.size(); ++j) ++weights[{adj[i], adj[j]}];
    }

    kgraph::ProjectedGraph out;
    out.side = side;
    out.vertex_count = vertex_count;
    out.edges.reserve(weights.size());
    for (const auto& [pair, weight] : weights) out.edges.push_back({pair.first, pair.second, weight});
    return out;
}

}  // namespace medkg::reference
