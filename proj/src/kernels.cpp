#include "medkg/kernels.hpp"

#include <omp.h>

#include <algorithm>

#include "medkg/kgraph.hpp"

namespace medkg::kernels {

namespace {
int g_jobs = 0;
}

void set_jobs(int jobs) {
    g_jobs = jobs;
    if (jobs > 0) omp_set_num_threads(jobs);
}

int jobs() {
    return g_jobs;
}

std::vector<TaggedAbstract> tag_corpus(const std::vector<AbstractInput>& abstracts,
                                       const bioentity::DictionarySet& dicts) {
    std::vector<TaggedAbstract> out(abstracts.size());
    const std::int64_t n = static_cast<std::int64_t>(abstracts.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
        const AbstractInput& in = abstracts[static_cast<std::size_t>(i)];
        auto spans = bioentity::baseline_tag(in.text, in.pmid, dicts);
        auto resolved = bioentity::resolve_type_overlaps(std::move(spans));
        TaggedAbstract& t = out[static_cast<std::size_t>(i)];
        t.pmid = in.pmid;
        t.spans = std::move(resolved.kept);
        t.dropped_overlaps = resolved.dropped;
    }
    return out;
}

std::vector<affilparse::ParsedAffiliation> parse_affiliations(
    const affilparse::AffiliationParser& parser, const std::vector<std::string>& raw,
    bool geocode) {
    std::vector<affilparse::ParsedAffiliation> out(raw.size());
    const std::int64_t n = static_cast<std::int64_t>(raw.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) {
        auto parsed = parser.parse(raw[static_cast<std::size_t>(i)]);
        if (geocode) parser.geocode(parsed);
        out[static_cast<std::size_t>(i)] = std::move(parsed);
    }
    return out;
}

kgraph::ProjectedGraph project_graph(const kgraph::BipartiteGraph& graph, kgraph::Side side) {
    using kgraph::ProjectedEdge;
    using kgraph::Side;

    // own side's neighbor lists and the opposite side's, both sorted
    const auto own = side == Side::Author ? graph.author_adjacency() : graph.entity_adjacency();
    const auto opposite =
        side == Side::Author ? graph.entity_adjacency() : graph.author_adjacency();

    const std::int64_t n = static_cast<std::int64_t>(own.size());
    std::vector<std::vector<ProjectedEdge>> per_vertex(own.size());

#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t ui = 0; ui < n; ++ui) {
        const std::uint32_t u = static_cast<std::uint32_t>(ui);
        const auto& nu = own[u];
        if (nu.empty()) continue;
        // count common neighbors with every v > u reachable through N(u)
        std::vector<std::pair<std::uint32_t, std::uint32_t>> counts;  // (v, weight)
        for (std::uint32_t w : nu) {
            for (std::uint32_t v : opposite[w]) {
                if (v <= u) continue;
                counts.emplace_back(v, 0);
            }
        }
        if (counts.empty()) continue;
        std::sort(counts.begin(), counts.end());
        std::vector<ProjectedEdge>& edges = per_vertex[u];
        for (std::size_t k = 0; k < counts.size();) {
            std::size_t j = k;
            while (j < counts.size() && counts[j].first == counts[k].first) ++j;
            edges.push_back({u, counts[k].first, static_cast<std::uint32_t>(j - k)});
            k = j;
        }
    }

    kgraph::ProjectedGraph out;
    out.side = side;
    out.vertex_count = own.size();
    std::size_t total = 0;
    for (const auto& e : per_vertex) total += e.size();
    out.edges.reserve(total);
    for (const auto& e : per_vertex) out.edges.insert(out.edges.end(), e.begin(), e.end());
    return out;
}

}  // namespace medkg::kernels
