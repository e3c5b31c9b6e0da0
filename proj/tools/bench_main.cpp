#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "medkg/ingest.hpp"
#include "medkg/kernels.hpp"
#include "medkg/kgraph.hpp"
#include "medkg/reference.hpp"
#include "medkg/syngen.hpp"

// Compares the serial reference implementations against the OpenMP kernels
// on synthetic workloads and prints a timing table. Results are checked for
// equality while timing, so a speedup with a silent mismatch cannot slip by.
namespace {

using Clock = std::chrono::steady_clock;

double run_ms(const std::function<void()>& fn) {
    auto start = Clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-24s serial %9.1f ms   openmp %9.1f ms   speedup %5.2fx   %s\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms, equal ? "results equal" : "RESULTS DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t papers = argc > 1 ? static_cast<std::size_t>(std::atoi(argv[1])) : 4000;
    std::printf("threads: %d, corpus: %zu abstracts\n", omp_get_max_threads(), papers);

    // one synthetic corpus feeds all three kernels
    medkg::syn::CorpusOptions options;
    options.papers = papers;
    options.people = 200;
    std::string xml = medkg::syn::citation_xml(options);

    std::vector<medkg::kernels::AbstractInput> abstracts;
    std::vector<std::string> affiliations;
    {
        std::istringstream in(xml);
        medkg::ingest::CitationReader reader(in);
        while (auto c = reader.next()) {
            if (c->article.has_abstract)
                abstracts.push_back({c->article.pmid, c->article.abstract_text});
            for (const auto& a : c->authors)
                for (const auto& aff : a.affiliations) affiliations.push_back(aff);
        }
    }

    // dictionary tagging
    {
        medkg::bioentity::DictionarySet dicts = {
            medkg::bioentity::Dictionary(medkg::bioentity::EntityType::Gene),
            medkg::bioentity::Dictionary(medkg::bioentity::EntityType::Disease),
            medkg::bioentity::Dictionary(medkg::bioentity::EntityType::Drug),
            medkg::bioentity::Dictionary(medkg::bioentity::EntityType::Species),
            medkg::bioentity::Dictionary(medkg::bioentity::EntityType::Mutation),
        };
        dicts[0].load_text("G:1\tBRCA1\nG:2\tACE2\nG:3\tcalcitonin gene-related peptide\nG:3\tCGRP\nG:4\tTP53\nG:5\tEGFR\nG:6\tinterleukin 6");
        dicts[1].load_text("D:1\tmigraine\nD:2\theadache\nD:3\tasthma\nD:4\tinfluenza\nD:5\tdiabetes\nD:6\tlung cancer\nD:7\tSARS");
        dicts[2].load_text("C:1\taspirin\nC:2\tsumatriptan\nC:3\tcalcitonin\nC:4\tmetformin\nC:5\tibuprofen");
        dicts[3].load_text("S:1\thuman\nS:2\tmouse\nS:3\trat\nS:4\tzebrafish");
        dicts[4].load_text("M:1\tV600E\nM:2\trs113488022\nM:3\tc.76A>T");

        std::vector<medkg::kernels::TaggedAbstract> serial, parallel;
        double s = run_ms([&] { serial = medkg::reference::tag_corpus(abstracts, dicts); });
        double p = run_ms([&] { parallel = medkg::kernels::tag_corpus(abstracts, dicts); });
        bool equal = serial.size() == parallel.size();
        for (std::size_t i = 0; equal && i < serial.size(); ++i)
            equal = serial[i].pmid == parallel[i].pmid && serial[i].spans.size() == parallel[i].spans.size();
        report("corpus tagging", s, p, equal);
    }

    // affiliation parsing
    {
        medkg::affilparse::AffiliationParser parser(medkg::affilparse::KeywordTables::defaults(),
                                                    medkg::affilparse::CountryTable::defaults());
        std::vector<medkg::affilparse::ParsedAffiliation> serial, parallel;
        double s = run_ms([&] { serial = medkg::reference::parse_affiliations(parser, affiliations, false); });
        double p = run_ms([&] { parallel = medkg::kernels::parse_affiliations(parser, affiliations, false); });
        bool equal = serial.size() == parallel.size();
        for (std::size_t i = 0; equal && i < serial.size(); ++i)
            equal = serial[i].institution == parallel[i].institution &&
                    serial[i].country == parallel[i].country;
        report("affiliation parsing", s, p, equal);
    }

    // bipartite projection on a random graph
    {
        std::mt19937_64 rng(7);
        std::vector<medkg::kgraph::AuthorOccurrence> authors;
        std::vector<medkg::kgraph::EntityOccurrence> entities;
        const std::size_t papers_n = papers;
        for (std::size_t pmid = 1; pmid <= papers_n; ++pmid) {
            for (int a = 0; a < 3; ++a)
                authors.push_back({1 + rng() % 800, pmid});
            for (int e = 0; e < 6; ++e)
                entities.push_back({"e" + std::to_string(rng() % 1200), pmid});
        }
        medkg::kgraph::BipartiteGraph graph = medkg::kgraph::build_bipartite(authors, entities);

        medkg::kgraph::ProjectedGraph serial, parallel;
        double s = run_ms([&] { serial = medkg::reference::project_graph(graph, medkg::kgraph::Side::Author); });
        double p = run_ms([&] { parallel = medkg::kernels::project_graph(graph, medkg::kgraph::Side::Author); });
        report("author projection", s, p, serial.edges == parallel.edges);
    }

    return 0;
}
