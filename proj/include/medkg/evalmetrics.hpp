#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace medkg::evalmetrics {

// One matched (article, funded investigator, disambiguated author) triple.
struct CrosswalkTriple {
    std::uint64_t pmid = 0;
    std::string pi_id;
    std::uint64_t and_id = 0;

    auto operator<=>(const CrosswalkTriple&) const = default;
};

using Crosswalk = std::set<CrosswalkTriple>;

enum class Averaging { Micro, Macro };

struct MetricDetail {
    double value = 0.0;
    std::uint64_t numerator = 0;     // micro: summed modal article counts
    std::uint64_t denominator = 0;   // micro: summed article counts
    std::uint64_t modal_ties = 0;    // groups whose modal choice was a tie
};

// Precision: per author id, the article count of its modal investigator id
// over all its articles; micro-averaged (article-weighted) by default.
// Ties pick the smaller counterpart id and are counted.
MetricDetail precision(const Crosswalk& xw, Averaging avg = Averaging::Micro);

// Recall: the same with the two id roles swapped.
MetricDetail recall(const Crosswalk& xw, Averaging avg = Averaging::Micro);

// Harmonic mean; 0 when p + r == 0.
double f1(double p, double r);

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    MetricDetail precision_detail;
    MetricDetail recall_detail;
};

EvalReport evaluate(const Crosswalk& xw, Averaging avg = Averaging::Micro);

// --- pairwise clustering metrics (secondary oracle) -------------------------

// instance -> cluster label; both clusterings must cover the same instances.
using Clustering = std::map<std::uint64_t, std::uint64_t>;

struct PairwiseResult {
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
    std::uint64_t predicted_pairs = 0;
    std::uint64_t gold_pairs = 0;
    std::uint64_t shared_pairs = 0;
};

// Same-cluster pair precision/recall. An empty pair set on either side
// contributes a perfect score for that side (no wrong pairs).
PairwiseResult pairwise_metrics(const Clustering& predicted, const Clustering& gold);

}  // namespace medkg::evalmetrics
