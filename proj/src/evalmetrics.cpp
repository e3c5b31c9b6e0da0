#include "medkg/evalmetrics.hpp"

#include <algorithm>

#include "medkg/errors.hpp"

namespace medkg::evalmetrics {

namespace {

// Shared core: group by `group_of`, count distinct articles per counterpart,
// take the modal counterpart's article count over the group's article count.
template <typename GroupKey, typename CounterKey>
MetricDetail modal_metric(const Crosswalk& xw, Averaging avg, GroupKey group_of,
                          CounterKey counter_of) {
    if (xw.empty()) throw Error("metric undefined on an empty crosswalk");

    using Group = decltype(group_of(*xw.begin()));
    using Counter = decltype(counter_of(*xw.begin()));

    struct Tally {
        std::map<Counter, std::set<std::uint64_t>> articles_by_counter;
        std::set<std::uint64_t> articles;
    };
    std::map<Group, Tally> groups;
    for (const CrosswalkTriple& t : xw) {
        Tally& g = groups[group_of(t)];
        g.articles_by_counter[counter_of(t)].insert(t.pmid);
        g.articles.insert(t.pmid);
    }

    MetricDetail out;
    double macro_sum = 0.0;
    for (const auto& [group, tally] : groups) {
        std::uint64_t modal = 0;
        bool tied = false;
        // std::map iterates counterparts in ascending order, so a strict `>`
        // keeps the smallest id on ties.
        for (const auto& [counter, pmids] : tally.articles_by_counter) {
            if (pmids.size() > modal) {
                modal = pmids.size();
                tied = false;
            } else if (pmids.size() == modal) {
                tied = true;
            }
        }
        if (tied) ++out.modal_ties;
        out.numerator += modal;
        out.denominator += tally.articles.size();
        macro_sum += static_cast<double>(modal) / static_cast<double>(tally.articles.size());
    }

    out.value = avg == Averaging::Micro
                    ? static_cast<double>(out.numerator) / static_cast<double>(out.denominator)
                    : macro_sum / static_cast<double>(groups.size());
    return out;
}

}  // namespace

MetricDetail precision(const Crosswalk& xw, Averaging avg) {
    return modal_metric(
        xw, avg, [](const CrosswalkTriple& t) { return t.and_id; },
        [](const CrosswalkTriple& t) { return t.pi_id; });
}

MetricDetail recall(const Crosswalk& xw, Averaging avg) {
    return modal_metric(
        xw, avg, [](const CrosswalkTriple& t) { return t.pi_id; },
        [](const CrosswalkTriple& t) { return t.and_id; });
}

double f1(double p, double r) {
    if (p + r <= 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

EvalReport evaluate(const Crosswalk& xw, Averaging avg) {
    EvalReport rep;
    rep.precision_detail = precision(xw, avg);
    rep.recall_detail = recall(xw, avg);
    rep.precision = rep.precision_detail.value;
    rep.recall = rep.recall_detail.value;
    rep.f1 = f1(rep.precision, rep.recall);
    return rep;
}

PairwiseResult pairwise_metrics(const Clustering& predicted, const Clustering& gold) {
    if (predicted.size() != gold.size())
        throw Error("pairwise metrics need identical instance sets");
    for (const auto& [inst, label] : predicted)
        if (!gold.contains(inst)) throw Error("pairwise metrics need identical instance sets");

    std::vector<std::uint64_t> instances;
    instances.reserve(predicted.size());
    for (const auto& [inst, label] : predicted) instances.push_back(inst);

    PairwiseResult r;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        for (std::size_t j = i + 1; j < instances.size(); ++j) {
            bool same_pred = predicted.at(instances[i]) == predicted.at(instances[j]);
            bool same_gold = gold.at(instances[i]) == gold.at(instances[j]);
            if (same_pred) ++r.predicted_pairs;
            if (same_gold) ++r.gold_pairs;
            if (same_pred && same_gold) ++r.shared_pairs;
        }
    }
    r.precision = r.predicted_pairs
                      ? static_cast<double>(r.shared_pairs) / static_cast<double>(r.predicted_pairs)
                      : 1.0;
    r.recall = r.gold_pairs
                   ? static_cast<double>(r.shared_pairs) / static_cast<double>(r.gold_pairs)
                   : 1.0;
    r.f1 = f1(r.precision, r.recall);
    return r;
}

}  // namespace medkg::evalmetrics
