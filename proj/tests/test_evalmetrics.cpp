#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "medkg/errors.hpp"
#include "medkg/evalmetrics.hpp"
#include "testutil.hpp"

using namespace medkg;
using namespace medkg::evalmetrics;

namespace {

Crosswalk make_xw(std::initializer_list<std::tuple<std::uint64_t, const char*, std::uint64_t>> rows) {
    Crosswalk xw;
    for (const auto& [pmid, pi, and_id] : rows) xw.insert({pmid, pi, and_id});
    return xw;
}

}  // namespace

TEST_CASE("precision: modal investigator over all articles of an author id") {
    // author A: articles mapped to investigators {X, X, Y} -> 2/3
    auto xw = make_xw({{1, "X", 5}, {2, "X", 5}, {3, "Y", 5}});
    auto p = precision(xw);
    CHECK(p.numerator == 2);
    CHECK(p.denominator == 3);
    CHECK(p.value == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("recall: modal author over all articles of an investigator") {
    auto xw = make_xw({{1, "X", 1}, {2, "X", 1}, {3, "X", 1}, {4, "X", 2}});
    auto r = recall(xw);
    CHECK(r.value == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("perfect one-to-one mapping scores exactly 1.0") {
    auto xw = make_xw({{1, "X", 1}, {2, "X", 1}, {3, "Y", 2}, {4, "Z", 3}});
    auto rep = evaluate(xw);
    CHECK(rep.precision == 1.0);
    CHECK(rep.recall == 1.0);
    CHECK(rep.f1 == 1.0);
}

TEST_CASE("empty crosswalk is an error") {
    CHECK_THROWS_AS(precision({}), Error);
}

TEST_CASE("modal ties pick the smaller counterpart and are counted") {
    auto xw = make_xw({{1, "A", 9}, {2, "B", 9}});
    auto p = precision(xw);
    CHECK(p.numerator == 1);
    CHECK(p.modal_ties == 1);
}

TEST_CASE("random crosswalks match the brute-force oracle") {
    testutil::Rng rng(31);
    for (int iter = 0; iter < 60; ++iter) {
        auto xw = testutil::random_crosswalk(rng, 1000);
        CHECK(std::abs(precision(xw).value - testutil::brute_precision(xw)) < 1e-12);
        CHECK(std::abs(recall(xw).value - testutil::brute_recall(xw)) < 1e-12);
    }
}

TEST_CASE("published f1 identities") {
    CHECK(std::abs(f1(0.9943, 0.9692) - 0.9816) < 5e-4);
    CHECK(std::abs(f1(0.9624, 0.9766) - 0.9694) < 5e-4);
    CHECK(std::abs(f1(0.9862, 0.9756) - 0.9809) < 5e-4);
    CHECK(f1(1.0, 1.0) == 1.0);
    CHECK(f1(0.0, 0.0) == 0.0);
}

TEST_CASE("permutation invariance under bijective relabeling") {
    testutil::Rng rng(47);
    auto xw = testutil::random_crosswalk(rng, 300);
    Crosswalk relabeled;
    for (const auto& t : xw) relabeled.insert({t.pmid, "Q" + t.pi_id, t.and_id * 7 + 3});
    CHECK(precision(xw).value == doctest::Approx(precision(relabeled).value).epsilon(1e-12));
    CHECK(recall(xw).value == doctest::Approx(recall(relabeled).value).epsilon(1e-12));
}

TEST_CASE("splitting a perfect author id keeps precision, lowers recall") {
    auto perfect = make_xw({{1, "X", 1}, {2, "X", 1}, {3, "X", 1}, {4, "Y", 2}});
    auto base = evaluate(perfect);
    // split author 1's articles across two ids
    auto split = make_xw({{1, "X", 1}, {2, "X", 1}, {3, "X", 9}, {4, "Y", 2}});
    auto after = evaluate(split);
    CHECK(base.precision == 1.0);
    CHECK(after.precision == 1.0);
    CHECK(after.recall < base.recall);
}

TEST_CASE("lumping two investigators' articles lowers precision") {
    auto perfect = make_xw({{1, "X", 1}, {2, "X", 1}, {3, "Y", 2}});
    auto lumped = make_xw({{1, "X", 1}, {2, "X", 1}, {3, "Y", 1}});
    CHECK(evaluate(lumped).precision < evaluate(perfect).precision);
    CHECK(evaluate(perfect).precision == 1.0);
}

TEST_CASE("micro versus macro averaging") {
    // two authors: one perfect with 1 article, one 2/4
    auto xw = make_xw({{1, "A", 1}, {10, "B", 2}, {11, "B", 2}, {12, "C", 2}, {13, "D", 2}});
    auto micro = precision(xw, Averaging::Micro);
    auto macro = precision(xw, Averaging::Macro);
    CHECK(micro.value == doctest::Approx(3.0 / 5.0));
    CHECK(macro.value == doctest::Approx((1.0 + 0.5) / 2.0));
}

TEST_CASE("pairwise metrics") {
    Clustering gold = {{1, 1}, {2, 1}, {3, 2}, {4, 2}};

    SUBCASE("identical clusterings are perfect") {
        auto r = pairwise_metrics(gold, gold);
        CHECK(r.precision == 1.0);
        CHECK(r.recall == 1.0);
        CHECK(r.f1 == 1.0);
    }

    SUBCASE("merging two gold clusters of size 2: precision 2/6") {
        Clustering merged = {{1, 1}, {2, 1}, {3, 1}, {4, 1}};
        auto r = pairwise_metrics(merged, gold);
        CHECK(r.predicted_pairs == 6);
        CHECK(r.shared_pairs == 2);
        CHECK(r.precision == doctest::Approx(2.0 / 6.0));
        CHECK(r.recall == 1.0);
    }

    SUBCASE("all-singleton prediction: empty pair set counts as precision 1") {
        Clustering singletons = {{1, 1}, {2, 2}, {3, 3}, {4, 4}};
        auto r = pairwise_metrics(singletons, gold);
        CHECK(r.precision == 1.0);
        CHECK(r.recall == 0.0);
    }

    SUBCASE("mismatched instance sets are rejected") {
        Clustering other = {{1, 1}, {2, 1}};
        CHECK_THROWS_AS(pairwise_metrics(other, gold), Error);
    }
}

TEST_CASE("pairwise metrics equal explicit pair-set enumeration") {
    testutil::Rng rng(61);
    for (int iter = 0; iter < 200; ++iter) {
        std::size_t n = 2 + rng.below(11);  // at most 12 instances
        Clustering predicted, gold;
        for (std::uint64_t i = 0; i < n; ++i) {
            predicted[i] = rng.below(4);
            gold[i] = rng.below(4);
        }
        // oracle: build the same-cluster pair sets explicitly and intersect
        std::set<std::pair<std::uint64_t, std::uint64_t>> ppairs, gpairs, shared;
        for (std::uint64_t i = 0; i < n; ++i)
            for (std::uint64_t j = i + 1; j < n; ++j) {
                if (predicted[i] == predicted[j]) ppairs.insert({i, j});
                if (gold[i] == gold[j]) gpairs.insert({i, j});
            }
        for (const auto& p : ppairs)
            if (gpairs.contains(p)) shared.insert(p);

        auto r = pairwise_metrics(predicted, gold);
        CHECK(r.predicted_pairs == ppairs.size());
        CHECK(r.gold_pairs == gpairs.size());
        CHECK(r.shared_pairs == shared.size());
        double expected_p = ppairs.empty() ? 1.0 : double(shared.size()) / double(ppairs.size());
        double expected_r = gpairs.empty() ? 1.0 : double(shared.size()) / double(gpairs.size());
        CHECK(r.precision == doctest::Approx(expected_p).epsilon(1e-12));
        CHECK(r.recall == doctest::Approx(expected_r).epsilon(1e-12));
    }
}
