#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "medkg/andmerge.hpp"
#include "testutil.hpp"

using namespace medkg;
using andmerge::merge_clusterings;
using andmerge::validate_merge;
using ingest::InstanceKey;
using ingest::SourceClustering;

namespace {

SourceClustering clustering(const char* name,
                            std::initializer_list<std::tuple<std::uint64_t, std::uint32_t, std::uint64_t>> rows) {
    SourceClustering c;
    c.source_name = name;
    for (const auto& [pmid, order, cluster] : rows) c.assignments[{pmid, order}] = cluster;
    return c;
}

}  // namespace

TEST_CASE("step 2: a secondary-only cluster gets one fresh id above the primary space") {
    // two instances, papers from 2012 and 2013, absent from the primary source
    auto primary = clustering("primary", {{900, 1, 17}});  // max primary id = 17
    auto secondary = clustering("secondary", {{2012001, 3, 55}, {2013001, 1, 55}});

    auto merged = merge_clusterings(primary, secondary);
    std::uint64_t a = merged.and_id_for(2012001, 3);
    std::uint64_t b = merged.and_id_for(2013001, 1);
    CHECK(a == b);
    CHECK(a == 18);  // max(primary) + 1
    CHECK(merged.fresh_id_floor == 18);
    CHECK(merged.step2_instances == 2);
    CHECK(merged.fresh_ids_allocated == 1);
}

TEST_CASE("step 3: the primary id spreads to unlabeled instances of the cluster") {
    // papers 2007 and 2009 carry primary id 42; the 2010 paper lacks one
    auto primary = clustering("primary", {{2007001, 1, 42}, {2009001, 2, 42}});
    auto secondary = clustering("secondary",
                                {{2007001, 1, 7}, {2009001, 2, 7}, {2010001, 1, 7}});

    auto merged = merge_clusterings(primary, secondary);
    CHECK(merged.and_id_for(2007001, 1) == 42);
    CHECK(merged.and_id_for(2009001, 2) == 42);
    CHECK(merged.and_id_for(2010001, 1) == 42);
    CHECK(merged.step3_instances == 1);
    CHECK(merged.conflicts.empty());
}

TEST_CASE("instances in neither source resolve to zero") {
    auto primary = clustering("primary", {{1, 1, 5}});
    auto secondary = clustering("secondary", {{2, 1, 9}});
    auto merged = merge_clusterings(primary, secondary);
    CHECK(merged.and_id_for(999, 4) == 0);
    CHECK(merged.and_id_for(1, 1) == 5);
}

TEST_CASE("conflicting primary ids: majority, tie to the smallest, logged") {
    // cluster {a, b, c}: primary(a) = 7, primary(b) = 9, c unlabeled
    auto primary = clustering("primary", {{10, 1, 7}, {11, 1, 9}});
    auto secondary = clustering("secondary", {{10, 1, 3}, {11, 1, 3}, {12, 1, 3}});

    auto merged = merge_clusterings(primary, secondary);
    CHECK(merged.and_id_for(10, 1) == 7);  // step 1 always wins
    CHECK(merged.and_id_for(11, 1) == 9);
    CHECK(merged.and_id_for(12, 1) == 7);  // tie 1-1 -> smaller id
    REQUIRE(merged.conflicts.size() == 1);
    CHECK(merged.conflicts[0].secondary_cluster == 3);
    CHECK(merged.conflicts[0].resolution == 7);
    CHECK(merged.conflicts[0].rule == "majority-tie-smallest");
    CHECK(merged.conflicts[0].primary_id_counts.size() == 2);

    // clear majority
    auto primary2 = clustering("primary", {{10, 1, 9}, {11, 1, 9}, {12, 1, 7}});
    auto secondary2 = clustering("secondary",
                                 {{10, 1, 3}, {11, 1, 3}, {12, 1, 3}, {13, 1, 3}});
    auto merged2 = merge_clusterings(primary2, secondary2);
    CHECK(merged2.and_id_for(13, 1) == 9);
    REQUIRE(merged2.conflicts.size() == 1);
    CHECK(merged2.conflicts[0].rule == "majority");
}

TEST_CASE("disjoint sources: one fresh id per secondary cluster") {
    auto primary = clustering("primary", {{1, 1, 4}, {2, 1, 4}});
    auto secondary = clustering("secondary", {{10, 1, 1}, {11, 1, 1}, {12, 1, 2}});
    auto merged = merge_clusterings(primary, secondary);
    CHECK(merged.fresh_ids_allocated == 2);
    CHECK(merged.step2_instances == 3);

    auto validation = validate_merge(merged, primary, secondary);
    CHECK(validation.ok);
    CHECK(validation.fresh_ids_allocated == 2);
}

TEST_CASE("empty sources merge to an empty assignment") {
    SourceClustering primary, secondary;
    auto merged = merge_clusterings(primary, secondary);
    CHECK(merged.and_id_of.empty());
    CHECK(merged.step1_instances == 0);
    CHECK(merged.step2_instances == 0);
    CHECK(merged.step3_instances == 0);
    auto validation = validate_merge(merged, primary, secondary);
    CHECK(validation.ok);
}

TEST_CASE("fresh ids are allocated by ascending minimal member key") {
    auto primary = clustering("primary", {{1, 1, 10}});
    // cluster 50's minimal key (2, 1) precedes cluster 8's minimal key (3, 1)
    auto secondary = clustering("secondary", {{3, 1, 8}, {2, 1, 50}, {4, 1, 50}});
    auto merged = merge_clusterings(primary, secondary);
    CHECK(merged.and_id_for(2, 1) == 11);
    CHECK(merged.and_id_for(4, 1) == 11);
    CHECK(merged.and_id_for(3, 1) == 12);
}

TEST_CASE("merge equals the naive three-rule oracle on random fixtures") {
    testutil::Rng rng(101);
    for (int iter = 0; iter < 80; ++iter) {
        auto sources = testutil::random_sources(rng, 200);
        auto merged = merge_clusterings(sources.primary, sources.secondary);
        auto expected = testutil::naive_merge(sources.primary, sources.secondary);
        CHECK(merged.and_id_of == expected);

        auto validation = validate_merge(merged, sources.primary, sources.secondary);
        CHECK(validation.ok);
        CHECK(validation.step1_instances == merged.step1_instances);
        CHECK(validation.step2_instances == merged.step2_instances);
        CHECK(validation.step3_instances == merged.step3_instances);
    }
}

TEST_CASE("determinism under input permutation") {
    testutil::Rng rng(55);
    auto sources = testutil::random_sources(rng, 120);
    auto merged = merge_clusterings(sources.primary, sources.secondary);

    // rebuild the sources with reversed insertion order
    SourceClustering primary2, secondary2;
    primary2.source_name = sources.primary.source_name;
    secondary2.source_name = sources.secondary.source_name;
    {
        std::vector<std::pair<InstanceKey, std::uint64_t>> rows(sources.primary.assignments.begin(),
                                                                sources.primary.assignments.end());
        std::reverse(rows.begin(), rows.end());
        for (const auto& [k, v] : rows) primary2.assignments.emplace(k, v);
        rows.assign(sources.secondary.assignments.begin(), sources.secondary.assignments.end());
        std::reverse(rows.begin(), rows.end());
        for (const auto& [k, v] : rows) secondary2.assignments.emplace(k, v);
    }
    auto merged2 = merge_clusterings(primary2, secondary2);
    CHECK(merged.and_id_of == merged2.and_id_of);
}

TEST_CASE("idempotence: folding the result back as primary changes nothing") {
    testutil::Rng rng(77);
    for (int iter = 0; iter < 20; ++iter) {
        auto sources = testutil::random_sources(rng, 100);
        auto merged = merge_clusterings(sources.primary, sources.secondary);

        SourceClustering unified_as_primary;
        unified_as_primary.source_name = "unified";
        for (const auto& [k, v] : merged.and_id_of) unified_as_primary.assignments[k] = v;

        auto again = merge_clusterings(unified_as_primary, sources.secondary);
        CHECK(again.and_id_of == merged.and_id_of);
    }
}

TEST_CASE("unified TSV format") {
    auto primary = clustering("primary", {{5, 2, 9}});
    auto secondary = clustering("secondary", {{6, 1, 4}});
    auto merged = merge_clusterings(primary, secondary);
    CHECK(andmerge::format_unified(merged) == "5\t2\t9\n6\t1\t10\n");
}
