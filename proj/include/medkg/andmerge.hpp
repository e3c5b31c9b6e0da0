#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "medkg/ingest.hpp"

namespace medkg::andmerge {

using ingest::InstanceKey;
using ingest::SourceClustering;

// A secondary cluster that carried two or more distinct primary ids.
struct ConflictRecord {
    std::uint64_t secondary_cluster = 0;
    std::map<std::uint64_t, std::uint64_t> primary_id_counts;  // id -> instance count
    std::uint64_t resolution = 0;
    std::string rule;  // "majority" or "majority-tie-smallest"
};

struct UnifiedAssignment {
    // Covered instances only; and_id_for() maps everything else to 0.
    std::map<InstanceKey, std::uint64_t> and_id_of;
    std::uint64_t fresh_id_floor = 0;  // first fresh id handed out (0 = none)
    std::uint64_t max_primary_id = 0;
    std::vector<ConflictRecord> conflicts;

    // Per-instance counts, plus the number of fresh ids minted.
    std::uint64_t step1_instances = 0;  // kept their primary id
    std::uint64_t step2_instances = 0;  // labeled with a fresh id
    std::uint64_t step3_instances = 0;  // inherited a primary id via their cluster
    std::uint64_t fresh_ids_allocated = 0;

    std::uint64_t and_id_for(const InstanceKey& k) const {
        auto it = and_id_of.find(k);
        return it == and_id_of.end() ? 0 : it->second;
    }
    std::uint64_t and_id_for(std::uint64_t pmid, std::uint32_t au_order) const {
        return and_id_for(InstanceKey{pmid, au_order});
    }
};

// Reconciles two source clusterings into one id space:
//   1. every instance with a primary id keeps it;
//   2. secondary clusters disjoint from the primary source get fresh ids,
//      numbered from max(primary)+1 upward in ascending order of each
//      cluster's minimal (pmid, au_order) key;
//   3. in a secondary cluster that carries at least one primary id, the
//      unlabeled instances inherit it; with several distinct primary ids
//      the majority wins (tie -> smallest id) and a conflict is logged.
// Instances in neither source resolve to 0.
UnifiedAssignment merge_clusterings(const SourceClustering& primary,
                                    const SourceClustering& secondary);

struct MergeValidation {
    bool ok = true;
    std::vector<std::string> failures;
    std::uint64_t step1_instances = 0;
    std::uint64_t step2_instances = 0;
    std::uint64_t step3_instances = 0;
    std::uint64_t fresh_ids_allocated = 0;
};

// Re-derives the step counts from the sources and asserts the merge
// invariants (step-1 preservation, fresh-id freshness, cohesion).
MergeValidation validate_merge(const UnifiedAssignment& merged, const SourceClustering& primary,
                               const SourceClustering& secondary);

// unified TSV: pmid<TAB>au_order<TAB>and_id, ascending by key
std::string format_unified(const UnifiedAssignment& merged);
void write_unified(const std::string& path, const UnifiedAssignment& merged);

}  // namespace medkg::andmerge
