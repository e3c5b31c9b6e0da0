#include "medkg/andmerge.hpp"

#include <algorithm>
#include <fstream>

#include "medkg/errors.hpp"

namespace medkg::andmerge {

UnifiedAssignment merge_clusterings(const SourceClustering& primary,
                                    const SourceClustering& secondary) {
    UnifiedAssignment out;

    for (const auto& [key, id] : primary.assignments)
        out.max_primary_id = std::max(out.max_primary_id, id);

    // Step 1: primary ids are authoritative.
    for (const auto& [key, id] : primary.assignments) {
        out.and_id_of[key] = id;
        ++out.step1_instances;
    }

    // Group the secondary source by cluster; keep member lists sorted so
    // every downstream choice is order-independent.
    std::map<std::uint64_t, std::vector<InstanceKey>> clusters;
    for (const auto& [key, cluster] : secondary.assignments) clusters[cluster].push_back(key);
    for (auto& [cluster, members] : clusters) std::sort(members.begin(), members.end());

    // Steps 2 and 3 per cluster.
    std::vector<std::uint64_t> fresh_clusters;  // ordered by minimal member key
    for (const auto& [cluster, members] : clusters) {
        std::map<std::uint64_t, std::uint64_t> primary_counts;
        for (const InstanceKey& k : members) {
            auto it = primary.assignments.find(k);
            if (it != primary.assignments.end()) ++primary_counts[it->second];
        }

        if (primary_counts.empty()) {
            fresh_clusters.push_back(cluster);
            continue;
        }

        // Step 3: majority primary id, ties to the smallest (std::map walks
        // ids ascending, so `>` keeps the smaller id on equal counts).
        std::uint64_t winner = 0, winner_count = 0;
        for (const auto& [id, count] : primary_counts) {
            if (count > winner_count) {
                winner = id;
                winner_count = count;
            }
        }
        if (primary_counts.size() > 1) {
            bool tied = false;
            for (const auto& [id, count] : primary_counts)
                if (id != winner && count == winner_count) tied = true;
            ConflictRecord c;
            c.secondary_cluster = cluster;
            c.primary_id_counts = primary_counts;
            c.resolution = winner;
            c.rule = tied ? "majority-tie-smallest" : "majority";
            out.conflicts.push_back(std::move(c));
        }
        for (const InstanceKey& k : members) {
            if (!out.and_id_of.contains(k)) {
                out.and_id_of[k] = winner;
                ++out.step3_instances;
            }
        }
    }

    // Step 2: fresh ids continue above the primary space, allocated in
    // ascending order of each cluster's minimal member key.
    std::sort(fresh_clusters.begin(), fresh_clusters.end(),
              [&](std::uint64_t a, std::uint64_t b) {
                  return clusters[a].front() < clusters[b].front();
              });
    std::uint64_t next_fresh = out.max_primary_id + 1;
    for (std::uint64_t cluster : fresh_clusters) {
        if (out.fresh_id_floor == 0) out.fresh_id_floor = next_fresh;
        for (const InstanceKey& k : clusters[cluster]) {
            out.and_id_of[k] = next_fresh;
            ++out.step2_instances;
        }
        ++next_fresh;
        ++out.fresh_ids_allocated;
    }

    return out;
}

MergeValidation validate_merge(const UnifiedAssignment& merged, const SourceClustering& primary,
                               const SourceClustering& secondary) {
    MergeValidation v;
    auto fail = [&](std::string msg) {
        v.ok = false;
        v.failures.push_back(std::move(msg));
    };

    std::uint64_t max_primary = 0;
    for (const auto& [key, id] : primary.assignments) max_primary = std::max(max_primary, id);

    // Step-1 preservation.
    for (const auto& [key, id] : primary.assignments) {
        ++v.step1_instances;
        if (merged.and_id_for(key) != id) {
            fail("instance " + std::to_string(key.pmid) + "/" + std::to_string(key.au_order) +
                 " lost its primary id");
        }
    }

    // Every key from either source must be present and nonzero.
    for (const auto& [key, id] : secondary.assignments) {
        if (merged.and_id_for(key) == 0)
            fail("secondary instance " + std::to_string(key.pmid) + "/" +
                 std::to_string(key.au_order) + " unassigned");
    }

    // Re-derive per-cluster expectations.
    std::map<std::uint64_t, std::vector<InstanceKey>> clusters;
    for (const auto& [key, cluster] : secondary.assignments) clusters[cluster].push_back(key);

    std::uint64_t min_fresh_seen = 0;
    for (const auto& [cluster, members] : clusters) {
        std::uint64_t labeled = 0;
        std::map<std::uint64_t, std::uint64_t> distinct;
        for (const InstanceKey& k : members) {
            auto it = primary.assignments.find(k);
            if (it != primary.assignments.end()) {
                ++labeled;
                ++distinct[it->second];
            }
        }
        if (labeled == 0) {
            ++v.fresh_ids_allocated;
            v.step2_instances += members.size();
            std::uint64_t id = merged.and_id_for(members.front());
            for (const InstanceKey& k : members) {
                std::uint64_t got = merged.and_id_for(k);
                if (got != id) fail("fresh cluster " + std::to_string(cluster) + " split");
                if (got <= max_primary)
                    fail("fresh id " + std::to_string(got) + " collides with primary space");
                if (min_fresh_seen == 0 || got < min_fresh_seen) min_fresh_seen = got;
            }
        } else {
            v.step3_instances += members.size() - labeled;
            if (distinct.size() == 1) {
                std::uint64_t expect = distinct.begin()->first;
                for (const InstanceKey& k : members)
                    if (merged.and_id_for(k) != expect)
                        fail("cohesion violated in cluster " + std::to_string(cluster));
            }
        }
    }

    if (v.fresh_ids_allocated > 0 && min_fresh_seen != max_primary + 1)
        fail("smallest fresh id is " + std::to_string(min_fresh_seen) + ", expected " +
             std::to_string(max_primary + 1));

    if (v.step1_instances != merged.step1_instances ||
        v.step2_instances != merged.step2_instances ||
        v.step3_instances != merged.step3_instances ||
        v.fresh_ids_allocated != merged.fresh_ids_allocated)
        fail("reported step counts disagree with revalidation");

    return v;
}

std::string format_unified(const UnifiedAssignment& merged) {
    std::string out;
    for (const auto& [key, id] : merged.and_id_of) {
        out += std::to_string(key.pmid);
        out.push_back('\t');
        out += std::to_string(key.au_order);
        out.push_back('\t');
        out += std::to_string(id);
        out.push_back('\n');
    }
    return out;
}

void write_unified(const std::string& path, const UnifiedAssignment& merged) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << format_unified(merged);
    if (!out) throw Error("write failed: " + path);
}

}  // namespace medkg::andmerge
