#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "medkg/andmerge.hpp"
#include "medkg/ingest.hpp"

namespace medkg::kgraph {

// --- output tables -----------------------------------------------------------

enum class ColType : std::uint8_t { Integer, Real, Text };

struct TableSchema {
    std::string name;  // also the output file stem
    std::vector<std::string> columns;
    std::vector<ColType> types;
};

enum class TableId : std::uint8_t {
    AuthorList,
    BioEntitiesMain,
    BioEntitiesMutation,
    Affiliations,
    ResearcherEmployment,
    ResearcherEducation,
    NihProjects,
};
inline constexpr std::size_t kTableCount = 7;

const TableSchema& table_schema(TableId id);
const std::vector<TableId>& all_tables();

// Absent values carry no bytes; integers and reals round-trip exactly
// (shortest-form decimal for reals).
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;
using CellRow = std::vector<Cell>;

std::string format_cell(const Cell& c);

// Header + rows, RFC-4180 style quoting, LF endings. A cell whose type
// does not fit its column raises an Error naming row and column.
std::string emit_table(const TableSchema& schema, const std::vector<CellRow>& rows);
void emit_table_file(const std::string& path, const TableSchema& schema,
                     const std::vector<CellRow>& rows);

// Parse back; empty cells become monostate, typed columns are parsed.
std::vector<CellRow> parse_table(std::string_view data, const TableSchema& schema);

// --- Author_List derivation ---------------------------------------------------

struct AuthorListRow {
    std::int64_t id = 0;
    std::uint64_t pmid = 0;
    std::uint64_t and_id = 0;  // 0 = undisambiguated; emitted as empty
    std::uint32_t au_order = 0;
    std::string last_name, fore_name, initials, suffix;
    std::uint32_t au_num = 0;  // coauthor count of the article
    std::optional<int> pub_year;
    std::optional<int> begin_year;  // min year over the author's articles
};

// AuNum = author-list length; BeginYear = min PubYear over the same AND_ID
// (empty when AND_ID is 0); id is the 1-based row number in (pmid, au_order)
// order.
std::vector<AuthorListRow> derive_author_list_fields(
    const std::vector<ingest::ArticleRecord>& articles,
    const std::vector<ingest::AuthorInstance>& authors, const andmerge::UnifiedAssignment& ids);

std::vector<CellRow> author_list_cells(const std::vector<AuthorListRow>& rows);

// --- bipartite author-entity network -----------------------------------------

enum class Side : std::uint8_t { Author, Entity };

struct VertexRef {
    Side side = Side::Author;
    std::uint32_t index = 0;
};

// Authors are AND_IDs; entities are namespaced ids ("disease:D001"). Edge
// weights count papers, not mentions. Author-author or entity-entity edges
// are rejected.
class BipartiteGraph {
public:
    std::uint32_t add_author(std::uint64_t and_id);
    std::uint32_t add_entity(const std::string& entity_key);

    void add_edge(VertexRef a, VertexRef b, std::uint32_t weight = 1);

    const std::vector<std::uint64_t>& authors() const { return authors_; }
    const std::vector<std::string>& entities() const { return entities_; }
    // (author index, entity index) -> weight
    const std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t>& edges() const {
        return edges_;
    }

    std::vector<std::vector<std::uint32_t>> author_adjacency() const;  // sorted entity indexes
    std::vector<std::vector<std::uint32_t>> entity_adjacency() const;  // sorted author indexes

private:
    std::vector<std::uint64_t> authors_;
    std::vector<std::string> entities_;
    std::map<std::uint64_t, std::uint32_t> author_index_;
    std::map<std::string, std::uint32_t> entity_index_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> edges_;
};

struct AuthorOccurrence {
    std::uint64_t and_id = 0;
    std::uint64_t pmid = 0;
};
struct EntityOccurrence {
    std::string entity_key;
    std::uint64_t pmid = 0;
};

// Weight(author, entity) = number of distinct papers where both occur.
// AND_ID 0 is excluded; every distinct author and entity becomes a vertex
// even if isolated.
BipartiteGraph build_bipartite(const std::vector<AuthorOccurrence>& author_occurrences,
                               const std::vector<EntityOccurrence>& entity_occurrences);

struct ProjectedEdge {
    std::uint32_t u = 0;  // vertex indexes into the chosen side, u < v
    std::uint32_t v = 0;
    std::uint32_t weight = 0;  // common-neighbor count

    auto operator<=>(const ProjectedEdge&) const = default;
};

struct ProjectedGraph {
    Side side = Side::Author;
    std::size_t vertex_count = 0;
    std::vector<ProjectedEdge> edges;  // sorted by (u, v)
};

// One-side projection; edge weight = |N(u) ∩ N(v)|. Parallel kernel; the
// serial reference lives in medkg::reference.
ProjectedGraph project(const BipartiteGraph& graph, Side side);

// edge-list CSV (source, target, weight) for either graph kind
std::string bipartite_edge_csv(const BipartiteGraph& g);
std::string projection_edge_csv(const BipartiteGraph& g, const ProjectedGraph& p);

}  // namespace medkg::kgraph
