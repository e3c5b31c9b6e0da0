#include "medkg/kgraph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "medkg/csv.hpp"
#include "medkg/errors.hpp"
#include "medkg/kernels.hpp"

namespace medkg::kgraph {

namespace {

TableSchema make_schema(std::string name, std::vector<std::pair<std::string, ColType>> cols) {
    TableSchema s;
    s.name = std::move(name);
    for (auto& [col, type] : cols) {
        s.columns.push_back(std::move(col));
        s.types.push_back(type);
    }
    return s;
}

const ColType I = ColType::Integer;
const ColType R = ColType::Real;
const ColType T = ColType::Text;

}  // namespace

const TableSchema& table_schema(TableId id) {
    static const TableSchema schemas[kTableCount] = {
        make_schema("Author_List",
                    {{"id", I}, {"PMID", I}, {"AND_ID", I}, {"AuOrder", I}, {"LastName", T},
                     {"ForeName", T}, {"Initials", T}, {"Suffix", T}, {"AuNum", I},
                     {"PubYear", I}, {"BeginYear", I}}),
        make_schema("Bio_entities_Main",
                    {{"id", I}, {"PMID", I}, {"Start", I}, {"End", I}, {"Mention", T},
                     {"EntityID", T}, {"Type", T}}),
        make_schema("Bio_entities_Mutation",
                    {{"Main_id", I}, {"Mention", T}, {"MutationType", T}, {"NormalizedName", T}}),
        make_schema("Affiliations",
                    {{"id", I}, {"PMID", I}, {"AuOrder", I}, {"AND_ID", I},
                     {"AffiliationOrder", I}, {"Affiliation", T}, {"Department", T},
                     {"Institution", T}, {"Email", T}, {"ZipCode", T}, {"Location", T},
                     {"Country", T}, {"City", T}, {"State", T}, {"AffiliationType", T},
                     {"Latitude", R}, {"Longitude", R}, {"Fips", I}}),
        make_schema("Researcher_Employment",
                    {{"id", I}, {"AND_ID", I}, {"ORCID", T}, {"Department", T}, {"BeginYear", T},
                     {"Organization", T}, {"City", T}, {"Region", T}, {"Country", T},
                     {"Identifier", T}, {"IdSource", T}, {"EndYear", T}}),
        make_schema("Researcher_Education",
                    {{"id", I}, {"AND_ID", I}, {"ORCID", T}, {"BeginYear", T},
                     {"Organization", T}, {"City", T}, {"Region", T}, {"Country", T},
                     {"Identifier", T}, {"IdSource", T}, {"EndYear", T}, {"Role", T}}),
        make_schema("NIH_Projects",
                    {{"id", I}, {"AND_ID", I}, {"PI_ID", T}, {"PMID", I}, {"ProjectNumber", T},
                     {"subProjectNumber", T}, {"PI_Name", T}}),
    };
    return schemas[static_cast<std::size_t>(id)];
}

const std::vector<TableId>& all_tables() {
    static const std::vector<TableId> ids = {
        TableId::AuthorList,        TableId::BioEntitiesMain,      TableId::BioEntitiesMutation,
        TableId::Affiliations,      TableId::ResearcherEmployment, TableId::ResearcherEducation,
        TableId::NihProjects,
    };
    return ids;
}

std::string format_cell(const Cell& c) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const {
            char buf[64];
            auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
            return std::string(buf, p);
        }
        std::string operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, c);
}

namespace {

void check_cell(const TableSchema& schema, const Cell& c, std::size_t row, std::size_t col) {
    bool ok = true;
    switch (schema.types[col]) {
        case ColType::Integer:
            ok = std::holds_alternative<std::monostate>(c) || std::holds_alternative<std::int64_t>(c);
            break;
        case ColType::Real:
            ok = std::holds_alternative<std::monostate>(c) || std::holds_alternative<double>(c) ||
                 std::holds_alternative<std::int64_t>(c);
            break;
        case ColType::Text:
            ok = std::holds_alternative<std::monostate>(c) || std::holds_alternative<std::string>(c);
            break;
    }
    if (!ok)
        throw Error("table " + schema.name + ": row " + std::to_string(row + 1) + " column " +
                    schema.columns[col] + " has the wrong type");
}

}  // namespace

std::string emit_table(const TableSchema& schema, const std::vector<CellRow>& rows) {
    std::string out = csv::format_row(schema.columns);
    csv::Row fields(schema.columns.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != schema.columns.size())
            throw Error("table " + schema.name + ": row " + std::to_string(r + 1) + " has " +
                        std::to_string(rows[r].size()) + " cells, expected " +
                        std::to_string(schema.columns.size()));
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            check_cell(schema, rows[r][c], r, c);
            fields[c] = format_cell(rows[r][c]);
        }
        out += csv::format_row(fields);
    }
    return out;
}

void emit_table_file(const std::string& path, const TableSchema& schema,
                     const std::vector<CellRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << emit_table(schema, rows);
    if (!out) throw Error("write failed: " + path);
}

std::vector<CellRow> parse_table(std::string_view data, const TableSchema& schema) {
    std::vector<csv::Row> raw = csv::parse(data);
    if (raw.empty() || raw.front() != schema.columns)
        throw SchemaError("header does not match table " + schema.name);
    std::vector<CellRow> rows;
    rows.reserve(raw.size() - 1);
    for (std::size_t r = 1; r < raw.size(); ++r) {
        if (raw[r].size() != schema.columns.size())
            throw ParseError("row width mismatch in table " + schema.name, r + 1,
                             ParseError::Unit::LineNumber);
        CellRow row(raw[r].size());
        for (std::size_t c = 0; c < raw[r].size(); ++c) {
            const std::string& f = raw[r][c];
            if (f.empty()) {
                row[c] = std::monostate{};
                continue;
            }
            switch (schema.types[c]) {
                case ColType::Integer: {
                    std::int64_t v = 0;
                    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
                    if (ec != std::errc{} || p != f.data() + f.size())
                        throw ParseError("bad integer '" + f + "' in " + schema.name, r + 1,
                                         ParseError::Unit::LineNumber);
                    row[c] = v;
                    break;
                }
                case ColType::Real: {
                    double v = 0;
                    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
                    if (ec != std::errc{} || p != f.data() + f.size())
                        throw ParseError("bad real '" + f + "' in " + schema.name, r + 1,
                                         ParseError::Unit::LineNumber);
                    row[c] = v;
                    break;
                }
                case ColType::Text:
                    row[c] = f;
                    break;
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// --- Author_List ---------------------------------------------------------------

std::vector<AuthorListRow> derive_author_list_fields(
    const std::vector<ingest::ArticleRecord>& articles,
    const std::vector<ingest::AuthorInstance>& authors, const andmerge::UnifiedAssignment& ids) {
    std::map<std::uint64_t, const ingest::ArticleRecord*> article_by_pmid;
    for (const auto& a : articles) article_by_pmid[a.pmid] = &a;
    std::map<std::uint64_t, std::uint32_t> au_num;
    for (const auto& a : authors) ++au_num[a.pmid];

    // BeginYear: min PubYear over every instance sharing the AND_ID
    std::map<std::uint64_t, int> begin_year;
    for (const auto& a : authors) {
        std::uint64_t and_id = ids.and_id_for(a.pmid, a.au_order);
        if (and_id == 0) continue;
        auto art = article_by_pmid.find(a.pmid);
        if (art == article_by_pmid.end() || !art->second->pub_year) continue;
        auto [it, inserted] = begin_year.emplace(and_id, *art->second->pub_year);
        if (!inserted) it->second = std::min(it->second, *art->second->pub_year);
    }

    std::vector<const ingest::AuthorInstance*> ordered;
    ordered.reserve(authors.size());
    for (const auto& a : authors) ordered.push_back(&a);
    std::sort(ordered.begin(), ordered.end(),
              [](const ingest::AuthorInstance* x, const ingest::AuthorInstance* y) {
                  return std::pair(x->pmid, x->au_order) < std::pair(y->pmid, y->au_order);
              });

    std::vector<AuthorListRow> rows;
    rows.reserve(ordered.size());
    for (const ingest::AuthorInstance* a : ordered) {
        AuthorListRow row;
        row.id = static_cast<std::int64_t>(rows.size() + 1);
        row.pmid = a->pmid;
        row.and_id = ids.and_id_for(a->pmid, a->au_order);
        row.au_order = a->au_order;
        row.last_name = a->last_name;
        row.fore_name = a->fore_name;
        row.initials = a->initials;
        row.suffix = a->suffix;
        row.au_num = au_num[a->pmid];
        auto art = article_by_pmid.find(a->pmid);
        if (art != article_by_pmid.end()) row.pub_year = art->second->pub_year;
        if (row.and_id != 0) {
            auto by = begin_year.find(row.and_id);
            if (by != begin_year.end()) row.begin_year = by->second;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<CellRow> author_list_cells(const std::vector<AuthorListRow>& rows) {
    std::vector<CellRow> out;
    out.reserve(rows.size());
    auto text_or_empty = [](const std::string& s) -> Cell {
        if (s.empty()) return std::monostate{};
        return s;
    };
    for (const AuthorListRow& r : rows) {
        CellRow row;
        row.emplace_back(r.id);
        row.emplace_back(static_cast<std::int64_t>(r.pmid));
        row.emplace_back(r.and_id ? Cell(static_cast<std::int64_t>(r.and_id)) : Cell{});
        row.emplace_back(static_cast<std::int64_t>(r.au_order));
        row.emplace_back(text_or_empty(r.last_name));
        row.emplace_back(text_or_empty(r.fore_name));
        row.emplace_back(text_or_empty(r.initials));
        row.emplace_back(text_or_empty(r.suffix));
        row.emplace_back(static_cast<std::int64_t>(r.au_num));
        row.emplace_back(r.pub_year ? Cell(static_cast<std::int64_t>(*r.pub_year)) : Cell{});
        row.emplace_back(r.begin_year ? Cell(static_cast<std::int64_t>(*r.begin_year)) : Cell{});
        out.push_back(std::move(row));
    }
    return out;
}

// --- bipartite graph -----------------------------------------------------------

std::uint32_t BipartiteGraph::add_author(std::uint64_t and_id) {
    auto [it, inserted] = author_index_.emplace(and_id, static_cast<std::uint32_t>(authors_.size()));
    if (inserted) authors_.push_back(and_id);
    return it->second;
}

std::uint32_t BipartiteGraph::add_entity(const std::string& entity_key) {
    auto [it, inserted] = entity_index_.emplace(entity_key, static_cast<std::uint32_t>(entities_.size()));
    if (inserted) entities_.push_back(entity_key);
    return it->second;
}

void BipartiteGraph::add_edge(VertexRef a, VertexRef b, std::uint32_t weight) {
    if (a.side == b.side)
        throw Error("bipartite violation: edges must join an author and an entity");
    if (weight == 0) throw Error("edge weights must be positive");
    VertexRef author = a.side == Side::Author ? a : b;
    VertexRef entity = a.side == Side::Author ? b : a;
    if (author.index >= authors_.size() || entity.index >= entities_.size())
        throw Error("edge endpoint out of range");
    edges_[{author.index, entity.index}] += weight;
}

std::vector<std::vector<std::uint32_t>> BipartiteGraph::author_adjacency() const {
    std::vector<std::vector<std::uint32_t>> adj(authors_.size());
    for (const auto& [edge, weight] : edges_) adj[edge.first].push_back(edge.second);
    return adj;  // map iteration order keeps each list sorted
}

std::vector<std::vector<std::uint32_t>> BipartiteGraph::entity_adjacency() const {
    std::vector<std::vector<std::uint32_t>> adj(entities_.size());
    for (const auto& [edge, weight] : edges_) adj[edge.second].push_back(edge.first);
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
}

BipartiteGraph build_bipartite(const std::vector<AuthorOccurrence>& author_occurrences,
                               const std::vector<EntityOccurrence>& entity_occurrences) {
    // vertices first, sorted, so indexes are stable and deterministic
    std::set<std::uint64_t> author_ids;
    std::set<std::string> entity_keys;
    for (const auto& o : author_occurrences)
        if (o.and_id != 0) author_ids.insert(o.and_id);
    for (const auto& o : entity_occurrences) entity_keys.insert(o.entity_key);

    BipartiteGraph g;
    for (std::uint64_t id : author_ids) g.add_author(id);
    for (const std::string& key : entity_keys) g.add_entity(key);

    // per-paper distinct sets; weight counts papers, not mentions
    std::map<std::uint64_t, std::set<std::uint64_t>> authors_by_pmid;
    std::map<std::uint64_t, std::set<std::string>> entities_by_pmid;
    for (const auto& o : author_occurrences)
        if (o.and_id != 0) authors_by_pmid[o.pmid].insert(o.and_id);
    for (const auto& o : entity_occurrences) entities_by_pmid[o.pmid].insert(o.entity_key);

    for (const auto& [pmid, paper_authors] : authors_by_pmid) {
        auto ent = entities_by_pmid.find(pmid);
        if (ent == entities_by_pmid.end()) continue;
        for (std::uint64_t and_id : paper_authors) {
            VertexRef a{Side::Author, g.add_author(and_id)};
            for (const std::string& key : ent->second)
                g.add_edge(a, {Side::Entity, g.add_entity(key)});
        }
    }
    return g;
}

ProjectedGraph project(const BipartiteGraph& graph, Side side) {
    return kernels::project_graph(graph, side);
}

std::string bipartite_edge_csv(const BipartiteGraph& g) {
    std::string out = "source,target,weight\n";
    for (const auto& [edge, weight] : g.edges()) {
        out += csv::format_row({"author:" + std::to_string(g.authors()[edge.first]),
                                g.entities()[edge.second], std::to_string(weight)});
    }
    return out;
}

std::string projection_edge_csv(const BipartiteGraph& g, const ProjectedGraph& p) {
    auto label = [&](std::uint32_t idx) {
        return p.side == Side::Author ? "author:" + std::to_string(g.authors()[idx])
                                      : g.entities()[idx];
    };
    std::string out = "source,target,weight\n";
    for (const ProjectedEdge& e : p.edges)
        out += csv::format_row({label(e.u), label(e.v), std::to_string(e.weight)});
    return out;
}

}  // namespace medkg::kgraph
