#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace medkg::bioentity {

enum class EntityType : std::uint8_t { Gene = 0, Disease, Drug, Species, Mutation };
inline constexpr std::size_t kEntityTypeCount = 5;

// Resolution priority on score ties: the enum order above (Gene first).
std::string_view type_name(EntityType t);                    // "gene", "disease", ...
std::optional<EntityType> type_from_name(std::string_view);  // case-insensitive

// Per-token tag set. Order is the wire order of probability vectors.
enum class Tag : std::uint8_t { B = 0, I, O, X, Cls, Sep, Pad };
inline constexpr std::size_t kTagCount = 7;

// One sub-token with its 7-tag probability distribution and its code-point
// offsets into the abstract.
struct TaggedToken {
    std::string token_text;
    std::uint32_t begin = 0;  // code points, end exclusive
    std::uint32_t end = 0;
    std::array<double, kTagCount> probs{};

    Tag argmax() const;
    double argmax_prob() const;
};

struct EntitySpan {
    std::uint64_t pmid = 0;
    std::uint32_t begin = 0;  // code points into the abstract, end exclusive
    std::uint32_t end = 0;
    std::string mention;      // always the abstract substring [begin, end)
    EntityType type = EntityType::Gene;
    double score = 1.0;

    bool overlaps(const EntitySpan& o) const { return begin < o.end && o.begin < end; }
    auto key() const { return std::tuple(pmid, begin, end, type); }
};

struct DecodeStats {
    std::uint64_t orphan_inside_repairs = 0;  // I without a preceding B, opened anyway
};

// IOB2 + X decoding for one abstract and one entity type. A span opens at
// B, extends through I and X (WordPiece continuations fold into the word
// that opened them), and closes on anything else. Span score is the mean
// of member tokens' argmax probabilities.
std::vector<EntitySpan> decode_tag_sequence(const std::vector<TaggedToken>& tokens,
                                            EntityType type, const std::string& abstract_text,
                                            std::uint64_t pmid, DecodeStats* stats = nullptr);

struct OverlapResolution {
    std::vector<EntitySpan> kept;   // pairwise non-overlapping, sorted by (begin, end, type)
    std::uint64_t dropped = 0;
};

// Cross-type overlap resolution: the highest-scoring span in any conflict
// survives; ties break by type priority, then earlier start. Deterministic
// and input-order independent.
OverlapResolution resolve_type_overlaps(std::vector<EntitySpan> spans);

// Corpus-level overlap-rate bookkeeping (fraction of abstracts with at
// least one resolved overlap).
struct OverlapStats {
    std::uint64_t abstracts = 0;
    std::uint64_t abstracts_with_overlap = 0;

    void add(const OverlapResolution& r) {
        ++abstracts;
        if (r.dropped > 0) ++abstracts_with_overlap;
    }
    double rate() const {
        return abstracts ? static_cast<double>(abstracts_with_overlap) /
                               static_cast<double>(abstracts)
                         : 0.0;
    }
};

// --- dictionaries -----------------------------------------------------------

struct DictionaryStats {
    std::uint64_t id_count = 0;
    std::uint64_t name_count = 0;       // sum over ids of distinct names
    std::uint64_t name_collisions = 0;  // same folded name mapping to a second id

    // name_count / id_count; the integer identity avg * id_count == name_count
    // holds exactly because the average is derived, never stored.
    double avg_names_per_id() const {
        return id_count ? static_cast<double>(name_count) / static_cast<double>(id_count) : 0.0;
    }
};

class Dictionary {
public:
    Dictionary() = default;
    explicit Dictionary(EntityType type) : type_(type) {}

    EntityType type() const { return type_; }

    // TSV `id<TAB>name`; multiple loads union names per id. Empty id or
    // name is a ParseError naming the line.
    void load_file(const std::string& path);
    void load_text(std::string_view data, const std::string& origin = "<memory>");
    void add(std::string_view id, std::string_view name);

    // Case-folded, NFC-normalized exact lookup; nullopt when unknown.
    std::optional<std::string> lookup(std::string_view name) const;

    const std::map<std::string, std::set<std::string>>& id_to_names() const { return ids_; }
    DictionaryStats stats() const;
    std::size_t max_name_words() const { return max_name_words_; }

private:
    EntityType type_ = EntityType::Gene;
    std::map<std::string, std::set<std::string>> ids_;            // id -> raw names
    std::unordered_map<std::string, std::string> name_index_;     // folded name -> id
    std::uint64_t collisions_ = 0;
    std::size_t max_name_words_ = 1;
};

using DictionarySet = std::array<Dictionary, kEntityTypeCount>;

// Greedy longest dictionary match over word boundaries, one pass per type;
// every hit scores 1.0. Stand-in tagger for a real sequence model.
std::vector<EntitySpan> baseline_tag(const std::string& abstract_text, std::uint64_t pmid,
                                     const DictionarySet& dicts);

// normalize_mention: exact folded lookup; absent -> nullopt (rows without
// an id are expected downstream).
std::optional<std::string> normalize_mention(std::string_view mention, const Dictionary& dict);

// --- mutations --------------------------------------------------------------

enum class MutationType : std::uint8_t {
    DnaSubstitution,
    ProteinSubstitution,
    Frameshift,
    DbSnp,
    Other,
};

std::string_view mutation_type_name(MutationType t);

struct MutationNorm {
    MutationType type = MutationType::Other;
    std::string normalized_name;
};

// Canonicalizes the common mutation spellings:
//   V600E, Val600Glu, p.V600E      -> p.V600E   (protein substitution)
//   c.76A>T, g.12T>C               -> itself    (DNA substitution)
//   rs113488022                    -> rs...     (dbSNP)
//   p.K601fs, Val600fs             -> p.K601fs  (frameshift)
//   c.76delA / c.76_78dup / insT   -> itself    (other, recognized ops)
// Anything else -> nullopt.
std::optional<MutationNorm> normalize_mutation(std::string_view mention);

}  // namespace medkg::bioentity
