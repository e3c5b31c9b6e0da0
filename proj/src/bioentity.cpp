#include "medkg/bioentity.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "medkg/errors.hpp"
#include "medkg/text.hpp"

namespace medkg::bioentity {

std::string_view type_name(EntityType t) {
    switch (t) {
        case EntityType::Gene: return "gene";
        case EntityType::Disease: return "disease";
        case EntityType::Drug: return "drug";
        case EntityType::Species: return "species";
        case EntityType::Mutation: return "mutation";
    }
    return "gene";
}

std::optional<EntityType> type_from_name(std::string_view s) {
    std::string l = text::lower_ascii(s);
    if (l == "gene") return EntityType::Gene;
    if (l == "disease") return EntityType::Disease;
    if (l == "drug") return EntityType::Drug;
    if (l == "species") return EntityType::Species;
    if (l == "mutation") return EntityType::Mutation;
    return std::nullopt;
}

Tag TaggedToken::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < kTagCount; ++i)
        if (probs[i] > probs[best]) best = i;  // ties keep the lowest index
    return static_cast<Tag>(best);
}

double TaggedToken::argmax_prob() const {
    return probs[static_cast<std::size_t>(argmax())];
}

std::vector<EntitySpan> decode_tag_sequence(const std::vector<TaggedToken>& tokens,
                                            EntityType type, const std::string& abstract_text,
                                            std::uint64_t pmid, DecodeStats* stats) {
    const std::size_t abstract_cps = text::cp_length(abstract_text);
    text::CpIndex index(abstract_text);

    std::vector<EntitySpan> spans;
    bool open = false;
    std::uint32_t span_begin = 0, span_end = 0;
    double prob_sum = 0;
    std::size_t member_count = 0;

    auto close = [&] {
        if (!open) return;
        EntitySpan s;
        s.pmid = pmid;
        s.begin = span_begin;
        s.end = span_end;
        s.type = type;
        s.score = member_count ? prob_sum / static_cast<double>(member_count) : 0.0;
        s.mention = std::string(index.slice(abstract_text, s.begin, s.end));
        spans.push_back(std::move(s));
        open = false;
    };

    for (const TaggedToken& tok : tokens) {
        if (tok.begin > tok.end || tok.end > abstract_cps)
            throw AlignmentError("token '" + tok.token_text + "' offsets [" +
                                 std::to_string(tok.begin) + ", " + std::to_string(tok.end) +
                                 ") exceed abstract length " + std::to_string(abstract_cps));
        Tag tag = tok.argmax();
        switch (tag) {
            case Tag::B:
                close();
                open = true;
                span_begin = tok.begin;
                span_end = tok.end;
                prob_sum = tok.argmax_prob();
                member_count = 1;
                break;
            case Tag::I:
                if (!open) {
                    // orphan inside tag: repair by opening a fresh span
                    if (stats) ++stats->orphan_inside_repairs;
                    open = true;
                    span_begin = tok.begin;
                    span_end = tok.end;
                    prob_sum = tok.argmax_prob();
                    member_count = 1;
                } else {
                    span_end = tok.end;
                    prob_sum += tok.argmax_prob();
                    ++member_count;
                }
                break;
            case Tag::X:
                // WordPiece continuation: folds into whatever span its word
                // belongs to; outside a span it is inert.
                if (open) {
                    span_end = tok.end;
                    prob_sum += tok.argmax_prob();
                    ++member_count;
                }
                break;
            case Tag::O:
            case Tag::Cls:
            case Tag::Sep:
            case Tag::Pad:
                close();
                break;
        }
    }
    close();
    return spans;
}

OverlapResolution resolve_type_overlaps(std::vector<EntitySpan> spans) {
    // Total deterministic order: score desc, then type priority, then
    // earlier start, then the remaining fields. Shuffling the input cannot
    // change the outcome.
    std::sort(spans.begin(), spans.end(), [](const EntitySpan& a, const EntitySpan& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.type != b.type) return a.type < b.type;
        if (a.begin != b.begin) return a.begin < b.begin;
        if (a.end != b.end) return a.end < b.end;
        return a.pmid < b.pmid;
    });

    OverlapResolution out;
    for (const EntitySpan& s : spans) {
        bool conflicts = false;
        for (const EntitySpan& kept : out.kept) {
            if (kept.pmid == s.pmid && kept.overlaps(s)) {
                conflicts = true;
                break;
            }
        }
        if (conflicts) {
            ++out.dropped;
        } else {
            out.kept.push_back(s);
        }
    }
    std::sort(out.kept.begin(), out.kept.end(),
              [](const EntitySpan& a, const EntitySpan& b) { return a.key() < b.key(); });
    return out;
}

// --- dictionaries -----------------------------------------------------------

namespace {

std::size_t count_words(std::string_view s) {
    std::size_t words = 0;
    bool in_word = false;
    for (char c : s) {
        bool w = !(c == ' ' || c == '\t');
        if (w && !in_word) ++words;
        in_word = w;
    }
    return words;
}

}  // namespace

void Dictionary::add(std::string_view id, std::string_view name) {
    std::string id_s(text::trim(id));
    std::string name_s(text::trim(name));
    if (id_s.empty() || name_s.empty()) throw Error("dictionary entry needs id and name");
    ids_[id_s].insert(name_s);
    std::string key = text::fold_key(name_s);
    auto [it, inserted] = name_index_.emplace(std::move(key), id_s);
    if (!inserted && it->second != id_s) ++collisions_;  // first id wins
    max_name_words_ = std::max(max_name_words_, count_words(name_s));
}

void Dictionary::load_text(std::string_view data, const std::string& origin) {
    std::uint64_t line_no = 0;
    std::size_t pos = 0;
    while (pos < data.size()) {
        std::size_t eol = data.find('\n', pos);
        std::string_view line =
            data.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? data.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw ParseError("dictionary line needs id<TAB>name in " + origin, line_no,
                             ParseError::Unit::LineNumber);
        std::string_view id = text::trim(line.substr(0, tab));
        std::string_view name = text::trim(line.substr(tab + 1));
        if (id.empty() || name.empty())
            throw ParseError("empty id or name in " + origin, line_no,
                             ParseError::Unit::LineNumber);
        add(id, name);
    }
}

void Dictionary::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open dictionary: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    load_text(buf.str(), path);
}

std::optional<std::string> Dictionary::lookup(std::string_view name) const {
    if (name.empty()) return std::nullopt;
    auto it = name_index_.find(text::fold_key(name));
    if (it == name_index_.end()) return std::nullopt;
    return it->second;
}

DictionaryStats Dictionary::stats() const {
    DictionaryStats s;
    s.id_count = ids_.size();
    for (const auto& [id, names] : ids_) s.name_count += names.size();
    s.name_collisions = collisions_;
    return s;
}

std::optional<std::string> normalize_mention(std::string_view mention, const Dictionary& dict) {
    return dict.lookup(mention);
}

// --- baseline tagger --------------------------------------------------------

namespace {

struct Word {
    std::uint32_t begin_cp;
    std::uint32_t end_cp;
};

// Maximal runs of word code points (letters, digits, marks).
std::vector<Word> split_words(const std::string& s) {
    std::vector<Word> words;
    std::size_t i = 0;
    std::uint32_t cp_pos = 0;
    bool in_word = false;
    while (i < s.size()) {
        char32_t cp = text::decode_cp(s, i);
        bool w = text::is_word_cp(cp);
        if (w && !in_word) words.push_back({cp_pos, cp_pos + 1});
        else if (w) words.back().end_cp = cp_pos + 1;
        in_word = w;
        ++cp_pos;
    }
    return words;
}

}  // namespace

std::vector<EntitySpan> baseline_tag(const std::string& abstract_text, std::uint64_t pmid,
                                     const DictionarySet& dicts) {
    std::vector<EntitySpan> all;
    if (abstract_text.empty()) return all;

    const std::vector<Word> words = split_words(abstract_text);
    if (words.empty()) return all;
    text::CpIndex index(abstract_text);

    for (const Dictionary& dict : dicts) {
        if (dict.id_to_names().empty()) continue;
        const std::size_t max_words = dict.max_name_words();
        std::size_t i = 0;
        while (i < words.size()) {
            std::size_t matched = 0;
            std::size_t limit = std::min(max_words, words.size() - i);
            for (std::size_t len = limit; len >= 1; --len) {  // longest match first
                std::string_view candidate =
                    index.slice(abstract_text, words[i].begin_cp, words[i + len - 1].end_cp);
                if (dict.lookup(candidate)) {
                    EntitySpan s;
                    s.pmid = pmid;
                    s.begin = words[i].begin_cp;
                    s.end = words[i + len - 1].end_cp;
                    s.mention = std::string(candidate);
                    s.type = dict.type();
                    s.score = 1.0;
                    all.push_back(std::move(s));
                    matched = len;
                    break;
                }
            }
            i += matched ? matched : 1;
        }
    }
    return all;
}

// --- mutations --------------------------------------------------------------

namespace {

// standard one-letter amino acid codes
constexpr std::string_view kAminoLetters = "ACDEFGHIKLMNPQRSTVWY";

bool is_amino_letter(char c) {
    return kAminoLetters.find(static_cast<char>(std::toupper(static_cast<unsigned char>(c)))) !=
           std::string_view::npos;
}

// three-letter -> one-letter
std::optional<char> amino_from_three(std::string_view s) {
    static const std::pair<std::string_view, char> table[] = {
        {"ala", 'A'}, {"arg", 'R'}, {"asn", 'N'}, {"asp", 'D'}, {"cys", 'C'},
        {"gln", 'Q'}, {"glu", 'E'}, {"gly", 'G'}, {"his", 'H'}, {"ile", 'I'},
        {"leu", 'L'}, {"lys", 'K'}, {"met", 'M'}, {"phe", 'F'}, {"pro", 'P'},
        {"ser", 'S'}, {"thr", 'T'}, {"trp", 'W'}, {"tyr", 'Y'}, {"val", 'V'},
    };
    if (s.size() != 3) return std::nullopt;
    std::string l = text::lower_ascii(s);
    for (const auto& [code, letter] : table)
        if (l == code) return letter;
    return std::nullopt;
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

// Residue spec: one-letter or three-letter amino acid code. Returns the
// one-letter form and the consumed length.
std::optional<std::pair<char, std::size_t>> take_amino(std::string_view s) {
    if (s.size() >= 3) {
        if (auto a = amino_from_three(s.substr(0, 3))) return std::pair{*a, std::size_t{3}};
    }
    if (!s.empty() && is_amino_letter(s[0]) &&
        s[0] == std::toupper(static_cast<unsigned char>(s[0])))
        return std::pair{s[0], std::size_t{1}};
    return std::nullopt;
}

}  // namespace

std::string_view mutation_type_name(MutationType t) {
    switch (t) {
        case MutationType::DnaSubstitution: return "DNASubstitution";
        case MutationType::ProteinSubstitution: return "ProteinSubstitution";
        case MutationType::Frameshift: return "Frameshift";
        case MutationType::DbSnp: return "DbSNP";
        case MutationType::Other: return "Other";
    }
    return "Other";
}

std::optional<MutationNorm> normalize_mutation(std::string_view mention) {
    std::string_view m = text::trim(mention);
    if (m.empty()) return std::nullopt;

    // dbSNP identifier
    if (m.size() > 2 && (m[0] == 'r' || m[0] == 'R') && (m[1] == 's' || m[1] == 'S') &&
        all_digits(m.substr(2))) {
        return MutationNorm{MutationType::DbSnp, "rs" + std::string(m.substr(2))};
    }

    // DNA-level HGVS-like strings: c.76A>T, g.12T>C, plus del/ins/dup forms
    if (m.size() > 2 && (m[0] == 'c' || m[0] == 'g') && m[1] == '.') {
        std::string_view body = m.substr(2);
        std::size_t d = 0;
        while (d < body.size() &&
               (std::isdigit(static_cast<unsigned char>(body[d])) || body[d] == '_'))
            ++d;
        if (d == 0) return std::nullopt;
        std::string_view rest = body.substr(d);
        if (rest.size() == 3 && rest[1] == '>' && std::string_view("ACGT").find(rest[0]) != std::string_view::npos &&
            std::string_view("ACGT").find(rest[2]) != std::string_view::npos) {
            return MutationNorm{MutationType::DnaSubstitution,
                                std::string(1, m[0]) + "." + std::string(body)};
        }
        std::string rl = text::lower_ascii(rest);
        if (rl.rfind("del", 0) == 0 || rl.rfind("ins", 0) == 0 || rl.rfind("dup", 0) == 0) {
            return MutationNorm{MutationType::Other, std::string(m)};
        }
        return std::nullopt;
    }

    // protein-level: optional "p." prefix, residue, position, then residue
    // (substitution) or "fs" (frameshift)
    std::string_view body = m;
    if (body.size() > 2 && (body[0] == 'p' || body[0] == 'P') && body[1] == '.')
        body = body.substr(2);
    auto ref = take_amino(body);
    if (!ref) return std::nullopt;
    body = body.substr(ref->second);
    std::size_t d = 0;
    while (d < body.size() && std::isdigit(static_cast<unsigned char>(body[d]))) ++d;
    if (d == 0) return std::nullopt;
    std::string position(body.substr(0, d));
    body = body.substr(d);
    if (body.size() == 2 && text::lower_ascii(body) == "fs") {
        return MutationNorm{MutationType::Frameshift,
                            std::string("p.") + ref->first + position + "fs"};
    }
    auto alt = take_amino(body);
    if (alt && alt->second == body.size()) {
        return MutationNorm{MutationType::ProteinSubstitution,
                            std::string("p.") + ref->first + position + alt->first};
    }
    return std::nullopt;
}

}  // namespace medkg::bioentity
