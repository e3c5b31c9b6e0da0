#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "medkg/bioentity.hpp"
#include "medkg/errors.hpp"
#include "medkg/text.hpp"
#include "testutil.hpp"

using namespace medkg;
using namespace medkg::bioentity;

namespace {

TaggedToken token(std::uint32_t begin, std::uint32_t end, Tag tag, double p = 0.9) {
    TaggedToken t;
    t.begin = begin;
    t.end = end;
    for (std::size_t k = 0; k < kTagCount; ++k) t.probs[k] = (1.0 - p) / (kTagCount - 1);
    t.probs[static_cast<std::size_t>(tag)] = p;
    return t;
}

EntitySpan span(std::uint32_t begin, std::uint32_t end, EntityType type, double score,
                std::uint64_t pmid = 1) {
    EntitySpan s;
    s.pmid = pmid;
    s.begin = begin;
    s.end = end;
    s.type = type;
    s.score = score;
    return s;
}

std::set<std::pair<std::uint32_t, std::uint32_t>> bounds(const std::vector<EntitySpan>& spans) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> out;
    for (const auto& s : spans) out.insert({s.begin, s.end});
    return out;
}

DictionarySet make_dicts() {
    DictionarySet d = {
        Dictionary(EntityType::Gene),    Dictionary(EntityType::Disease),
        Dictionary(EntityType::Drug),    Dictionary(EntityType::Species),
        Dictionary(EntityType::Mutation),
    };
    return d;
}

}  // namespace

TEST_CASE("all-O tag sequence decodes to nothing") {
    std::string abstract_text = "nothing here";
    std::vector<TaggedToken> tokens = {token(0, 7, Tag::O), token(8, 12, Tag::O)};
    CHECK(decode_tag_sequence(tokens, EntityType::Gene, abstract_text, 1).empty());
}

TEST_CASE("WordPiece sub-tokens merge into one span") {
    // the whole word split into 7 pieces: B X X X X X X -> a single span
    std::string abstract_text = "Immunoglobulin levels";
    std::vector<TaggedToken> tokens = {
        token(0, 1, Tag::B),   token(1, 3, Tag::X),   token(3, 6, Tag::X), token(6, 7, Tag::X),
        token(7, 9, Tag::X),   token(9, 12, Tag::X),  token(12, 14, Tag::X),
        token(15, 21, Tag::O),
    };
    auto spans = decode_tag_sequence(tokens, EntityType::Gene, abstract_text, 1);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].begin == 0);
    CHECK(spans[0].end == 14);
    CHECK(spans[0].mention == "Immunoglobulin");
}

TEST_CASE("span score is the mean of member argmax probabilities") {
    std::string abstract_text = "ab cd";
    std::vector<TaggedToken> tokens = {token(0, 2, Tag::B, 0.8), token(3, 5, Tag::I, 0.6)};
    auto spans = decode_tag_sequence(tokens, EntityType::Drug, abstract_text, 1);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].score == doctest::Approx(0.7));
    CHECK(spans[0].mention == "ab cd");
}

TEST_CASE("orphan I opens a span and is counted") {
    std::string abstract_text = "ab cd";
    std::vector<TaggedToken> tokens = {token(0, 2, Tag::O), token(3, 5, Tag::I)};
    DecodeStats stats;
    auto spans = decode_tag_sequence(tokens, EntityType::Gene, abstract_text, 1, &stats);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].begin == 3);
    CHECK(stats.orphan_inside_repairs == 1);
}

TEST_CASE("structural tags close spans; X outside a span is inert") {
    std::string abstract_text = "ab cd ef";
    std::vector<TaggedToken> tokens = {
        token(0, 2, Tag::B), token(2, 3, Tag::Sep), token(3, 5, Tag::X), token(6, 8, Tag::B)};
    auto spans = decode_tag_sequence(tokens, EntityType::Gene, abstract_text, 1);
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].end == 2);
    CHECK(spans[1].begin == 6);
}

TEST_CASE("token offsets beyond the abstract raise an alignment error") {
    std::string abstract_text = "ab";
    std::vector<TaggedToken> tokens = {token(0, 5, Tag::B)};
    CHECK_THROWS_AS(decode_tag_sequence(tokens, EntityType::Gene, abstract_text, 1),
                    AlignmentError);
}

TEST_CASE("IOB2 encode-decode round trip on random span sets") {
    testutil::Rng rng(11);
    for (int iter = 0; iter < 250; ++iter) {
        auto tk = testutil::random_tokenization(rng, 1 + rng.below(40));
        auto spans = testutil::random_word_spans(rng, tk);
        auto tokens = testutil::encode_spans(tk.tokens, spans, rng);
        auto decoded = decode_tag_sequence(tokens, EntityType::Disease, tk.text, 1);
        std::set<std::pair<std::uint32_t, std::uint32_t>> expected(spans.begin(), spans.end());
        CHECK(bounds(decoded) == expected);
        for (const auto& s : decoded)
            CHECK(s.mention == text::cp_substr(tk.text, s.begin, s.end));
    }
}

TEST_CASE("single span survives resolution unchanged") {
    auto r = resolve_type_overlaps({span(3, 8, EntityType::Drug, 0.5)});
    REQUIRE(r.kept.size() == 1);
    CHECK(r.dropped == 0);
    CHECK(r.kept[0].begin == 3);
}

TEST_CASE("higher score wins across types; equals exhaustive pairwise choice") {
    auto disease = span(0, 5, EntityType::Disease, 0.9);
    auto gene = span(3, 8, EntityType::Gene, 0.7);
    auto r = resolve_type_overlaps({gene, disease});
    REQUIRE(r.kept.size() == 1);
    CHECK(r.kept[0].type == EntityType::Disease);
    CHECK(r.dropped == 1);

    // exhaustive oracle over the pairwise conflict: every keep/drop subset,
    // max total score subject to non-overlap
    double best = -1;
    std::vector<EntitySpan> pair = {gene, disease};
    int best_mask = 0;
    for (int mask = 0; mask < 4; ++mask) {
        double total = 0;
        bool feasible = true;
        std::vector<EntitySpan> chosen;
        for (int i = 0; i < 2; ++i)
            if (mask & (1 << i)) chosen.push_back(pair[i]);
        for (std::size_t i = 0; i < chosen.size(); ++i)
            for (std::size_t j = i + 1; j < chosen.size(); ++j)
                if (chosen[i].overlaps(chosen[j])) feasible = false;
        for (const auto& s : chosen) total += s.score;
        if (feasible && total > best) {
            best = total;
            best_mask = mask;
        }
    }
    CHECK(best_mask == 2);  // only the disease span
}

TEST_CASE("score ties break by type priority, then earlier start") {
    auto r = resolve_type_overlaps({span(0, 4, EntityType::Species, 1.0),
                                    span(2, 6, EntityType::Gene, 1.0)});
    REQUIRE(r.kept.size() == 1);
    CHECK(r.kept[0].type == EntityType::Gene);

    auto r2 = resolve_type_overlaps({span(2, 6, EntityType::Drug, 1.0),
                                     span(0, 4, EntityType::Drug, 1.0)});
    REQUIRE(r2.kept.size() == 1);
    CHECK(r2.kept[0].begin == 0);
}

TEST_CASE("overlap rate over a fixture of four abstracts") {
    OverlapStats stats;
    for (std::uint64_t pmid = 1; pmid <= 4; ++pmid) {
        std::vector<EntitySpan> spans = {span(0, 5, EntityType::Gene, 0.9, pmid)};
        if (pmid == 2) spans.push_back(span(3, 8, EntityType::Disease, 0.8, pmid));
        else spans.push_back(span(10, 14, EntityType::Disease, 0.8, pmid));
        stats.add(resolve_type_overlaps(std::move(spans)));
    }
    CHECK(stats.abstracts == 4);
    CHECK(stats.abstracts_with_overlap == 1);
    CHECK(stats.rate() == doctest::Approx(0.25));
}

TEST_CASE("resolution output never overlaps and ignores input order") {
    testutil::Rng rng(23);
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<EntitySpan> spans;
        std::size_t n = 1 + rng.below(12);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t b = static_cast<std::uint32_t>(rng.below(30));
            std::uint32_t e = b + 1 + static_cast<std::uint32_t>(rng.below(8));
            spans.push_back(span(b, e, static_cast<EntityType>(rng.below(5)),
                                 (1 + rng.below(10)) / 10.0));
        }
        auto sorted_result = resolve_type_overlaps(spans);
        for (std::size_t i = 0; i < sorted_result.kept.size(); ++i)
            for (std::size_t j = i + 1; j < sorted_result.kept.size(); ++j)
                CHECK(!sorted_result.kept[i].overlaps(sorted_result.kept[j]));

        std::shuffle(spans.begin(), spans.end(), rng.engine);
        auto shuffled_result = resolve_type_overlaps(spans);
        REQUIRE(shuffled_result.kept.size() == sorted_result.kept.size());
        for (std::size_t i = 0; i < shuffled_result.kept.size(); ++i) {
            CHECK(shuffled_result.kept[i].key() == sorted_result.kept[i].key());
        }
    }
}

TEST_CASE("baseline tagger: direct lookup at word boundaries") {
    auto dicts = make_dicts();
    dicts[static_cast<std::size_t>(EntityType::Drug)].add("C:1", "aspirin");
    auto spans = baseline_tag("aspirin reduces pain", 1, dicts);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].begin == 0);
    CHECK(spans[0].end == 7);
    CHECK(spans[0].mention == "aspirin");
    CHECK(spans[0].score == 1.0);
    CHECK(spans[0].type == EntityType::Drug);
}

TEST_CASE("baseline tagger prefers the longest match") {
    auto dicts = make_dicts();
    auto& gene = dicts[static_cast<std::size_t>(EntityType::Gene)];
    gene.add("G:1", "calcitonin");
    gene.add("G:2", "calcitonin gene-related peptide");
    auto spans = baseline_tag("elevated calcitonin gene-related peptide levels", 1, dicts);
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].mention == "calcitonin gene-related peptide");
}

TEST_CASE("baseline tagger: no match inside words, empty abstract is empty") {
    auto dicts = make_dicts();
    dicts[static_cast<std::size_t>(EntityType::Species)].add("S:1", "rat");
    CHECK(baseline_tag("operating theatre", 1, dicts).empty());
    CHECK(baseline_tag("", 1, dicts).empty());
    CHECK(baseline_tag("the rat ran", 1, dicts).size() == 1);
}

TEST_CASE("dictionary stats and the exact average identity") {
    Dictionary d(EntityType::Disease);
    d.load_text("D:1\tmigraine\nD:1\themicrania\nD:2\tasthma\n");
    auto stats = d.stats();
    CHECK(stats.id_count == 2);
    CHECK(stats.name_count == 3);
    CHECK(stats.avg_names_per_id() == doctest::Approx(1.5));
    // exact identity: the average is derived from the counts
    CHECK(static_cast<std::uint64_t>(stats.avg_names_per_id() * static_cast<double>(stats.id_count) + 0.5) ==
          stats.name_count);
}

TEST_CASE("merging dictionary files unions names per id") {
    Dictionary d(EntityType::Disease);
    d.load_text("D:1\tmigraine\nD:2\tasthma\n");
    d.load_text("D:1\tMigraine\nD:1\tsick headache\nD:3\tflu\n");
    auto stats = d.stats();
    CHECK(stats.id_count == 3);
    // D:1 has {migraine, Migraine, sick headache}: raw names union
    CHECK(d.id_to_names().at("D:1").size() == 3);
    CHECK(*d.lookup("MIGRAINE") == "D:1");
}

TEST_CASE("dictionary line errors") {
    Dictionary d(EntityType::Gene);
    CHECK_THROWS_AS(d.load_text("G:1\t\n"), ParseError);
    CHECK_THROWS_AS(d.load_text("\tname\n"), ParseError);
    CHECK_THROWS_AS(d.load_text("no tab here\n"), ParseError);
}

TEST_CASE("normalize_mention: case folding, absences") {
    Dictionary d(EntityType::Drug);
    d.add("C:9", "aspirin");
    CHECK(*normalize_mention("Aspirin", d) == "C:9");
    CHECK(*normalize_mention("ASPIRIN", d) == "C:9");
    CHECK(!normalize_mention("unknownium", d).has_value());
    CHECK(!normalize_mention("", d).has_value());
    // folding idempotence
    CHECK(normalize_mention("AsPiRiN", d) == normalize_mention(text::casefold("AsPiRiN"), d));
}

TEST_CASE("normalize_mutation grammar") {
    auto v600e = normalize_mutation("V600E");
    REQUIRE(v600e.has_value());
    CHECK(v600e->type == MutationType::ProteinSubstitution);
    CHECK(v600e->normalized_name == "p.V600E");

    auto three = normalize_mutation("Val600Glu");
    REQUIRE(three.has_value());
    CHECK(three->normalized_name == "p.V600E");

    auto prefixed = normalize_mutation("p.Val600Glu");
    REQUIRE(prefixed.has_value());
    CHECK(prefixed->normalized_name == "p.V600E");

    auto dna = normalize_mutation("c.76A>T");
    REQUIRE(dna.has_value());
    CHECK(dna->type == MutationType::DnaSubstitution);
    CHECK(dna->normalized_name == "c.76A>T");

    auto snp = normalize_mutation("rs113488022");
    REQUIRE(snp.has_value());
    CHECK(snp->type == MutationType::DbSnp);
    CHECK(snp->normalized_name == "rs113488022");

    auto fs = normalize_mutation("p.K601fs");
    REQUIRE(fs.has_value());
    CHECK(fs->type == MutationType::Frameshift);
    CHECK(fs->normalized_name == "p.K601fs");

    auto del = normalize_mutation("c.76delA");
    REQUIRE(del.has_value());
    CHECK(del->type == MutationType::Other);

    CHECK(!normalize_mutation("not a mutation").has_value());
    CHECK(!normalize_mutation("").has_value());
    CHECK(!normalize_mutation("X123").has_value());  // no alt residue
}
