#include <doctest.h>

#include <algorithm>
#include <set>

#include "swe2/attack.hpp"
#include "swe2/errors.hpp"

using namespace swe2;

namespace {

const std::string kDataDir = SWE2_DATA_DIR;

const ConfusionTable& confusion() {
    static ConfusionTable t = load_confusion_table(kDataDir + "/confusion.tsv");
    return t;
}

const EmbeddingTable& word_table() {
    static EmbeddingTable t = make_table(16, EmbeddingKind::Word);
    return t;
}

bool is_transposition(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return false;
    std::vector<std::size_t> diff;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) diff.push_back(i);
    return diff.size() == 2 && diff[1] == diff[0] + 1 && a[diff[0]] == b[diff[1]] &&
           a[diff[1]] == b[diff[0]];
}

bool is_single_deletion(const std::string& a, const std::string& b) {
    if (b.size() + 1 != a.size()) return false;
    for (std::size_t skip = 0; skip < a.size(); ++skip) {
        std::string cand = a.substr(0, skip) + a.substr(skip + 1);
        if (cand == b) return true;
    }
    return false;
}

bool is_single_substitution(const std::string& a, const std::string& b, const ConfusionTable& t) {
    if (a.size() != b.size()) return false;
    std::size_t diffs = 0, pos = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) {
            ++diffs;
            pos = i;
        }
    if (diffs != 1) return false;
    auto it = t.substitutes.find(a[pos]);
    if (it == t.substitutes.end()) return false;
    return std::count(it->second.begin(), it->second.end(), b[pos]) > 0;
}

}  // namespace

TEST_CASE("confusion table loads and rejects self-maps") {
    const ConfusionTable& t = confusion();
    CHECK(t.substitutes.count('a') == 1);
    CHECK(std::count(t.substitutes.at('a').begin(), t.substitutes.at('a').end(), '@') == 1);
}

TEST_CASE("bug_swap transposes an interior pair") {
    Rng rng(1);
    for (int k = 0; k < 200; ++k) {
        std::string out = bug_swap("limey", rng);
        CHECK(is_transposition("limey", out));
        CHECK(out != "limey");
        // length >= 4 protects the first and last characters.
        CHECK(out.front() == 'l');
        CHECK(out.back() == 'y');
    }
    // "liemy" is reachable.
    bool seen = false;
    Rng rng2(2);
    for (int k = 0; k < 50 && !seen; ++k) seen = bug_swap("limey", rng2) == "liemy";
    CHECK(seen);
}

TEST_CASE("bug_swap on short words may use edge positions") {
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        std::string out = bug_swap("abc", rng);
        CHECK(is_transposition("abc", out));
    }
    CHECK_THROWS_AS(bug_swap("a", rng), TooShort);
    // all-equal adjacent pairs leave no changing transposition.
    CHECK_THROWS_AS(bug_swap("aa", rng), NoEligibleChar);
}

TEST_CASE("bug_delete removes exactly one character") {
    Rng rng(4);
    for (int k = 0; k < 200; ++k) {
        std::string out = bug_delete("wigger", rng);
        CHECK(is_single_deletion("wigger", out));
    }
    bool seen = false;
    Rng rng2(5);
    for (int k = 0; k < 50 && !seen; ++k) seen = bug_delete("wigger", rng2) == "wiger";
    CHECK(seen);
    CHECK(bug_delete("coonass", rng) != "coonass");
    CHECK_THROWS_AS(bug_delete("a", rng), TooShort);
}

TEST_CASE("bug_subc applies one confusion substitution") {
    Rng rng(6);
    for (int k = 0; k < 200; ++k) {
        std::string out = bug_subc("trash", confusion(), rng);
        CHECK(is_single_substitution("trash", out, confusion()));
    }
    bool seen = false;
    Rng rng2(7);
    for (int k = 0; k < 50 && !seen; ++k) seen = bug_subc("trash", confusion(), rng2) == "tr@sh";
    CHECK(seen);
    CHECK_THROWS_AS(bug_subc("xxx", confusion(), rng), NoEligibleChar);
}

TEST_CASE("select_victim prefers exact lexicon hits") {
    HateLexicon hlex;
    hlex.words = {"limey"};
    Rng rng(8);
    CHECK(select_victim({"you", "limey", "fool"}, hlex, rng) == 1);
    // near-match within char_difference 2
    CHECK(select_victim({"you", "limey", "fool"}, hlex, rng) == 1);
    CHECK(select_victim({"you", "limy", "fool"}, hlex, rng) == 1);
}

TEST_CASE("select_victim never picks sentinels") {
    HateLexicon hlex;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed);
        CHECK(select_victim({"USER", "hello", "URL"}, hlex, rng) == 1);
    }
}

TEST_CASE("attack_message chooses the distance argmax") {
    HateLexicon hlex;
    hlex.words = {"limey", "wigger", "coonass", "trash"};
    SentenceEncoder enc = mean_vector_encoder(word_table());
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Rng rng(seed);
        TokenSeq msg = {"you", "dirty", "limey", "go", "home"};
        auto [attacked, plan] = attack_message(msg, hlex, confusion(), enc, rng);
        REQUIRE(plan.applied());
        CHECK(plan.victim_index == 2);
        CHECK(plan.original_word == "limey");
        REQUIRE(!plan.candidates.empty());

        // Method contracts hold for every candidate.
        Eigen::VectorXd base = enc(msg);
        int best = 0;
        for (int i = 0; i < static_cast<int>(plan.candidates.size()); ++i) {
            const AttackCandidate& c = plan.candidates[i];
            switch (c.method) {
                case AttackMethod::Swap: CHECK(is_transposition("limey", c.word)); break;
                case AttackMethod::Delete: CHECK(is_single_deletion("limey", c.word)); break;
                case AttackMethod::SubC:
                    CHECK(is_single_substitution("limey", c.word, confusion()));
                    break;
            }
            TokenSeq mutated = msg;
            mutated[2] = c.word;
            double dist = 1.0 - base.dot(enc(mutated));
            CHECK(c.distance == doctest::Approx(dist).epsilon(1e-12));
            // strict > keeps the earliest max; candidate order fixes ties.
            if (c.distance > plan.candidates[best].distance) best = i;
        }
        CHECK(plan.chosen == best);
        CHECK(plan.distance == doctest::Approx(plan.candidates[best].distance));
        CHECK(attacked[2] == plan.candidates[best].word);

        // untouched tokens are preserved
        for (std::size_t i = 0; i < msg.size(); ++i)
            if (i != 2) CHECK(attacked[i] == msg[i]);
    }
}

TEST_CASE("attack_message leaves the message alone when no method applies") {
    HateLexicon hlex;
    ConfusionTable empty_table;
    SentenceEncoder enc = mean_vector_encoder(word_table());
    Rng rng(1);
    // single one-letter token: swap/delete throw, no substitution rows.
    auto [attacked, plan] = attack_message({"a"}, hlex, empty_table, enc, rng);
    CHECK(attacked == TokenSeq{"a"});
    CHECK(!plan.applied());
}

TEST_CASE("attack_message is deterministic given a seed") {
    HateLexicon hlex;
    hlex.words = {"trash"};
    SentenceEncoder enc = mean_vector_encoder(word_table());
    TokenSeq msg = {"this", "is", "trash", "talk"};
    Rng a(99), b(99);
    auto ra = attack_message(msg, hlex, confusion(), enc, a);
    auto rb = attack_message(msg, hlex, confusion(), enc, b);
    CHECK(ra.first == rb.first);
    CHECK(ra.second.chosen == rb.second.chosen);
}

TEST_CASE("attack_dataset manipulates floor(ratio * n) rows per class") {
    HateLexicon hlex;
    hlex.words = {"limey"};
    SentenceEncoder enc = mean_vector_encoder(word_table());
    std::vector<LabeledRow> rows;
    for (int i = 0; i < 10; ++i) rows.push_back({"nice sunny day number " + std::to_string(i), 0});
    for (int i = 0; i < 7; ++i) rows.push_back({"you limey fool " + std::to_string(i), 1});

    auto count_attacked = [](const std::vector<AttackedRow>& out, int label) {
        std::size_t n = 0;
        for (const auto& r : out)
            if (r.row.label == label && r.plan.has_value()) ++n;
        return n;
    };

    auto half = attack_dataset(rows, 0.5, hlex, confusion(), enc, 11);
    REQUIRE(half.size() == rows.size());
    CHECK(count_attacked(half, 0) == 5);
    CHECK(count_attacked(half, 1) == 3);

    auto none = attack_dataset(rows, 0.0, hlex, confusion(), enc, 11);
    CHECK(count_attacked(none, 0) == 0);
    CHECK(count_attacked(none, 1) == 0);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(none[i].row.label == rows[i].label);

    auto all = attack_dataset(rows, 1.0, hlex, confusion(), enc, 11);
    CHECK(count_attacked(all, 0) == 10);
    CHECK(count_attacked(all, 1) == 7);

    // labels survive, order preserved
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(all[i].row.label == rows[i].label);

    // determinism
    auto again = attack_dataset(rows, 0.5, hlex, confusion(), enc, 11);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(again[i].row.text == half[i].row.text);
        CHECK(again[i].plan.has_value() == half[i].plan.has_value());
    }
}
