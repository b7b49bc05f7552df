#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swe2/embeddings.hpp"
#include "swe2/rng.hpp"
#include "swe2/targetword.hpp"
#include "swe2/textnorm.hpp"

namespace swe2 {

// character -> visually similar single-character substitutes.
struct ConfusionTable {
    std::map<char, std::vector<char>> substitutes;
};

ConfusionTable load_confusion_table(const std::string& path);

enum class AttackMethod { Swap, Delete, SubC };

const char* attack_method_name(AttackMethod m);

struct AttackCandidate {
    AttackMethod method;
    std::string word;
    double distance = 0.0;  // 1 - cosine similarity vs. the original message
};

struct AttackPlan {
    std::size_t victim_index = 0;
    std::string original_word;
    std::vector<AttackCandidate> candidates;
    int chosen = -1;  // index into candidates; -1 when nothing was applicable
    double distance = 0.0;

    bool applied() const { return chosen >= 0; }
};

// Fixed-length message encoding used to score candidates. The default is
// the unit-normalized mean of word vectors; any sentence encoder with the
// same signature can be plugged in.
using SentenceEncoder = std::function<Eigen::VectorXd(const TokenSeq&)>;

SentenceEncoder mean_vector_encoder(const EmbeddingTable& words);

Eigen::VectorXd sentence_encode(const TokenSeq& tokens, const EmbeddingTable& words);

// One adjacent transposition; interior positions only for length >= 4.
std::string bug_swap(const std::string& word, Rng& rng);

// One character removed.
std::string bug_delete(const std::string& word, Rng& rng);

// One confusion-table substitution.
std::string bug_subc(const std::string& word, const ConfusionTable& table, Rng& rng);

// Exact lexicon hit first, then a char_difference <= 2 near-match, then a
// random non-sentinel token.
std::size_t select_victim(const TokenSeq& tokens, const HateLexicon& hlex, Rng& rng);

std::pair<TokenSeq, AttackPlan> attack_message(const TokenSeq& tokens, const HateLexicon& hlex,
                                               const ConfusionTable& table,
                                               const SentenceEncoder& encoder, Rng& rng);

struct LabeledRow {
    std::string text;
    int label = 0;  // 0 legitimate, 1 hate
};

struct AttackedRow {
    LabeledRow row;
    std::optional<AttackPlan> plan;  // set for rows picked for manipulation
};

// Manipulates a uniformly random floor(ratio * n) subset per class.
// Texts are re-normalized before attack; the output text is the
// space-joined attacked token sequence.
std::vector<AttackedRow> attack_dataset(const std::vector<LabeledRow>& dataset, double ratio,
                                        const HateLexicon& hlex, const ConfusionTable& table,
                                        const SentenceEncoder& encoder, std::uint64_t seed);

}  // namespace swe2
