#pragma once

#include <map>
#include <set>
#include <string>

#include "swe2/rng.hpp"
#include "swe2/textnorm.hpp"

namespace swe2 {

// Token valences in [-4, 4], VADER-style. Loaded from a TSV export.
struct SentimentLexicon {
    std::map<std::string, double> entries;
};

struct HateLexicon {
    std::set<std::string> words;
};

enum class SelectionMethod { Sentiment, LexiconMatch, Random };

// (before, target, after) decomposition of a token sequence around the
// most significant word.
struct TargetSplit {
    TokenSeq before;
    std::string target;
    TokenSeq after;
    std::size_t target_index = 0;
    SelectionMethod selection_method = SelectionMethod::Random;
};

SentimentLexicon load_sentiment_lexicon(const std::string& path);
HateLexicon load_hate_lexicon(const std::string& path);

double sentiment_score(const std::string& token, const SentimentLexicon& lexicon);

std::size_t lcs_length(const std::string& a, const std::string& b);

// |a| + |b| - 2*LCS(a,b): the number of unmatched characters across both
// strings. Zero iff a == b.
std::size_t char_difference(const std::string& a, const std::string& b);

constexpr double kDefaultTau = 0.5;

// Target selection: strongest |valence| >= tau first, then hate-lexicon
// near-match (char_difference <= 2), then a random non-sentinel token.
// Ties break toward the lowest index.
TargetSplit find_target(const TokenSeq& tokens, const SentimentLexicon& slex,
                        const HateLexicon& hlex, Rng& rng, double tau = kDefaultTau);

TargetSplit make_split(const TokenSeq& tokens, std::size_t index, SelectionMethod method);

}  // namespace swe2
