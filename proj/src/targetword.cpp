#include "swe2/targetword.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "swe2/errors.hpp"

namespace swe2 {

SentimentLexicon load_sentiment_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sentiment lexicon: " + path);
    SentimentLexicon lex;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("expected token<TAB>valence", lineno);
        std::string token = line.substr(0, tab);
        double valence = 0.0;
        try {
            valence = std::stod(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw ParseError("bad valence for token \"" + token + "\"", lineno);
        }
        if (!std::isfinite(valence)) throw ParseError("non-finite valence", lineno);
        lex.entries[token] = valence;
    }
    return lex;
}

HateLexicon load_hate_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open hate lexicon: " + path);
    HateLexicon lex;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) lex.words.insert(line);
    }
    return lex;
}

double sentiment_score(const std::string& token, const SentimentLexicon& lexicon) {
    auto it = lexicon.entries.find(token);
    return it == lexicon.entries.end() ? 0.0 : it->second;
}

std::size_t lcs_length(const std::string& a, const std::string& b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0 || m == 0) return 0;
    std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            if (a[i - 1] == b[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::size_t char_difference(const std::string& a, const std::string& b) {
    return a.size() + b.size() - 2 * lcs_length(a, b);
}

TargetSplit make_split(const TokenSeq& tokens, std::size_t index, SelectionMethod method) {
    if (index >= tokens.size()) throw ShapeMismatch("target index out of range");
    TargetSplit split;
    split.before.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(index));
    split.target = tokens[index];
    split.after.assign(tokens.begin() + static_cast<std::ptrdiff_t>(index) + 1, tokens.end());
    split.target_index = index;
    split.selection_method = method;
    return split;
}

TargetSplit find_target(const TokenSeq& tokens, const SentimentLexicon& slex,
                        const HateLexicon& hlex, Rng& rng, double tau) {
    if (tokens.empty()) throw EmptyMessage();

    // (1) strongest sentiment, first index on ties.
    double best_abs = 0.0;
    std::size_t best_idx = tokens.size();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (is_sentinel(tokens[i])) continue;
        double s = std::fabs(sentiment_score(tokens[i], slex));
        if (s > best_abs) {
            best_abs = s;
            best_idx = i;
        }
    }
    if (best_idx < tokens.size() && best_abs >= tau)
        return make_split(tokens, best_idx, SelectionMethod::Sentiment);

    // (2) hate-lexicon near-match: smallest char_difference <= 2, first index on ties.
    std::size_t match_idx = tokens.size();
    std::size_t match_diff = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (is_sentinel(tokens[i])) continue;
        for (const auto& h : hlex.words) {
            std::size_t d = char_difference(tokens[i], h);
            if (d <= 2 && d < match_diff) {
                match_diff = d;
                match_idx = i;
            }
        }
    }
    if (match_idx < tokens.size())
        return make_split(tokens, match_idx, SelectionMethod::LexiconMatch);

    // (3) random non-sentinel fallback.
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (!is_sentinel(tokens[i])) eligible.push_back(i);
    std::size_t idx = eligible.empty() ? rng.uniform_index(tokens.size())
                                       : eligible[rng.uniform_index(eligible.size())];
    return make_split(tokens, idx, SelectionMethod::Random);
}

}  // namespace swe2
