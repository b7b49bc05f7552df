#include "swe2/attack.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "swe2/errors.hpp"

namespace swe2 {

ConfusionTable load_confusion_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open confusion table: " + path);
    ConfusionTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab != 1) throw ParseError("expected single char<TAB>substitutes", lineno);
        char key = line[0];
        for (std::size_t i = tab + 1; i < line.size(); ++i) {
            char sub = line[i];
            if (sub == ',') continue;
            if (sub == key) throw ParseError("character mapping to itself", lineno);
            table.substitutes[key].push_back(sub);
        }
        if (table.substitutes[key].empty()) throw ParseError("no substitutes", lineno);
    }
    return table;
}

const char* attack_method_name(AttackMethod m) {
    switch (m) {
        case AttackMethod::Swap: return "swap";
        case AttackMethod::Delete: return "delete";
        case AttackMethod::SubC: return "sub-c";
    }
    return "?";
}

Eigen::VectorXd sentence_encode(const TokenSeq& tokens, const EmbeddingTable& words) {
    if (tokens.empty()) throw EmptyMessage();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(words.dim);
    for (const auto& t : tokens) sum += word_vector(t, words);
    sum /= static_cast<double>(tokens.size());
    double norm = sum.norm();
    return norm < 1e-12 ? sum : Eigen::VectorXd(sum / norm);
}

SentenceEncoder mean_vector_encoder(const EmbeddingTable& words) {
    return [&words](const TokenSeq& tokens) { return sentence_encode(tokens, words); };
}

std::string bug_swap(const std::string& word, Rng& rng) {
    if (word.size() < 2) throw TooShort(word);
    std::size_t lo = 0, hi = word.size() - 2;  // transposition at (i, i+1)
    if (word.size() >= 4) {
        lo = 1;
        hi = word.size() - 3;
    }
    // Only positions where the transposition actually changes the word.
    std::vector<std::size_t> positions;
    for (std::size_t i = lo; i <= hi; ++i)
        if (word[i] != word[i + 1]) positions.push_back(i);
    if (positions.empty()) throw NoEligibleChar(word);
    std::size_t i = positions[rng.uniform_index(positions.size())];
    std::string out = word;
    std::swap(out[i], out[i + 1]);
    return out;
}

std::string bug_delete(const std::string& word, Rng& rng) {
    if (word.size() < 2) throw TooShort(word);
    std::size_t i = rng.uniform_index(word.size());
    std::string out = word;
    out.erase(i, 1);
    return out;
}

std::string bug_subc(const std::string& word, const ConfusionTable& table, Rng& rng) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < word.size(); ++i)
        if (table.substitutes.count(word[i])) eligible.push_back(i);
    if (eligible.empty()) throw NoEligibleChar(word);
    std::size_t i = eligible[rng.uniform_index(eligible.size())];
    const auto& subs = table.substitutes.at(word[i]);
    std::string out = word;
    out[i] = subs[rng.uniform_index(subs.size())];
    return out;
}

std::size_t select_victim(const TokenSeq& tokens, const HateLexicon& hlex, Rng& rng) {
    if (tokens.empty()) throw EmptyMessage();
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (!is_sentinel(tokens[i]) && hlex.words.count(tokens[i])) return i;
    std::size_t best_idx = tokens.size();
    std::size_t best_diff = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (is_sentinel(tokens[i])) continue;
        for (const auto& h : hlex.words) {
            std::size_t d = char_difference(tokens[i], h);
            if (d <= 2 && d < best_diff) {
                best_diff = d;
                best_idx = i;
            }
        }
    }
    if (best_idx < tokens.size()) return best_idx;
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (!is_sentinel(tokens[i])) eligible.push_back(i);
    if (eligible.empty()) return rng.uniform_index(tokens.size());
    return eligible[rng.uniform_index(eligible.size())];
}

std::pair<TokenSeq, AttackPlan> attack_message(const TokenSeq& tokens, const HateLexicon& hlex,
                                               const ConfusionTable& table,
                                               const SentenceEncoder& encoder, Rng& rng) {
    if (tokens.empty()) throw EmptyMessage();
    AttackPlan plan;
    plan.victim_index = select_victim(tokens, hlex, rng);
    plan.original_word = tokens[plan.victim_index];
    const std::string& victim = plan.original_word;

    // Candidate generation order fixes both the rng draw order and the
    // Swap < Delete < SubC tie-break.
    if (victim.size() >= 2) {
        std::size_t lo = victim.size() >= 4 ? 1 : 0;
        std::size_t hi = victim.size() >= 4 ? victim.size() - 3 : victim.size() - 2;
        bool swappable = false;
        for (std::size_t i = lo; i <= hi && !swappable; ++i) swappable = victim[i] != victim[i + 1];
        if (swappable) plan.candidates.push_back({AttackMethod::Swap, bug_swap(victim, rng), 0.0});
        plan.candidates.push_back({AttackMethod::Delete, bug_delete(victim, rng), 0.0});
    }
    bool has_confusable =
        std::any_of(victim.begin(), victim.end(),
                    [&](char c) { return table.substitutes.count(c) > 0; });
    if (has_confusable)
        plan.candidates.push_back({AttackMethod::SubC, bug_subc(victim, table, rng), 0.0});

    if (plan.candidates.empty()) return {tokens, plan};

    Eigen::VectorXd original = encoder(tokens);
    for (auto& cand : plan.candidates) {
        TokenSeq changed = tokens;
        changed[plan.victim_index] = cand.word;
        Eigen::VectorXd enc = encoder(changed);
        cand.distance = 1.0 - original.dot(enc);
    }
    plan.chosen = 0;
    for (std::size_t i = 1; i < plan.candidates.size(); ++i)
        if (plan.candidates[i].distance > plan.candidates[plan.chosen].distance)
            plan.chosen = static_cast<int>(i);
    plan.distance = plan.candidates[plan.chosen].distance;

    TokenSeq out = tokens;
    out[plan.victim_index] = plan.candidates[plan.chosen].word;
    return {out, plan};
}

std::vector<AttackedRow> attack_dataset(const std::vector<LabeledRow>& dataset, double ratio,
                                        const HateLexicon& hlex, const ConfusionTable& table,
                                        const SentenceEncoder& encoder, std::uint64_t seed) {
    std::vector<AttackedRow> out(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) out[i].row = dataset[i];
    if (ratio <= 0.0) return out;

    for (int cls : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < dataset.size(); ++i)
            if (dataset[i].label == cls) members.push_back(i);
        std::size_t take = static_cast<std::size_t>(ratio * static_cast<double>(members.size()));
        take = std::min(take, members.size());
        Rng pick_rng(mix_seed(seed, static_cast<std::uint64_t>(cls)));
        pick_rng.shuffle(members);
        for (std::size_t k = 0; k < take; ++k) {
            std::size_t i = members[k];
            TokenSeq tokens = normalize({dataset[i].text});
            if (tokens.empty()) continue;
            Rng msg_rng(mix_seed(seed, 1000 + static_cast<std::uint64_t>(i)));
            auto [attacked, plan] = attack_message(tokens, hlex, table, encoder, msg_rng);
            out[i].row.text = join_tokens(attacked);
            out[i].plan = std::move(plan);
        }
    }
    return out;
}

}  // namespace swe2
