#include "swe2/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "swe2/errors.hpp"

namespace swe2 {

LabeledDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset: " + path);
    LabeledDataset rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("expected label<TAB>text", lineno);
        std::string label = line.substr(0, tab);
        if (label != "0" && label != "1") throw ParseError("label must be 0 or 1", lineno);
        rows.push_back({line.substr(tab + 1), label == "1" ? 1 : 0});
    }
    return rows;
}

void save_dataset(const LabeledDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset: " + path);
    for (const auto& row : dataset) out << row.label << '\t' << row.text << '\n';
}

DatasetSplit split(const LabeledDataset& dataset, std::uint64_t seed) {
    if (dataset.size() < 10) throw TooSmall("need at least 10 rows for an 80/10/10 split");
    DatasetSplit out;
    for (int cls : {0, 1}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < dataset.size(); ++i)
            if (dataset[i].label == cls) members.push_back(i);
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(cls)));
        rng.shuffle(members);
        std::size_t n = members.size();
        std::size_t n_test = n / 10;
        std::size_t n_valid = n / 10;
        std::size_t n_train = n - n_test - n_valid;
        for (std::size_t k = 0; k < n; ++k) {
            const LabeledRow& row = dataset[members[k]];
            if (k < n_train)
                out.train.push_back(row);
            else if (k < n_train + n_valid)
                out.valid.push_back(row);
            else
                out.test.push_back(row);
        }
    }
    return out;
}

Metrics compute_metrics(const std::vector<int>& preds, const std::vector<int>& labels) {
    if (preds.size() != labels.size()) throw LengthMismatch("preds and labels differ in length");
    if (preds.empty()) throw LengthMismatch("need at least one prediction");
    Metrics m;
    for (std::size_t i = 0; i < preds.size(); ++i) ++m.confusion[labels[i]][preds[i]];
    std::size_t correct = m.confusion[0][0] + m.confusion[1][1];
    m.accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());
    for (int c = 0; c < 2; ++c) {
        std::size_t tp = m.confusion[c][c];
        std::size_t fp = m.confusion[1 - c][c];
        std::size_t fn = m.confusion[c][1 - c];
        m.precision[c] = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        m.recall[c] = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        m.f1[c] = m.precision[c] + m.recall[c] == 0.0
                      ? 0.0
                      : 2.0 * m.precision[c] * m.recall[c] / (m.precision[c] + m.recall[c]);
    }
    m.macro_f1 = (m.f1[0] + m.f1[1]) / 2.0;
    return m;
}

std::vector<TrainSample> prepare_samples(const LabeledDataset& dataset, const Providers& providers,
                                         const ModelConfig& cfg) {
    std::vector<TrainSample> samples;
    samples.reserve(dataset.size());
    for (const auto& row : dataset) {
        TokenSeq tokens = normalize({row.text});
        if (tokens.empty()) continue;  // nothing to classify
        TrainSample s;
        s.input = prepare_input(tokens, providers, cfg);
        s.label = row.label == 1 ? Label::HateSpeech : Label::Legitimate;
        samples.push_back(std::move(s));
    }
    return samples;
}

std::vector<int> predict_labels(const ModelParams& params, const ModelConfig& cfg,
                                const LabeledDataset& dataset, const Providers& providers) {
    std::vector<int> preds;
    preds.reserve(dataset.size());
    for (const auto& row : dataset) {
        TokenSeq tokens = normalize({row.text});
        if (tokens.empty()) {
            preds.push_back(0);  // empty messages default to legitimate
            continue;
        }
        Prediction p = predict_from_input(params, cfg, prepare_input(tokens, providers, cfg));
        preds.push_back(static_cast<int>(p.label));
    }
    return preds;
}

Metrics evaluate(const ModelParams& params, const ModelConfig& cfg, const LabeledDataset& dataset,
                 const Providers& providers) {
    std::vector<int> labels;
    labels.reserve(dataset.size());
    for (const auto& row : dataset) labels.push_back(row.label);
    return compute_metrics(predict_labels(params, cfg, dataset, providers), labels);
}

SweepResult sweep_attack(const ModelParams& params, const ModelConfig& cfg,
                         const LabeledDataset& test_set, const Providers& providers,
                         const AttackDeps& attack, std::uint64_t seed) {
    SweepResult result;
    for (int step = 0; step <= 10; ++step) {
        double ratio = step / 10.0;
        LabeledDataset attacked;
        attacked.reserve(test_set.size());
        for (auto& row : attack_dataset(test_set, ratio, attack.hlex, attack.confusion,
                                        attack.encoder, mix_seed(seed, step)))
            attacked.push_back(std::move(row.row));
        result.push_back({ratio, evaluate(params, cfg, attacked, providers)});
    }
    return result;
}

std::string sweep_to_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "ratio,accuracy,macro_f1,f1_leg,f1_hate\n";
    out.precision(6);
    out << std::fixed;
    for (const auto& row : result)
        out << row.ratio << ',' << row.metrics.accuracy << ',' << row.metrics.macro_f1 << ','
            << row.metrics.f1[0] << ',' << row.metrics.f1[1] << '\n';
    return out.str();
}

LabeledDataset downsample_ratio(const LabeledDataset& dataset, int legit_per_hate,
                                std::uint64_t seed) {
    std::vector<std::size_t> hate, legit;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        (dataset[i].label == 1 ? hate : legit).push_back(i);
    std::size_t want = static_cast<std::size_t>(legit_per_hate) * hate.size();
    if (want > legit.size())
        throw Unachievable("not enough legitimate rows for ratio " +
                           std::to_string(legit_per_hate) + ":1");
    Rng rng(seed);
    rng.shuffle(legit);
    legit.resize(want);
    std::vector<std::size_t> keep = hate;
    keep.insert(keep.end(), legit.begin(), legit.end());
    std::sort(keep.begin(), keep.end());  // preserve original row order
    LabeledDataset out;
    out.reserve(keep.size());
    for (std::size_t i : keep) out.push_back(dataset[i]);
    return out;
}

LexiconHitHistogram lexicon_hits(const LabeledDataset& dataset, const HateLexicon& hlex) {
    LexiconHitHistogram hist;
    for (const auto& row : dataset) {
        std::size_t hits = 0;
        for (const auto& token : normalize({row.text}))
            if (hlex.words.count(token)) ++hits;
        std::size_t bucket = std::min<std::size_t>(hits, 2);
        (row.label == 1 ? hist.hate : hist.legitimate)[bucket] += 1;
    }
    return hist;
}

double compound_score(const TokenSeq& tokens, const SentimentLexicon& slex, double alpha) {
    double s = 0.0;
    for (const auto& token : tokens) s += sentiment_score(token, slex);
    double compound = s / std::sqrt(s * s + alpha);
    return std::clamp(compound, -1.0, 1.0);
}

std::vector<SentimentShiftRow> sentiment_shift(const LabeledDataset& before,
                                               const LabeledDataset& after,
                                               const SentimentLexicon& slex, double alpha) {
    if (before.size() != after.size())
        throw LengthMismatch("before/after datasets must align row-for-row");
    std::vector<SentimentShiftRow> rows;
    rows.reserve(before.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        rows.push_back({before[i].label, compound_score(normalize({before[i].text}), slex, alpha),
                        compound_score(normalize({after[i].text}), slex, alpha)});
    }
    return rows;
}

std::string sentiment_shift_to_csv(const std::vector<SentimentShiftRow>& rows) {
    std::ostringstream out;
    out << "label,score_before,score_after\n";
    out.precision(6);
    out << std::fixed;
    for (const auto& r : rows)
        out << r.label << ',' << r.score_before << ',' << r.score_after << '\n';
    return out.str();
}

}  // namespace swe2
