#pragma once

#include <array>
#include <string>
#include <vector>

#include "swe2/attack.hpp"
#include "swe2/model.hpp"
#include "swe2/pipeline.hpp"

namespace swe2 {

using LabeledDataset = std::vector<LabeledRow>;

struct Metrics {
    double accuracy = 0.0;
    double precision[2] = {0.0, 0.0};
    double recall[2] = {0.0, 0.0};
    double f1[2] = {0.0, 0.0};
    double macro_f1 = 0.0;
    // confusion[actual][predicted]
    std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
};

struct SweepRow {
    double ratio;
    Metrics metrics;
};
using SweepResult = std::vector<SweepRow>;

// TSV `label<TAB>text`, labels in {0,1}, blank lines skipped.
LabeledDataset load_dataset(const std::string& path);
void save_dataset(const LabeledDataset& dataset, const std::string& path);

struct DatasetSplit {
    LabeledDataset train, valid, test;
};

// Stratified 80/10/10; deterministic given seed.
DatasetSplit split(const LabeledDataset& dataset, std::uint64_t seed);

Metrics compute_metrics(const std::vector<int>& preds, const std::vector<int>& labels);

std::vector<TrainSample> prepare_samples(const LabeledDataset& dataset, const Providers& providers,
                                         const ModelConfig& cfg);

std::vector<int> predict_labels(const ModelParams& params, const ModelConfig& cfg,
                                const LabeledDataset& dataset, const Providers& providers);

Metrics evaluate(const ModelParams& params, const ModelConfig& cfg, const LabeledDataset& dataset,
                 const Providers& providers);

struct AttackDeps {
    HateLexicon hlex;
    ConfusionTable confusion;
    SentenceEncoder encoder;
};

// Evaluates under attack ratios 0.0, 0.1, ..., 1.0.
SweepResult sweep_attack(const ModelParams& params, const ModelConfig& cfg,
                         const LabeledDataset& test_set, const Providers& providers,
                         const AttackDeps& attack, std::uint64_t seed);

std::string sweep_to_csv(const SweepResult& result);

// Keeps all hate rows and a random legit_per_hate * |hate| legit subset.
LabeledDataset downsample_ratio(const LabeledDataset& dataset, int legit_per_hate,
                                std::uint64_t seed);

// Exact-match lexicon hit counts bucketed {0, 1, >=2}, per class.
struct LexiconHitHistogram {
    std::array<std::size_t, 3> legitimate = {0, 0, 0};
    std::array<std::size_t, 3> hate = {0, 0, 0};
};

LexiconHitHistogram lexicon_hits(const LabeledDataset& dataset, const HateLexicon& hlex);

// VADER-style compound score: S / sqrt(S^2 + alpha), S = sum of token
// valences, clipped to [-1, 1].
double compound_score(const TokenSeq& tokens, const SentimentLexicon& slex, double alpha = 15.0);

struct SentimentShiftRow {
    int label;
    double score_before;
    double score_after;
};

std::vector<SentimentShiftRow> sentiment_shift(const LabeledDataset& before,
                                               const LabeledDataset& after,
                                               const SentimentLexicon& slex, double alpha = 15.0);

std::string sentiment_shift_to_csv(const std::vector<SentimentShiftRow>& rows);

}  // namespace swe2
