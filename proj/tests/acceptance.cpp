// Acceptance checks for the full pipeline. Each check prints a single
// PASS/FAIL line; the process exits non-zero if any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "swe2/attack.hpp"
#include "swe2/harness.hpp"
#include "swe2/model.hpp"
#include "swe2/pipeline.hpp"
#include "synthetic_corpus.hpp"

using namespace swe2;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool ok, double seconds,
            const std::string& detail) {
    std::printf("%s  check %d (%s)  [%.1fs]  %s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                seconds, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void run(int index, const std::string& name, double time_limit_s,
         const std::function<bool(std::string&)>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && secs > time_limit_s) {
        ok = false;
        detail += " (exceeded " + std::to_string(time_limit_s) + "s budget)";
    }
    report(index, name, ok, secs, detail);
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
    for (std::size_t skip = 0; skip < a.size(); ++skip)
        if (a.substr(0, skip) + a.substr(skip + 1) == b) return true;
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
    for (char c : it->second)
        if (c == b[pos]) return true;
    return false;
}

std::vector<TrainSample> make_batch(const Providers& providers, const ModelConfig& cfg,
                                    std::size_t n, std::uint64_t seed) {
    LabeledDataset rows;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        rows.push_back({synth::random_message(rng, i % 2 == 0), i % 2 == 0 ? 1 : 0});
    return prepare_samples(rows, providers, cfg);
}

void check_gradients() {
    run(1, "gradient check", 60.0, [](std::string& detail) {
        ModelConfig cfg;
        cfg.seed = 5;
        cfg.validate();
        ModelParams params = build(cfg);
        Providers providers = synth::make_providers(cfg);
        std::vector<TrainSample> batch = make_batch(providers, cfg, 4, 101);
        if (params.total_coeffs() < 200) {
            detail = "model too small";
            return false;
        }
        double full = grad_check(params, cfg, batch, 1e-5, 200, 17);
        double mlp = grad_check(params, cfg, batch, 1e-5, 200, 18, "mlp.");
        std::ostringstream os;
        os << "full rel err " << full << ", mlp rel err " << mlp;
        detail = os.str();
        return full < 1e-3 && mlp < 1e-6;
    });
}

void check_cbow() {
    run(2, "cbow embedding sanity", 30.0, [](std::string& detail) {
        std::vector<std::vector<std::string>> corpus;
        for (int i = 0; i < 500; ++i) corpus.push_back({"A", "B"});
        for (int i = 0; i < 10; ++i) corpus.push_back({"A", "C"});
        for (int i = 0; i < 10; ++i) corpus.push_back({"D", "C"});
        CbowConfig cfg;
        cfg.dim = 16;
        cfg.epochs = 10;
        cfg.seed = 7;
        CbowHistory hist;
        EmbeddingTable t = train_cbow(corpus, cfg, EmbeddingKind::Char, &hist);
        EmbeddingTable t2 = train_cbow(corpus, cfg, EmbeddingKind::Char);
        auto cosine = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
            return a.dot(b) / (a.norm() * b.norm());
        };
        double ab = cosine(t.vectors.at("A"), t.vectors.at("B"));
        double ac = cosine(t.vectors.at("A"), t.vectors.at("C"));
        bool ordered = ab > ac;
        bool losses_drop = hist.epoch_mean_loss.back() < hist.epoch_mean_loss.front();
        bool deterministic = true;
        for (const auto& [sym, v] : t.vectors)
            if ((v - t2.vectors.at(sym)).norm() != 0.0) deterministic = false;
        std::ostringstream os;
        os << "cos(A,B)=" << ab << " cos(A,C)=" << ac << " loss " << hist.epoch_mean_loss.front()
           << "->" << hist.epoch_mean_loss.back();
        detail = os.str();
        return ordered && losses_drop && deterministic;
    });
}

void check_attack_contracts() {
    run(3, "attack contracts over 10000 seeded messages", 60.0, [](std::string& detail) {
        ConfusionTable confusion = load_confusion_table(std::string(SWE2_DATA_DIR) +
                                                        "/confusion.tsv");
        EmbeddingTable words = make_table(16, EmbeddingKind::Word);
        SentenceEncoder encoder = mean_vector_encoder(words);
        HateLexicon hlex;
        for (const auto& t : synth::toxic_tokens()) hlex.words.insert(t);

        std::size_t failures = 0;
        for (std::uint64_t i = 0; i < 10000; ++i) {
            Rng msg_rng(mix_seed(33, i));
            TokenSeq msg;
            std::size_t len = 3 + msg_rng.uniform_index(6);
            const auto& fill = synth::filler_tokens();
            for (std::size_t k = 0; k < len; ++k)
                msg.push_back(fill[msg_rng.uniform_index(fill.size())]);
            if (i % 3 == 0)
                msg[msg_rng.uniform_index(msg.size())] =
                    synth::toxic_tokens()[msg_rng.uniform_index(synth::toxic_tokens().size())];

            Rng rng(mix_seed(77, i));
            auto [attacked, plan] = attack_message(msg, hlex, confusion, encoder, rng);
            bool ok = attacked.size() == msg.size();
            if (!plan.applied()) {
                if (attacked != msg) ok = false;
            } else {
                const std::string& victim = plan.original_word;
                if (msg[plan.victim_index] != victim) ok = false;
                // every candidate obeys its method contract
                for (const auto& c : plan.candidates) {
                    bool valid = false;
                    switch (c.method) {
                        case AttackMethod::Swap: valid = is_transposition(victim, c.word); break;
                        case AttackMethod::Delete:
                            valid = is_single_deletion(victim, c.word);
                            break;
                        case AttackMethod::SubC:
                            valid = is_single_substitution(victim, c.word, confusion);
                            break;
                    }
                    if (!valid || c.word == victim) ok = false;
                }
                // independently recomputed distance argmax (first max wins)
                Eigen::VectorXd base = encoder(msg);
                std::vector<double> dists;
                for (const auto& c : plan.candidates) {
                    TokenSeq mutated = msg;
                    mutated[plan.victim_index] = c.word;
                    double dist = 1.0 - base.dot(encoder(mutated));
                    if (std::fabs(dist - c.distance) > 1e-9) ok = false;
                    dists.push_back(dist);
                }
                int best = 0;
                for (int k = 1; k < static_cast<int>(dists.size()); ++k)
                    if (dists[k] > dists[best]) best = k;
                if (best != plan.chosen) ok = false;
                if (attacked[plan.victim_index] != plan.candidates[plan.chosen].word) ok = false;
                for (std::size_t k = 0; k < msg.size(); ++k)
                    if (k != plan.victim_index && attacked[k] != msg[k]) ok = false;
            }
            if (!ok) ++failures;
        }
        detail = std::to_string(failures) + " contract violations";
        return failures == 0;
    });
}

struct BenchmarkResult {
    SweepResult full, no_cnn;
};

void check_benchmark(BenchmarkResult* out) {
    run(4, "synthetic benchmark and robustness sweep", 600.0, [out](std::string& detail) {
        LabeledDataset corpus = synth::make_corpus(2000, 4242);
        DatasetSplit parts = split(corpus, 9);

        ModelConfig cfg;
        cfg.seed = 21;
        cfg.epochs = 8;
        cfg.class_weights = {1.0, 5.0};
        cfg.validate();
        Providers providers = synth::make_providers(cfg);

        std::vector<TrainSample> train_set = prepare_samples(parts.train, providers, cfg);
        std::vector<TrainSample> valid_set = prepare_samples(parts.valid, providers, cfg);

        ModelParams params = build(cfg);
        train(params, train_set, valid_set, cfg);

        ModelConfig ab_cfg = cfg;
        ab_cfg.ablate_char = true;
        ab_cfg.ablate_pho = true;
        ModelParams ab_params = build(ab_cfg);
        train(ab_params, prepare_samples(parts.train, providers, ab_cfg),
              prepare_samples(parts.valid, providers, ab_cfg), ab_cfg);

        AttackDeps deps;
        deps.hlex = providers.hlex;
        deps.confusion = load_confusion_table(std::string(SWE2_DATA_DIR) + "/confusion.tsv");
        deps.encoder = mean_vector_encoder(providers.word_table);

        SweepResult sweep_full = sweep_attack(params, cfg, parts.test, providers, deps, 31);
        SweepResult sweep_ab = sweep_attack(ab_params, ab_cfg, parts.test, providers, deps, 31);
        if (out) {
            out->full = sweep_full;
            out->no_cnn = sweep_ab;
        }

        double acc0 = sweep_full[0].metrics.accuracy;
        double mf0 = sweep_full[0].metrics.macro_f1;
        double acc5 = sweep_full[5].metrics.accuracy;
        bool clean_ok = acc0 >= 0.95 && mf0 >= 0.93;
        bool robust_ok = acc5 >= acc0 - 0.03;
        bool dominates = true;
        for (int step = 5; step <= 10; ++step)
            if (sweep_full[step].metrics.accuracy < sweep_ab[step].metrics.accuracy)
                dominates = false;
        std::ostringstream os;
        os << "acc@0=" << acc0 << " macroF1@0=" << mf0 << " acc@0.5=" << acc5
           << " reduced-model acc@0.5=" << sweep_ab[5].metrics.accuracy;
        detail = os.str();
        return clean_ok && robust_ok && dominates;
    });
}

void check_ablations() {
    run(5, "ablation variants train end to end", 60.0, [](std::string& detail) {
        struct Variant {
            bool no_char, no_pho, no_lstm;
            int u_loc;
        };
        std::vector<Variant> variants = {{false, false, false, 224},
                                         {true, false, false, 176},
                                         {false, true, false, 176},
                                         {true, true, false, 128},
                                         {false, false, true, 96}};
        for (const auto& v : variants) {
            ModelConfig cfg;
            cfg.seed = 3;
            cfg.epochs = 1;
            cfg.ablate_char = v.no_char;
            cfg.ablate_pho = v.no_pho;
            cfg.ablate_lstms = v.no_lstm;
            cfg.validate();
            if (cfg.u_loc_dim() != v.u_loc) {
                detail = "unexpected u_loc width " + std::to_string(cfg.u_loc_dim());
                return false;
            }
            Providers providers = synth::make_providers(cfg);
            std::vector<TrainSample> data = make_batch(providers, cfg, 64, 55);
            ModelParams params = build(cfg);
            train(params, data, data, cfg);
            Activations act = forward(params, cfg, data.front().input);
            if (act.u_loc.size() != v.u_loc || act.logits.size() != 2) {
                detail = "feature shape mismatch";
                return false;
            }
        }
        detail = "u_loc widths 224/176/176/128/96";
        return true;
    });
}

void check_metrics() {
    run(6, "metrics against exhaustive enumeration", 60.0, [](std::string& detail) {
        // every length-8 prediction/label combination
        for (unsigned p = 0; p < (1u << 8); ++p)
            for (unsigned l = 0; l < (1u << 8); ++l) {
                std::vector<int> preds(8), labels(8);
                for (int i = 0; i < 8; ++i) {
                    preds[i] = (p >> i) & 1;
                    labels[i] = (l >> i) & 1;
                }
                double counts[2][2] = {{0, 0}, {0, 0}};
                for (int i = 0; i < 8; ++i) counts[labels[i]][preds[i]] += 1.0;
                Metrics m = compute_metrics(preds, labels);
                double acc = (counts[0][0] + counts[1][1]) / 8.0;
                if (std::fabs(m.accuracy - acc) > 1e-12) {
                    detail = "accuracy mismatch";
                    return false;
                }
                for (int c = 0; c < 2; ++c) {
                    double tp = counts[c][c], fp = counts[1 - c][c], fn = counts[c][1 - c];
                    double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
                    double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
                    double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
                    if (std::fabs(m.precision[c] - prec) > 1e-12 ||
                        std::fabs(m.recall[c] - rec) > 1e-12 || std::fabs(m.f1[c] - f1) > 1e-12) {
                        detail = "per-class mismatch";
                        return false;
                    }
                }
                if (std::fabs(m.macro_f1 - (m.f1[0] + m.f1[1]) / 2) > 1e-12) {
                    detail = "macro f1 mismatch";
                    return false;
                }
            }

        // hand-checked confusion: TN=9 FP=1 FN=2 TP=8
        std::vector<int> labels, preds;
        for (int i = 0; i < 9; ++i) { labels.push_back(0); preds.push_back(0); }
        labels.push_back(0); preds.push_back(1);
        labels.push_back(1); preds.push_back(0);
        labels.push_back(1); preds.push_back(0);
        for (int i = 0; i < 8; ++i) { labels.push_back(1); preds.push_back(1); }
        Metrics m = compute_metrics(preds, labels);
        bool hand_ok = std::fabs(m.accuracy - 0.85) < 1e-12 &&
                       std::fabs(m.f1[1] - 0.8421052631578947) < 1e-6;
        detail = "65536 combinations plus the hand example";
        return hand_ok;
    });
}

void check_sentiment_shift() {
    run(7, "sentiment shift under full manipulation", 60.0, [](std::string& detail) {
        LabeledDataset corpus = synth::make_corpus(600, 77);
        ModelConfig cfg;
        Providers providers = synth::make_providers(cfg);
        ConfusionTable confusion =
            load_confusion_table(std::string(SWE2_DATA_DIR) + "/confusion.tsv");
        SentenceEncoder encoder = mean_vector_encoder(providers.word_table);

        LabeledDataset attacked;
        for (auto& row : attack_dataset(corpus, 1.0, providers.hlex, confusion, encoder, 13))
            attacked.push_back(std::move(row.row));

        auto rows = sentiment_shift(corpus, attacked, providers.slex);
        double hate_before = 0, hate_after = 0, legit_delta = 0;
        std::size_t n_hate = 0, n_legit = 0;
        for (const auto& r : rows) {
            if (r.label == 1) {
                hate_before += std::fabs(r.score_before);
                hate_after += std::fabs(r.score_after);
                ++n_hate;
            } else {
                legit_delta += std::fabs(r.score_after - r.score_before);
                ++n_legit;
            }
        }
        hate_before /= static_cast<double>(n_hate);
        hate_after /= static_cast<double>(n_hate);
        legit_delta /= static_cast<double>(n_legit);
        std::ostringstream os;
        os << "hate |compound| " << hate_before << "->" << hate_after << ", legit mean shift "
           << legit_delta;
        detail = os.str();
        return hate_after < hate_before && legit_delta < 0.05;
    });
}

}  // namespace

int main() {
    check_gradients();
    check_cbow();
    check_attack_contracts();
    check_benchmark(nullptr);
    check_ablations();
    check_metrics();
    check_sentiment_shift();
    if (g_failures > 0) {
        std::printf("%d acceptance check(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance checks passed\n");
    return 0;
}
