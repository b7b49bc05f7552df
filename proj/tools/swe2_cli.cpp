// Command-line front end: normalization, embedding training, model
// training/evaluation, adversarial attacks and the analysis commands.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "swe2/attack.hpp"
#include "swe2/errors.hpp"
#include "swe2/harness.hpp"
#include "swe2/model.hpp"
#include "swe2/pipeline.hpp"

using namespace swe2;
using nlohmann::json;

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SWE2_SEED")) return std::strtoull(env, nullptr, 10);
    return 1;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << content;
}

ModelConfig load_config(const std::string& path, std::uint64_t seed) {
    ModelConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config " + path);
        std::stringstream buf;
        buf << in.rdbuf();
        cfg = config_from_json(buf.str());
    }
    if (cfg.seed == ModelConfig{}.seed) cfg.seed = seed;
    cfg.validate();
    return cfg;
}

struct ProviderOpts {
    std::string char_vectors, pho_vectors, word_vectors;
    std::string dict = std::string(SWE2_DATA_DIR) + "/cmudict_fixture.txt";
    std::string chunks = std::string(SWE2_DATA_DIR) + "/g2p_chunks.tsv";
    std::string sentiment, lexicon;
    double tau = kDefaultTau;
};

void add_provider_options(CLI::App* cmd, ProviderOpts& opts) {
    cmd->add_option("--char-vectors", opts.char_vectors, "character embedding table (.vec)")
        ->required();
    cmd->add_option("--pho-vectors", opts.pho_vectors, "phoneme embedding table (.vec)")
        ->required();
    cmd->add_option("--word-vectors", opts.word_vectors,
                    "word embedding table (.vec); hashed fallback vectors when omitted");
    cmd->add_option("--dict", opts.dict, "pronouncing dictionary");
    cmd->add_option("--chunks", opts.chunks, "grapheme-to-phoneme chunk table");
    cmd->add_option("--sentiment", opts.sentiment, "sentiment lexicon TSV");
    cmd->add_option("--lexicon", opts.lexicon, "hate lexicon, one token per line");
    cmd->add_option("--tau", opts.tau, "sentiment threshold for target selection");
}

Providers load_providers(const ProviderOpts& opts, const ModelConfig& cfg, std::uint64_t seed) {
    Providers p;
    p.char_table = load_embedding_table(opts.char_vectors, EmbeddingKind::Char);
    p.pho_table = load_embedding_table(opts.pho_vectors, EmbeddingKind::Phoneme);
    p.word_table = opts.word_vectors.empty()
                       ? make_table(cfg.word_dim, EmbeddingKind::Word)
                       : load_word_vectors(opts.word_vectors);
    p.dict = load_pron_dict(opts.dict);
    p.chunks = ChunkTable::load(opts.chunks);
    if (!opts.sentiment.empty()) p.slex = load_sentiment_lexicon(opts.sentiment);
    if (!opts.lexicon.empty()) p.hlex = load_hate_lexicon(opts.lexicon);
    p.tau = opts.tau;
    p.seed = seed;
    return p;
}

std::string metrics_summary(const Metrics& m) {
    std::ostringstream os;
    os.precision(4);
    os << std::fixed;
    os << "accuracy " << m.accuracy << "  macro F1 " << m.macro_f1 << "\n"
       << "legitimate: precision " << m.precision[0] << " recall " << m.recall[0] << " F1 "
       << m.f1[0] << "\n"
       << "hate:       precision " << m.precision[1] << " recall " << m.recall[1] << " F1 "
       << m.f1[1] << "\n"
       << "confusion [[" << m.confusion[0][0] << ", " << m.confusion[0][1] << "], ["
       << m.confusion[1][0] << ", " << m.confusion[1][1] << "]]\n";
    return os.str();
}

json plan_to_json(std::size_t row, const AttackPlan& plan) {
    json j;
    j["row"] = row;
    j["victim_index"] = plan.victim_index;
    j["original_word"] = plan.original_word;
    j["chosen"] = plan.chosen;
    j["distance"] = plan.distance;
    json cands = json::array();
    for (const auto& c : plan.candidates)
        cands.push_back({{"method", attack_method_name(c.method)},
                         {"word", c.word},
                         {"distance", c.distance}});
    j["candidates"] = cands;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"subword-enriched hate speech classifier and attack toolkit"};
    app.require_subcommand(1);
    std::uint64_t seed = default_seed();
    app.add_option("--seed", seed, "global random seed (default: SWE2_SEED or 1)");

    // normalize
    std::string norm_in, norm_out;
    auto* c_norm = app.add_subcommand("normalize", "normalize raw messages to token lines");
    c_norm->add_option("--in", norm_in)->required();
    c_norm->add_option("--out", norm_out)->required();

    // target
    std::string tgt_in, tgt_sent, tgt_lex;
    double tgt_tau = kDefaultTau;
    auto* c_tgt = app.add_subcommand("target", "show the selected target word per message");
    c_tgt->add_option("--in", tgt_in)->required();
    c_tgt->add_option("--sentiment", tgt_sent);
    c_tgt->add_option("--lexicon", tgt_lex);
    c_tgt->add_option("--tau", tgt_tau);

    // train-embeddings
    std::string emb_kind = "char", emb_in, emb_out;
    std::string emb_dict = std::string(SWE2_DATA_DIR) + "/cmudict_fixture.txt";
    std::string emb_chunks = std::string(SWE2_DATA_DIR) + "/g2p_chunks.tsv";
    CbowConfig emb_cfg;
    auto* c_emb = app.add_subcommand("train-embeddings", "train cbow embeddings");
    c_emb->add_option("--kind", emb_kind)->check(CLI::IsMember({"char", "phoneme"}));
    c_emb->add_option("--dict", emb_dict, "pronouncing dictionary (phoneme kind)");
    c_emb->add_option("--chunks", emb_chunks, "grapheme-to-phoneme chunks (phoneme kind)");
    c_emb->add_option("--dim", emb_cfg.dim);
    c_emb->add_option("--window", emb_cfg.window);
    c_emb->add_option("--epochs", emb_cfg.epochs);
    c_emb->add_option("--lr", emb_cfg.learning_rate);
    c_emb->add_option("--negative", emb_cfg.negative_samples);
    c_emb->add_option("--in", emb_in, "one message per line")->required();
    c_emb->add_option("--out", emb_out)->required();

    // train
    std::string train_data, train_valid, train_cfg_path, train_out;
    ProviderOpts train_prov;
    auto* c_train = app.add_subcommand("train", "train a classifier");
    c_train->add_option("--data", train_data)->required();
    c_train->add_option("--valid", train_valid, "validation TSV; split from --data when omitted");
    c_train->add_option("--config", train_cfg_path, "JSON model configuration");
    c_train->add_option("--out", train_out)->required();
    add_provider_options(c_train, train_prov);

    // predict
    std::string pred_model, pred_in;
    ProviderOpts pred_prov;
    auto* c_pred = app.add_subcommand("predict", "classify raw messages");
    c_pred->add_option("--model", pred_model)->required();
    c_pred->add_option("--in", pred_in, "one raw message per line")->required();
    add_provider_options(c_pred, pred_prov);

    // evaluate
    std::string eval_model, eval_data;
    ProviderOpts eval_prov;
    auto* c_eval = app.add_subcommand("evaluate", "metrics on a labeled TSV");
    c_eval->add_option("--model", eval_model)->required();
    c_eval->add_option("--data", eval_data)->required();
    add_provider_options(c_eval, eval_prov);

    // attack
    std::string atk_in, atk_lex, atk_conf, atk_vec, atk_out, atk_plans;
    double atk_ratio = 0.5;
    auto* c_atk = app.add_subcommand("attack", "manipulate a labeled dataset");
    c_atk->add_option("--in", atk_in)->required();
    c_atk->add_option("--ratio", atk_ratio);
    c_atk->add_option("--lexicon", atk_lex)->required();
    c_atk->add_option("--confusion", atk_conf)->required();
    c_atk->add_option("--vectors", atk_vec, "word vectors for the sentence encoder");
    c_atk->add_option("--out", atk_out)->required();
    c_atk->add_option("--plans", atk_plans, "JSONL audit log of attack plans");

    // sweep
    std::string swp_model, swp_data, swp_lex, swp_conf, swp_vec, swp_out;
    ProviderOpts swp_prov;
    auto* c_swp = app.add_subcommand("sweep", "evaluate under attack ratios 0.0..1.0");
    c_swp->add_option("--model", swp_model)->required();
    c_swp->add_option("--data", swp_data)->required();
    c_swp->add_option("--attack-lexicon", swp_lex)->required();
    c_swp->add_option("--confusion", swp_conf)->required();
    c_swp->add_option("--vectors", swp_vec, "word vectors for the sentence encoder");
    c_swp->add_option("--out", swp_out, "CSV output path");
    add_provider_options(c_swp, swp_prov);

    // ablate
    std::string abl_data, abl_cfg_path, abl_out;
    ProviderOpts abl_prov;
    auto* c_abl = app.add_subcommand("ablate", "train and score feature ablations");
    c_abl->add_option("--data", abl_data)->required();
    c_abl->add_option("--config", abl_cfg_path);
    c_abl->add_option("--out", abl_out, "CSV output path");
    add_provider_options(c_abl, abl_prov);

    // class-ratio
    std::string cr_data, cr_cfg_path, cr_out;
    std::vector<int> cr_ratios = {1, 3, 5};
    ProviderOpts cr_prov;
    auto* c_cr = app.add_subcommand("class-ratio", "vary the legitimate:hate ratio");
    c_cr->add_option("--data", cr_data)->required();
    c_cr->add_option("--ratios", cr_ratios, "legitimate rows per hate row");
    c_cr->add_option("--config", cr_cfg_path);
    c_cr->add_option("--out", cr_out, "CSV output path");
    add_provider_options(c_cr, cr_prov);

    // analyze
    std::string an_data, an_attacked, an_lex, an_sent, an_out;
    double an_alpha = 15.0;
    auto* c_an = app.add_subcommand("analyze", "lexicon hits and sentiment shift");
    c_an->add_option("--data", an_data)->required();
    c_an->add_option("--attacked", an_attacked, "row-aligned manipulated dataset");
    c_an->add_option("--lexicon", an_lex);
    c_an->add_option("--sentiment", an_sent);
    c_an->add_option("--alpha", an_alpha, "compound score normalization constant");
    c_an->add_option("--out", an_out, "sentiment-shift CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_norm) {
            std::ostringstream out;
            for (const auto& line : read_lines(norm_in))
                out << join_tokens(normalize({line})) << '\n';
            write_text(norm_out, out.str());
        } else if (*c_tgt) {
            SentimentLexicon slex;
            HateLexicon hlex;
            if (!tgt_sent.empty()) slex = load_sentiment_lexicon(tgt_sent);
            if (!tgt_lex.empty()) hlex = load_hate_lexicon(tgt_lex);
            for (const auto& line : read_lines(tgt_in)) {
                TokenSeq tokens = normalize({line});
                if (tokens.empty()) {
                    std::cout << "\t(empty)\n";
                    continue;
                }
                Rng rng(mix_seed(seed, stable_hash(join_tokens(tokens))));
                TargetSplit s = find_target(tokens, slex, hlex, rng, tgt_tau);
                const char* how = s.selection_method == SelectionMethod::Sentiment  ? "sentiment"
                                  : s.selection_method == SelectionMethod::LexiconMatch
                                      ? "lexicon"
                                      : "random";
                std::cout << s.target << '\t' << s.target_index << '\t' << how << '\n';
            }
        } else if (*c_emb) {
            emb_cfg.seed = seed;
            std::vector<std::vector<std::string>> corpus;
            EmbeddingKind kind =
                emb_kind == "char" ? EmbeddingKind::Char : EmbeddingKind::Phoneme;
            PronDict dict;
            ChunkTable chunks;
            if (kind == EmbeddingKind::Phoneme) {
                dict = load_pron_dict(emb_dict);
                chunks = ChunkTable::load(emb_chunks);
            }
            for (const auto& line : read_lines(emb_in)) {
                for (const auto& token : normalize({line})) {
                    std::vector<std::string> seq;
                    if (kind == EmbeddingKind::Phoneme)
                        seq = to_phonemes(token, dict, chunks);
                    else
                        for (char ch : token) seq.emplace_back(1, ch);
                    if (seq.size() >= 2) corpus.push_back(std::move(seq));
                }
            }
            CbowHistory hist;
            EmbeddingTable table = train_cbow(corpus, emb_cfg, kind, &hist);
            save_embedding_table(table, emb_out);
            std::cout << "trained " << table.vectors.size() << " vectors, final loss "
                      << hist.epoch_mean_loss.back() << '\n';
        } else if (*c_train) {
            ModelConfig cfg = load_config(train_cfg_path, seed);
            Providers providers = load_providers(train_prov, cfg, seed);
            // Embedding tables are the source of truth for feature widths.
            cfg.char_dim = providers.char_table.dim;
            cfg.pho_dim = providers.pho_table.dim;
            cfg.word_dim = providers.word_table.dim;
            cfg.validate();
            LabeledDataset train_rows, valid_rows;
            if (train_valid.empty()) {
                DatasetSplit parts = split(load_dataset(train_data), seed);
                train_rows = parts.train;
                valid_rows = parts.valid;
            } else {
                train_rows = load_dataset(train_data);
                valid_rows = load_dataset(train_valid);
            }
            ModelParams params = build(cfg);
            TrainHistory hist = train(params, prepare_samples(train_rows, providers, cfg),
                                      prepare_samples(valid_rows, providers, cfg), cfg);
            save_checkpoint(params, cfg, train_out);
            for (std::size_t e = 0; e < hist.epochs.size(); ++e)
                std::cout << "epoch " << e << ": loss " << hist.epochs[e].train_loss
                          << " train acc " << hist.epochs[e].train_accuracy << " valid acc "
                          << hist.epochs[e].valid_accuracy << '\n';
            std::cout << "best epoch " << hist.best_epoch << ", model written to " << train_out
                      << '\n';
        } else if (*c_pred) {
            auto [params, cfg] = load_checkpoint(pred_model);
            Providers providers = load_providers(pred_prov, cfg, seed);
            for (const auto& line : read_lines(pred_in)) {
                Prediction p = predict(params, cfg, {line}, providers);
                std::cout << static_cast<int>(p.label) << '\t' << p.prob_hate << '\t' << line
                          << '\n';
            }
        } else if (*c_eval) {
            auto [params, cfg] = load_checkpoint(eval_model);
            Providers providers = load_providers(eval_prov, cfg, seed);
            Metrics m = evaluate(params, cfg, load_dataset(eval_data), providers);
            std::cout << metrics_summary(m);
        } else if (*c_atk) {
            HateLexicon hlex = load_hate_lexicon(atk_lex);
            ConfusionTable table = load_confusion_table(atk_conf);
            EmbeddingTable words = atk_vec.empty() ? make_table(50, EmbeddingKind::Word)
                                                   : load_word_vectors(atk_vec);
            auto rows = attack_dataset(load_dataset(atk_in), atk_ratio, hlex, table,
                                       mean_vector_encoder(words), seed);
            LabeledDataset out_rows;
            std::ostringstream plans;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                out_rows.push_back(rows[i].row);
                if (rows[i].plan) plans << plan_to_json(i, *rows[i].plan).dump() << '\n';
            }
            save_dataset(out_rows, atk_out);
            if (!atk_plans.empty()) write_text(atk_plans, plans.str());
            std::cout << "attacked dataset written to " << atk_out << '\n';
        } else if (*c_swp) {
            auto [params, cfg] = load_checkpoint(swp_model);
            Providers providers = load_providers(swp_prov, cfg, seed);
            AttackDeps deps;
            deps.hlex = load_hate_lexicon(swp_lex);
            deps.confusion = load_confusion_table(swp_conf);
            EmbeddingTable words = swp_vec.empty() ? make_table(cfg.word_dim, EmbeddingKind::Word)
                                                   : load_word_vectors(swp_vec);
            deps.encoder = mean_vector_encoder(words);
            SweepResult result =
                sweep_attack(params, cfg, load_dataset(swp_data), providers, deps, seed);
            std::string csv = sweep_to_csv(result);
            if (!swp_out.empty()) write_text(swp_out, csv);
            std::cout << csv;
        } else if (*c_abl) {
            ModelConfig base = load_config(abl_cfg_path, seed);
            DatasetSplit parts = split(load_dataset(abl_data), seed);
            std::ostringstream csv;
            csv << "variant,u_loc,accuracy,macro_f1\n";
            struct Variant {
                const char* name;
                bool no_char, no_pho, no_lstm;
            };
            for (Variant v : std::initializer_list<Variant>{{"full", false, false, false},
                                                            {"-char", true, false, false},
                                                            {"-pho", false, true, false},
                                                            {"-char-pho", true, true, false},
                                                            {"-lstms", false, false, true}}) {
                ModelConfig cfg = base;
                cfg.ablate_char = v.no_char;
                cfg.ablate_pho = v.no_pho;
                cfg.ablate_lstms = v.no_lstm;
                Providers providers = load_providers(abl_prov, cfg, seed);
                cfg.char_dim = providers.char_table.dim;
                cfg.pho_dim = providers.pho_table.dim;
                cfg.word_dim = providers.word_table.dim;
                cfg.validate();
                ModelParams params = build(cfg);
                train(params, prepare_samples(parts.train, providers, cfg),
                      prepare_samples(parts.valid, providers, cfg), cfg);
                Metrics m = evaluate(params, cfg, parts.test, providers);
                csv << v.name << ',' << cfg.u_loc_dim() << ',' << m.accuracy << ',' << m.macro_f1
                    << '\n';
            }
            if (!abl_out.empty()) write_text(abl_out, csv.str());
            std::cout << csv.str();
        } else if (*c_cr) {
            ModelConfig cfg = load_config(cr_cfg_path, seed);
            LabeledDataset full = load_dataset(cr_data);
            std::ostringstream csv;
            csv << "legit_per_hate,accuracy,macro_f1,f1_hate\n";
            for (int ratio : cr_ratios) {
                LabeledDataset down = downsample_ratio(full, ratio, mix_seed(seed, ratio));
                DatasetSplit parts = split(down, seed);
                Providers providers = load_providers(cr_prov, cfg, seed);
                cfg.char_dim = providers.char_table.dim;
                cfg.pho_dim = providers.pho_table.dim;
                cfg.word_dim = providers.word_table.dim;
                cfg.validate();
                ModelParams params = build(cfg);
                train(params, prepare_samples(parts.train, providers, cfg),
                      prepare_samples(parts.valid, providers, cfg), cfg);
                Metrics m = evaluate(params, cfg, parts.test, providers);
                csv << ratio << ',' << m.accuracy << ',' << m.macro_f1 << ',' << m.f1[1] << '\n';
            }
            if (!cr_out.empty()) write_text(cr_out, csv.str());
            std::cout << csv.str();
        } else if (*c_an) {
            LabeledDataset data = load_dataset(an_data);
            if (!an_lex.empty()) {
                LexiconHitHistogram h = lexicon_hits(data, load_hate_lexicon(an_lex));
                std::cout << "lexicon hits (0 / 1 / >=2)\n"
                          << "legitimate: " << h.legitimate[0] << " / " << h.legitimate[1]
                          << " / " << h.legitimate[2] << '\n'
                          << "hate:       " << h.hate[0] << " / " << h.hate[1] << " / "
                          << h.hate[2] << '\n';
            }
            if (!an_attacked.empty()) {
                SentimentLexicon slex;
                if (!an_sent.empty()) slex = load_sentiment_lexicon(an_sent);
                auto rows = sentiment_shift(data, load_dataset(an_attacked), slex, an_alpha);
                std::string csv = sentiment_shift_to_csv(rows);
                if (!an_out.empty())
                    write_text(an_out, csv);
                else
                    std::cout << csv;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
