#include "swe2/pipeline.hpp"

#include "swe2/errors.hpp"
#include "swe2/rng.hpp"

namespace swe2 {

namespace {

Eigen::MatrixXd word_stack(const TokenSeq& tokens, const std::string& sentinel,
                           const EmbeddingTable& words, bool reverse) {
    TokenSeq seq = tokens;
    if (seq.empty()) seq.push_back(sentinel);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(seq.size()), words.dim);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        std::size_t row = reverse ? seq.size() - 1 - i : i;
        m.row(static_cast<Eigen::Index>(row)) = word_vector(seq[i], words);
    }
    return m;
}

}  // namespace

ModelInput prepare_input(const TargetSplit& split, const Providers& providers,
                         const ModelConfig& cfg) {
    if (providers.char_table.dim != cfg.char_dim || providers.pho_table.dim != cfg.pho_dim ||
        providers.word_table.dim != cfg.word_dim)
        throw ProviderMissing("provider dimensions do not match the model config");
    ModelInput input;
    input.v_char = embed_chars(split.target, providers.char_table);
    input.v_pho = embed_phonemes(split.target, providers.dict, providers.chunks,
                                 providers.pho_table);
    input.u_bef = word_stack(split.before, kBosToken, providers.word_table, false);
    input.u_aft = word_stack(split.after, kEosToken, providers.word_table, true);
    return input;
}

ModelInput prepare_input(const TokenSeq& tokens, const Providers& providers,
                         const ModelConfig& cfg) {
    if (tokens.empty()) throw EmptyMessage();
    Rng rng(mix_seed(providers.seed, stable_hash(join_tokens(tokens))));
    TargetSplit split = find_target(tokens, providers.slex, providers.hlex, rng, providers.tau);
    return prepare_input(split, providers, cfg);
}

Prediction predict(const ModelParams& params, const ModelConfig& cfg, const RawMessage& raw,
                   const Providers& providers) {
    TokenSeq tokens = normalize(raw);
    if (tokens.empty()) throw EmptyMessage();
    return predict_from_input(params, cfg, prepare_input(tokens, providers, cfg));
}

}  // namespace swe2
