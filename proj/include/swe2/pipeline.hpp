#pragma once

#include <string>
#include <vector>

#include "swe2/embeddings.hpp"
#include "swe2/model.hpp"
#include "swe2/phonetics.hpp"
#include "swe2/targetword.hpp"
#include "swe2/textnorm.hpp"

namespace swe2 {

inline const std::string kBosToken = "<bos>";
inline const std::string kEosToken = "<eos>";

// Everything the network needs around itself: embedding providers, the
// pronunciation machinery and the target-word lexica.
struct Providers {
    EmbeddingTable char_table;
    EmbeddingTable pho_table;
    EmbeddingTable word_table;
    PronDict dict;
    ChunkTable chunks;
    SentimentLexicon slex;
    HateLexicon hlex;
    double tau = kDefaultTau;
    std::uint64_t seed = 1;
};

// normalize -> find_target -> embedding matrices. The per-message rng for
// the random-fallback branch is derived from providers.seed and a hash of
// the token sequence, so preparation is deterministic.
ModelInput prepare_input(const TokenSeq& tokens, const Providers& providers,
                         const ModelConfig& cfg);

ModelInput prepare_input(const TargetSplit& split, const Providers& providers,
                         const ModelConfig& cfg);

Prediction predict(const ModelParams& params, const ModelConfig& cfg, const RawMessage& raw,
                   const Providers& providers);

}  // namespace swe2
