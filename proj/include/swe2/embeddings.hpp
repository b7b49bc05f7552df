#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "swe2/phonetics.hpp"

namespace swe2 {

enum class EmbeddingKind { Char, Phoneme, Word };

inline const std::string kPadSymbol = "<PAD>";

// CNN kernels go up to width 4; every embedded word is padded to at least
// that many rows.
constexpr std::size_t kMinRows = 4;

struct EmbeddingTable {
    int dim = 0;
    EmbeddingKind kind = EmbeddingKind::Char;
    std::map<std::string, Eigen::VectorXd> vectors;

    bool contains(const std::string& symbol) const { return vectors.count(symbol) > 0; }
};

EmbeddingTable make_table(int dim, EmbeddingKind kind);

struct CbowConfig {
    int dim = 20;
    int window = 3;
    int epochs = 15;
    double learning_rate = 0.05;
    int negative_samples = 5;
    std::uint64_t seed = 1;
};

struct CbowHistory {
    std::vector<double> epoch_mean_loss;
};

// CBOW with negative sampling: the mean of the context vectors predicts the
// center symbol. Single-threaded, SGD with a linearly decaying rate,
// deterministic given cfg.seed.
EmbeddingTable train_cbow(const std::vector<std::vector<std::string>>& corpus,
                          const CbowConfig& cfg, EmbeddingKind kind,
                          CbowHistory* history = nullptr);

// One negative-sampling step's loss and gradients, exposed so tests can
// check the analytic gradient against finite differences.
double cbow_step_loss(const Eigen::MatrixXd& in_vectors, const Eigen::MatrixXd& out_vectors,
                      const std::vector<int>& context, int center,
                      const std::vector<int>& negatives,
                      Eigen::MatrixXd* grad_in = nullptr, Eigen::MatrixXd* grad_out = nullptr);

// word length x dim matrix; unknown characters map to the PAD row; padded
// with PAD rows to at least kMinRows.
Eigen::MatrixXd embed_chars(const std::string& word, const EmbeddingTable& table);

Eigen::MatrixXd embed_phonemes(const std::string& word, const PronDict& dict,
                               const ChunkTable& chunks, const EmbeddingTable& table);

// Text format: header `count dim`, then `symbol v1 ... vdim` per line.
EmbeddingTable load_embedding_table(const std::string& path, EmbeddingKind kind);
EmbeddingTable load_word_vectors(const std::string& path);
void save_embedding_table(const EmbeddingTable& table, const std::string& path);

// Exact lookup with a deterministic OOV policy: unknown tokens get a stable
// unit-norm vector seeded by a hash of the token.
Eigen::VectorXd word_vector(const std::string& token, const EmbeddingTable& table);

}  // namespace swe2
