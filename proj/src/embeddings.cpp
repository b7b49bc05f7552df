#include "swe2/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "swe2/errors.hpp"
#include "swe2/rng.hpp"

namespace swe2 {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// UTF-8 codepoint split; each multibyte sequence is one symbol.
std::vector<std::string> utf8_symbols(const std::string& s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len = 1;
        if ((c & 0x80) == 0)
            len = 1;
        else if ((c & 0xE0) == 0xC0)
            len = 2;
        else if ((c & 0xF0) == 0xE0)
            len = 3;
        else if ((c & 0xF8) == 0xF0)
            len = 4;
        len = std::min(len, s.size() - i);
        out.push_back(s.substr(i, len));
        i += len;
    }
    return out;
}

Eigen::MatrixXd pad_rows(std::vector<Eigen::VectorXd> rows, int dim) {
    std::size_t n = std::max(rows.size(), kMinRows);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i];
    return m;
}

}  // namespace

EmbeddingTable make_table(int dim, EmbeddingKind kind) {
    EmbeddingTable t;
    t.dim = dim;
    t.kind = kind;
    t.vectors[kPadSymbol] = Eigen::VectorXd::Zero(dim);
    return t;
}

double cbow_step_loss(const Eigen::MatrixXd& in_vectors, const Eigen::MatrixXd& out_vectors,
                      const std::vector<int>& context, int center,
                      const std::vector<int>& negatives,
                      Eigen::MatrixXd* grad_in, Eigen::MatrixXd* grad_out) {
    const Eigen::Index dim = in_vectors.cols();
    Eigen::VectorXd h = Eigen::VectorXd::Zero(dim);
    for (int c : context) h += in_vectors.row(c);
    h /= static_cast<double>(context.size());

    double loss = 0.0;
    Eigen::VectorXd dh = Eigen::VectorXd::Zero(dim);
    auto accumulate = [&](int word, double label) {
        double score = sigmoid(out_vectors.row(word).dot(h));
        loss -= label > 0.5 ? std::log(std::max(score, 1e-300))
                            : std::log(std::max(1.0 - score, 1e-300));
        double g = score - label;  // d loss / d (u.h)
        dh += g * out_vectors.row(word).transpose();
        if (grad_out) grad_out->row(word) += g * h.transpose();
    };
    accumulate(center, 1.0);
    for (int n : negatives) accumulate(n, 0.0);

    if (grad_in) {
        Eigen::VectorXd share = dh / static_cast<double>(context.size());
        for (int c : context) grad_in->row(c) += share.transpose();
    }
    return loss;
}

EmbeddingTable train_cbow(const std::vector<std::vector<std::string>>& corpus,
                          const CbowConfig& cfg, EmbeddingKind kind, CbowHistory* history) {
    if (corpus.empty()) throw EmptyCorpus();
    if (cfg.dim <= 0 || cfg.window < 1 || cfg.epochs <= 0 || cfg.learning_rate <= 0 ||
        cfg.negative_samples <= 0)
        throw InvalidConfig("all CbowConfig fields must be positive");

    // Vocabulary in first-seen order so training is deterministic.
    std::vector<std::string> id_to_symbol;
    std::unordered_map<std::string, int> symbol_to_id;
    std::vector<std::int64_t> counts;
    std::vector<std::vector<int>> sequences;
    for (const auto& seq : corpus) {
        if (seq.size() < 2) throw InvalidConfig("every corpus sequence needs length >= 2");
        std::vector<int> ids;
        ids.reserve(seq.size());
        for (const auto& sym : seq) {
            auto it = symbol_to_id.find(sym);
            if (it == symbol_to_id.end()) {
                it = symbol_to_id.emplace(sym, static_cast<int>(id_to_symbol.size())).first;
                id_to_symbol.push_back(sym);
                counts.push_back(0);
            }
            ++counts[it->second];
            ids.push_back(it->second);
        }
        sequences.push_back(std::move(ids));
    }
    const int vocab = static_cast<int>(id_to_symbol.size());

    // Unigram^0.75 table for negative sampling.
    std::vector<int> unigram;
    {
        double total = 0;
        for (auto c : counts) total += std::pow(static_cast<double>(c), 0.75);
        const int table_size = std::max(vocab * 64, 4096);
        unigram.reserve(table_size);
        for (int w = 0; w < vocab; ++w) {
            int slots = std::max<int>(
                1, static_cast<int>(std::pow(static_cast<double>(counts[w]), 0.75) / total *
                                    table_size));
            unigram.insert(unigram.end(), slots, w);
        }
    }

    Rng rng(cfg.seed);
    Eigen::MatrixXd in_vectors(vocab, cfg.dim);
    for (int w = 0; w < vocab; ++w)
        for (int d = 0; d < cfg.dim; ++d)
            in_vectors(w, d) = rng.uniform(-0.5, 0.5) / cfg.dim;
    Eigen::MatrixXd out_vectors = Eigen::MatrixXd::Zero(vocab, cfg.dim);

    std::int64_t total_centers = 0;
    for (const auto& seq : sequences) total_centers += static_cast<std::int64_t>(seq.size());
    const std::int64_t total_steps = total_centers * cfg.epochs;

    std::int64_t done = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::int64_t epoch_steps = 0;
        for (const auto& seq : sequences) {
            const int n = static_cast<int>(seq.size());
            for (int pos = 0; pos < n; ++pos, ++done) {
                std::vector<int> context;
                for (int off = -cfg.window; off <= cfg.window; ++off) {
                    int j = pos + off;
                    if (off == 0 || j < 0 || j >= n) continue;
                    context.push_back(seq[j]);
                }
                if (context.empty()) continue;
                std::vector<int> negatives;
                while (static_cast<int>(negatives.size()) < cfg.negative_samples) {
                    int cand = unigram[rng.uniform_index(unigram.size())];
                    if (cand != seq[pos]) negatives.push_back(cand);
                    else if (vocab == 1) break;
                }
                double lr = cfg.learning_rate *
                            std::max(1e-4, 1.0 - static_cast<double>(done) / total_steps);

                // In-place SGD step (gradients applied directly, scaled by lr).
                const Eigen::Index dim = cfg.dim;
                Eigen::VectorXd h = Eigen::VectorXd::Zero(dim);
                for (int c : context) h += in_vectors.row(c);
                h /= static_cast<double>(context.size());
                Eigen::VectorXd dh = Eigen::VectorXd::Zero(dim);
                auto step = [&](int word, double label) {
                    double score = sigmoid(out_vectors.row(word).dot(h));
                    epoch_loss -= label > 0.5 ? std::log(std::max(score, 1e-300))
                                              : std::log(std::max(1.0 - score, 1e-300));
                    double g = score - label;
                    dh += g * out_vectors.row(word).transpose();
                    out_vectors.row(word) -= lr * g * h.transpose();
                };
                step(seq[pos], 1.0);
                for (int neg : negatives) step(neg, 0.0);
                Eigen::VectorXd share = (lr / static_cast<double>(context.size())) * dh;
                for (int c : context) in_vectors.row(c) -= share.transpose();
                ++epoch_steps;
            }
        }
        if (history)
            history->epoch_mean_loss.push_back(epoch_loss / std::max<std::int64_t>(1, epoch_steps));
    }

    // Averaging the input and output matrices aligns directly co-occurring
    // symbols: each word's input vector tracks its neighbours' output
    // vectors, so the mean of the two is close for frequent pairs.
    EmbeddingTable table = make_table(cfg.dim, kind);
    for (int w = 0; w < vocab; ++w)
        table.vectors[id_to_symbol[w]] = 0.5 * (in_vectors.row(w) + out_vectors.row(w));
    return table;
}

Eigen::MatrixXd embed_chars(const std::string& word, const EmbeddingTable& table) {
    if (table.kind != EmbeddingKind::Char) throw ShapeMismatch("embed_chars needs a Char table");
    std::vector<Eigen::VectorXd> rows;
    for (const auto& sym : utf8_symbols(word)) {
        auto it = table.vectors.find(sym);
        rows.push_back(it != table.vectors.end() ? it->second : table.vectors.at(kPadSymbol));
    }
    return pad_rows(std::move(rows), table.dim);
}

Eigen::MatrixXd embed_phonemes(const std::string& word, const PronDict& dict,
                               const ChunkTable& chunks, const EmbeddingTable& table) {
    if (table.kind != EmbeddingKind::Phoneme)
        throw ShapeMismatch("embed_phonemes needs a Phoneme table");
    std::vector<Eigen::VectorXd> rows;
    for (const auto& sym : to_phonemes(word, dict, chunks)) {
        auto it = table.vectors.find(sym);
        rows.push_back(it != table.vectors.end() ? it->second : table.vectors.at(kPadSymbol));
    }
    return pad_rows(std::move(rows), table.dim);
}

EmbeddingTable load_embedding_table(const std::string& path, EmbeddingKind kind) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vector file: " + path);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("missing header", 1);
    ++lineno;
    std::istringstream hs(line);
    std::size_t count = 0;
    int dim = 0;
    if (!(hs >> count >> dim) || dim <= 0) throw ParseError("bad header, expected `count dim`", 1);
    EmbeddingTable table = make_table(dim, kind);
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string symbol;
        if (!(ls >> symbol)) throw ParseError("missing symbol", lineno);
        Eigen::VectorXd v(dim);
        for (int d = 0; d < dim; ++d) {
            if (!(ls >> v[d])) throw ParseError("missing value for \"" + symbol + "\"", lineno);
        }
        double extra;
        if (ls >> extra) throw ParseError("too many values for \"" + symbol + "\"", lineno);
        table.vectors[symbol] = v;  // duplicates: last occurrence wins
        ++seen;
    }
    if (seen != count)
        throw ParseError("header declared " + std::to_string(count) + " symbols, found " +
                             std::to_string(seen),
                         lineno);
    return table;
}

EmbeddingTable load_word_vectors(const std::string& path) {
    return load_embedding_table(path, EmbeddingKind::Word);
}

void save_embedding_table(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write vector file: " + path);
    std::size_t count = 0;
    for (const auto& [sym, v] : table.vectors)
        if (sym != kPadSymbol) ++count;
    out.precision(17);
    out << count << ' ' << table.dim << '\n';
    for (const auto& [sym, v] : table.vectors) {
        if (sym == kPadSymbol) continue;
        out << sym;
        for (int d = 0; d < table.dim; ++d) out << ' ' << v[d];
        out << '\n';
    }
}

Eigen::VectorXd word_vector(const std::string& token, const EmbeddingTable& table) {
    if (table.kind != EmbeddingKind::Word) throw ShapeMismatch("word_vector needs a Word table");
    auto it = table.vectors.find(token);
    if (it != table.vectors.end()) return it->second;
    Rng rng(stable_hash(token));
    Eigen::VectorXd v(table.dim);
    for (int d = 0; d < table.dim; ++d) v[d] = rng.uniform(-1.0, 1.0);
    double norm = v.norm();
    if (norm < 1e-12) {
        v.setZero();
        v[0] = 1.0;
        return v;
    }
    return v / norm;
}

}  // namespace swe2
