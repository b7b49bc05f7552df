#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swe2/embeddings.hpp"
#include "swe2/rng.hpp"
#include "swe2/targetword.hpp"

namespace swe2 {

enum class Label : int { Legitimate = 0, HateSpeech = 1 };

struct ModelConfig {
    int char_dim = 20;
    int pho_dim = 20;
    int word_dim = 50;
    std::vector<int> cnn_kernel_widths = {2, 3, 4};
    int cnn_filters_per_width = 16;
    int lstm_hidden = 64;
    int lstm_layers = 2;
    std::vector<int> mlp_hidden = {128, 64};
    double dropout_rate = 0.3;
    int batch_size = 128;
    double learning_rate = 1e-3;
    int epochs = 10;
    std::vector<double> class_weights = {1.0, 1.0};
    std::uint64_t seed = 1;
    bool ablate_char = false;
    bool ablate_pho = false;
    bool ablate_lstms = false;

    int cnn_out_dim() const {
        return cnn_filters_per_width * static_cast<int>(cnn_kernel_widths.size());
    }
    // U_ForLast + U_BacLast + U_Char + U_Pho, minus whatever is ablated.
    int u_loc_dim() const;
    // Attn + Max + Mean over U_Glo rows.
    int u_glo2_dim() const { return ablate_lstms ? 0 : 3 * lstm_hidden; }
    int feature_dim() const { return u_glo2_dim() + u_loc_dim(); }

    void validate() const;
};

// All trainable tensors, addressed by name. Vectors are stored as n x 1.
struct ModelParams {
    std::map<std::string, Eigen::MatrixXd> tensors;

    Eigen::MatrixXd& at(const std::string& name);
    const Eigen::MatrixXd& at(const std::string& name) const;

    ModelParams zeros_like() const;
    std::size_t total_coeffs() const;
};

// Embedding matrices for one message, looked up before the network runs.
// Word-level rows never receive gradients (providers are pretrained).
struct ModelInput {
    Eigen::MatrixXd v_char;  // target word chars x char_dim (>= 4 rows)
    Eigen::MatrixXd v_pho;   // target word phonemes x pho_dim (>= 4 rows)
    Eigen::MatrixXd u_bef;   // before-context word vectors (>= 1 row, BOS if empty)
    Eigen::MatrixXd u_aft;   // after-context word vectors, already reversed (>= 1 row, EOS if empty)
};

struct Activations {
    Eigen::VectorXd u_char, u_pho;
    Eigen::MatrixXd u_for, u_bac;  // per-step layer-2 LSTM outputs
    Eigen::VectorXd u_for_last, u_bac_last;
    Eigen::MatrixXd u_glo;  // rest rows of both LSTMs stacked, may be 0 x H
    Eigen::VectorXd u_loc, u_glo2;
    Eigen::VectorXd attention_weights;  // one per u_glo row
    Eigen::VectorXd logits;
};

struct Prediction {
    Label label = Label::Legitimate;
    double prob_hate = 0.0;
};

struct TrainSample {
    ModelInput input;
    Label label = Label::Legitimate;
};

struct EpochStats {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double valid_accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;
};

ModelParams build(const ModelConfig& cfg);

// Per-sample intermediates kept for backward().
struct CnnBankCache {
    std::vector<int> argmax;        // winning window start per filter
    Eigen::VectorXd max_value;      // post-ReLU max per filter
};
struct CnnCache {
    std::vector<CnnBankCache> banks;  // one per kernel width
};
struct LstmLayerCache {
    Eigen::MatrixXd x, gi, gf, gg, go, c, tanh_c, h;  // one row per step
};
struct LstmCache {
    std::vector<LstmLayerCache> layers;
};
struct ForwardCache {
    ModelInput input;
    CnnCache cnn_char, cnn_pho;
    LstmCache lstm_fwd, lstm_bwd;
    Eigen::MatrixXd attn_hidden;  // tanh(W h_r + b) per u_glo row
    std::vector<int> max_arg;     // winning u_glo row per column
    std::vector<Eigen::VectorXd> mlp_inputs;   // input to each MLP layer (post-dropout)
    std::vector<Eigen::VectorXd> mlp_dropout;  // inverted dropout masks (empty = off)
    Activations act;
};

// Dropout masks are drawn from *dropout_rng when given, otherwise dropout
// is disabled (inference / gradient checks).
Activations forward(const ModelParams& params, const ModelConfig& cfg, const ModelInput& input,
                    ForwardCache* cache = nullptr, Rng* dropout_rng = nullptr);

void backward(const ModelParams& params, const ModelConfig& cfg, const ForwardCache& cache,
              const Eigen::VectorXd& dlogits, ModelParams& grads);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

double loss(const Eigen::VectorXd& logits, Label label, const std::vector<double>& class_weights);

// d loss / d logits for the weighted cross-entropy above.
Eigen::VectorXd loss_grad(const Eigen::VectorXd& logits, Label label,
                          const std::vector<double>& class_weights);

TrainHistory train(ModelParams& params, const std::vector<TrainSample>& train_set,
                   const std::vector<TrainSample>& valid_set, const ModelConfig& cfg);

Prediction predict_from_input(const ModelParams& params, const ModelConfig& cfg,
                              const ModelInput& input);

// Max relative error between analytic gradients and central differences
// over >= min_samples randomly chosen parameter coordinates. A non-empty
// name_prefix restricts sampling to tensors whose name starts with it.
double grad_check(const ModelParams& params, const ModelConfig& cfg,
                  const std::vector<TrainSample>& batch, double epsilon = 1e-5,
                  std::size_t min_samples = 200, std::uint64_t seed = 17,
                  const std::string& name_prefix = "");

void save_checkpoint(const ModelParams& params, const ModelConfig& cfg, const std::string& path);
std::pair<ModelParams, ModelConfig> load_checkpoint(const std::string& path);

std::string config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const std::string& json_text);

}  // namespace swe2
