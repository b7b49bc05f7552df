#include "swe2/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swe2/errors.hpp"

namespace swe2 {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd flatten_window(const Eigen::MatrixXd& x, int start, int width) {
    const Eigen::Index d = x.cols();
    Eigen::VectorXd win(width * d);
    for (int r = 0; r < width; ++r) win.segment(r * d, d) = x.row(start + r);
    return win;
}

struct LstmGates {
    Eigen::VectorXd i, f, g, o;
};

LstmGates split_gates(const Eigen::VectorXd& z, int h) {
    LstmGates gates;
    gates.i = z.segment(0, h).unaryExpr([](double v) { return sigmoid(v); });
    gates.f = z.segment(h, h).unaryExpr([](double v) { return sigmoid(v); });
    gates.g = z.segment(2 * h, h).array().tanh();
    gates.o = z.segment(3 * h, h).unaryExpr([](double v) { return sigmoid(v); });
    return gates;
}

}  // namespace

int ModelConfig::u_loc_dim() const {
    int d = ablate_lstms ? 0 : 2 * lstm_hidden;
    if (!ablate_char) d += cnn_out_dim();
    if (!ablate_pho) d += cnn_out_dim();
    return d;
}

void ModelConfig::validate() const {
    if (char_dim <= 0 || pho_dim <= 0 || word_dim <= 0 || lstm_hidden <= 0 || lstm_layers <= 0 ||
        cnn_filters_per_width <= 0 || batch_size <= 0 || epochs <= 0)
        throw InvalidConfig("all dimensions must be positive");
    if (cnn_kernel_widths.empty()) throw InvalidConfig("need at least one CNN kernel width");
    for (int w : cnn_kernel_widths)
        if (w < 1 || static_cast<std::size_t>(w) > kMinRows)
            throw InvalidConfig("CNN kernel widths must lie in [1, 4]");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw InvalidConfig("dropout_rate in [0,1)");
    if (class_weights.size() != 2 || class_weights[0] <= 0 || class_weights[1] <= 0)
        throw InvalidConfig("need two positive class weights");
    if (learning_rate < 0) throw InvalidConfig("learning_rate must be >= 0");
    if (ablate_lstms && ablate_char && ablate_pho)
        throw InvalidConfig("cannot ablate every channel");
    for (int h : mlp_hidden)
        if (h <= 0) throw InvalidConfig("MLP hidden sizes must be positive");
}

Eigen::MatrixXd& ModelParams::at(const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ShapeMismatch("unknown tensor: " + name);
    return it->second;
}

const Eigen::MatrixXd& ModelParams::at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ShapeMismatch("unknown tensor: " + name);
    return it->second;
}

ModelParams ModelParams::zeros_like() const {
    ModelParams z;
    for (const auto& [name, t] : tensors) z.tensors[name] = Eigen::MatrixXd::Zero(t.rows(), t.cols());
    return z;
}

std::size_t ModelParams::total_coeffs() const {
    std::size_t n = 0;
    for (const auto& [name, t] : tensors) n += static_cast<std::size_t>(t.size());
    return n;
}

ModelParams build(const ModelConfig& cfg) {
    cfg.validate();
    ModelParams p;
    const int h = cfg.lstm_hidden;
    const int f = cfg.cnn_filters_per_width;

    auto add = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
        p.tensors[name] = Eigen::MatrixXd::Zero(rows, cols);
    };

    if (!cfg.ablate_char)
        for (int w : cfg.cnn_kernel_widths) {
            add("cnn_char.w" + std::to_string(w) + ".W", f, w * cfg.char_dim);
            add("cnn_char.w" + std::to_string(w) + ".b", f, 1);
        }
    if (!cfg.ablate_pho)
        for (int w : cfg.cnn_kernel_widths) {
            add("cnn_pho.w" + std::to_string(w) + ".W", f, w * cfg.pho_dim);
            add("cnn_pho.w" + std::to_string(w) + ".b", f, 1);
        }
    if (!cfg.ablate_lstms) {
        for (const char* dir : {"lstm_fwd", "lstm_bwd"})
            for (int layer = 0; layer < cfg.lstm_layers; ++layer) {
                const int in = layer == 0 ? cfg.word_dim : h;
                std::string base = std::string(dir) + ".l" + std::to_string(layer) + ".";
                add(base + "Wx", 4 * h, in);
                add(base + "Wh", 4 * h, h);
                add(base + "b", 4 * h, 1);
            }
        add("attn.W", h, h);
        add("attn.b", h, 1);
        add("attn.ctx", h, 1);
    }
    {
        int in = cfg.feature_dim();
        for (std::size_t i = 0; i < cfg.mlp_hidden.size(); ++i) {
            add("mlp." + std::to_string(i) + ".W", cfg.mlp_hidden[i], in);
            add("mlp." + std::to_string(i) + ".b", cfg.mlp_hidden[i], 1);
            in = cfg.mlp_hidden[i];
        }
        add("mlp." + std::to_string(cfg.mlp_hidden.size()) + ".W", 2, in);
        add("mlp." + std::to_string(cfg.mlp_hidden.size()) + ".b", 2, 1);
    }

    // Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] on weight matrices, biases
    // zero except LSTM forget gates at 1. Map order makes this seed-stable.
    Rng rng(cfg.seed);
    for (auto& [name, t] : p.tensors) {
        if (name.ends_with(".b")) continue;
        if (name == "attn.ctx" || name == "attn.b") {
            double bound = 1.0 / std::sqrt(static_cast<double>(h));
            for (Eigen::Index k = 0; k < t.size(); ++k) t(k) = rng.uniform(-bound, bound);
            continue;
        }
        double bound = 1.0 / std::sqrt(static_cast<double>(t.cols()));
        for (Eigen::Index r = 0; r < t.rows(); ++r)
            for (Eigen::Index c2 = 0; c2 < t.cols(); ++c2) t(r, c2) = rng.uniform(-bound, bound);
    }
    if (!cfg.ablate_lstms)
        for (const char* dir : {"lstm_fwd", "lstm_bwd"})
            for (int layer = 0; layer < cfg.lstm_layers; ++layer) {
                auto& b = p.at(std::string(dir) + ".l" + std::to_string(layer) + ".b");
                b.block(h, 0, h, 1).setOnes();
            }
    return p;
}

namespace {

Eigen::VectorXd cnn_forward(const ModelParams& params, const ModelConfig& cfg,
                            const std::string& prefix, const Eigen::MatrixXd& x,
                            CnnCache* cache) {
    const int f = cfg.cnn_filters_per_width;
    Eigen::VectorXd out(cfg.cnn_out_dim());
    int offset = 0;
    for (int w : cfg.cnn_kernel_widths) {
        const auto& weight = params.at(prefix + ".w" + std::to_string(w) + ".W");
        const auto& bias = params.at(prefix + ".w" + std::to_string(w) + ".b");
        if (weight.cols() != w * x.cols())
            throw ShapeMismatch(prefix + " input width mismatch");
        Eigen::VectorXd best = Eigen::VectorXd::Constant(f, -std::numeric_limits<double>::infinity());
        std::vector<int> arg(f, 0);
        const int steps = static_cast<int>(x.rows()) - w + 1;
        for (int t = 0; t < steps; ++t) {
            Eigen::VectorXd pre = weight * flatten_window(x, t, w) + bias.col(0);
            for (int k = 0; k < f; ++k) {
                double relu = std::max(0.0, pre[k]);
                if (relu > best[k]) {
                    best[k] = relu;
                    arg[k] = t;
                }
            }
        }
        for (int k = 0; k < f; ++k) best[k] = std::max(0.0, best[k]);
        out.segment(offset, f) = best;
        if (cache) cache->banks.push_back({arg, best});
        offset += f;
    }
    return out;
}

void cnn_backward(const ModelParams& params, const ModelConfig& cfg, const std::string& prefix,
                  const Eigen::MatrixXd& x, const CnnCache& cache, const Eigen::VectorXd& dout,
                  ModelParams& grads) {
    const int f = cfg.cnn_filters_per_width;
    int offset = 0;
    for (std::size_t wi = 0; wi < cfg.cnn_kernel_widths.size(); ++wi) {
        const int w = cfg.cnn_kernel_widths[wi];
        auto& dW = grads.at(prefix + ".w" + std::to_string(w) + ".W");
        auto& db = grads.at(prefix + ".w" + std::to_string(w) + ".b");
        const auto& bank = cache.banks[wi];
        for (int k = 0; k < f; ++k) {
            // Gradient flows only through the winning window, and only when
            // the ReLU was active there.
            if (bank.max_value[k] <= 0.0) continue;
            double d = dout[offset + k];
            if (d == 0.0) continue;
            Eigen::VectorXd win = flatten_window(x, bank.argmax[k], w);
            dW.row(k) += d * win.transpose();
            db(k, 0) += d;
        }
        offset += f;
    }
}

// Runs all layers over the input rows; returns layer-top hidden states, one
// row per step.
Eigen::MatrixXd lstm_forward(const ModelParams& params, const ModelConfig& cfg,
                             const std::string& prefix, const Eigen::MatrixXd& x,
                             LstmCache* cache) {
    const int h = cfg.lstm_hidden;
    const Eigen::Index steps = x.rows();
    Eigen::MatrixXd layer_in = x;
    for (int layer = 0; layer < cfg.lstm_layers; ++layer) {
        std::string base = prefix + ".l" + std::to_string(layer) + ".";
        const auto& wx = params.at(base + "Wx");
        const auto& wh = params.at(base + "Wh");
        const auto& b = params.at(base + "b");
        LstmLayerCache lc;
        lc.x = layer_in;
        lc.gi.resize(steps, h);
        lc.gf.resize(steps, h);
        lc.gg.resize(steps, h);
        lc.go.resize(steps, h);
        lc.c.resize(steps, h);
        lc.tanh_c.resize(steps, h);
        lc.h.resize(steps, h);
        Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
        Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
        for (Eigen::Index t = 0; t < steps; ++t) {
            Eigen::VectorXd z = wx * layer_in.row(t).transpose() + wh * h_prev + b.col(0);
            LstmGates gates = split_gates(z, h);
            Eigen::VectorXd c = gates.f.cwiseProduct(c_prev) + gates.i.cwiseProduct(gates.g);
            Eigen::VectorXd tc = c.array().tanh();
            Eigen::VectorXd ht = gates.o.cwiseProduct(tc);
            lc.gi.row(t) = gates.i;
            lc.gf.row(t) = gates.f;
            lc.gg.row(t) = gates.g;
            lc.go.row(t) = gates.o;
            lc.c.row(t) = c;
            lc.tanh_c.row(t) = tc;
            lc.h.row(t) = ht;
            h_prev = ht;
            c_prev = c;
        }
        layer_in = lc.h;
        if (cache) cache->layers.push_back(std::move(lc));
    }
    return layer_in;
}

void lstm_backward(const ModelParams& params, const ModelConfig& cfg, const std::string& prefix,
                   const LstmCache& cache, Eigen::MatrixXd dh_top, ModelParams& grads) {
    const int h = cfg.lstm_hidden;
    for (int layer = cfg.lstm_layers - 1; layer >= 0; --layer) {
        std::string base = prefix + ".l" + std::to_string(layer) + ".";
        const auto& wx = params.at(base + "Wx");
        const auto& wh = params.at(base + "Wh");
        auto& dwx = grads.at(base + "Wx");
        auto& dwh = grads.at(base + "Wh");
        auto& db = grads.at(base + "b");
        const auto& lc = cache.layers[layer];
        const Eigen::Index steps = lc.h.rows();
        Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(steps, lc.x.cols());
        Eigen::VectorXd dh_carry = Eigen::VectorXd::Zero(h);
        Eigen::VectorXd dc_carry = Eigen::VectorXd::Zero(h);
        for (Eigen::Index t = steps - 1; t >= 0; --t) {
            Eigen::VectorXd dh = dh_top.row(t).transpose() + dh_carry;
            Eigen::VectorXd gi = lc.gi.row(t), gf = lc.gf.row(t), gg = lc.gg.row(t),
                            go = lc.go.row(t), tc = lc.tanh_c.row(t);
            Eigen::VectorXd c_prev =
                t > 0 ? Eigen::VectorXd(lc.c.row(t - 1)) : Eigen::VectorXd(Eigen::VectorXd::Zero(h));
            Eigen::VectorXd h_prev =
                t > 0 ? Eigen::VectorXd(lc.h.row(t - 1)) : Eigen::VectorXd(Eigen::VectorXd::Zero(h));

            Eigen::VectorXd d_o = dh.cwiseProduct(tc);
            Eigen::VectorXd dc = dh.cwiseProduct(go).cwiseProduct(
                                     (1.0 - tc.array().square()).matrix()) +
                                 dc_carry;
            Eigen::VectorXd d_i = dc.cwiseProduct(gg);
            Eigen::VectorXd d_g = dc.cwiseProduct(gi);
            Eigen::VectorXd d_f = dc.cwiseProduct(c_prev);
            dc_carry = dc.cwiseProduct(gf);

            Eigen::VectorXd dz(4 * h);
            dz.segment(0, h) = d_i.cwiseProduct(gi).cwiseProduct((1.0 - gi.array()).matrix());
            dz.segment(h, h) = d_f.cwiseProduct(gf).cwiseProduct((1.0 - gf.array()).matrix());
            dz.segment(2 * h, h) = d_g.cwiseProduct((1.0 - gg.array().square()).matrix());
            dz.segment(3 * h, h) = d_o.cwiseProduct(go).cwiseProduct((1.0 - go.array()).matrix());

            dwx += dz * lc.x.row(t);
            dwh += dz * h_prev.transpose();
            db.col(0) += dz;
            dh_carry = wh.transpose() * dz;
            dx.row(t) = (wx.transpose() * dz).transpose();
        }
        dh_top = dx;  // becomes dh for the layer below
    }
}

}  // namespace

Activations forward(const ModelParams& params, const ModelConfig& cfg, const ModelInput& input,
                    ForwardCache* cache, Rng* dropout_rng) {
    const int h = cfg.lstm_hidden;
    Activations act;
    if (cache) cache->input = input;

    if (!cfg.ablate_char)
        act.u_char = cnn_forward(params, cfg, "cnn_char", input.v_char,
                                 cache ? &cache->cnn_char : nullptr);
    if (!cfg.ablate_pho)
        act.u_pho =
            cnn_forward(params, cfg, "cnn_pho", input.v_pho, cache ? &cache->cnn_pho : nullptr);

    if (!cfg.ablate_lstms) {
        if (input.u_bef.rows() < 1 || input.u_aft.rows() < 1)
            throw ShapeMismatch("before/after stacks need >= 1 row (sentinel injection)");
        act.u_for = lstm_forward(params, cfg, "lstm_fwd", input.u_bef,
                                 cache ? &cache->lstm_fwd : nullptr);
        act.u_bac = lstm_forward(params, cfg, "lstm_bwd", input.u_aft,
                                 cache ? &cache->lstm_bwd : nullptr);
        act.u_for_last = act.u_for.row(act.u_for.rows() - 1);
        act.u_bac_last = act.u_bac.row(act.u_bac.rows() - 1);
        const Eigen::Index rest_f = act.u_for.rows() - 1;
        const Eigen::Index rest_b = act.u_bac.rows() - 1;
        act.u_glo.resize(rest_f + rest_b, h);
        if (rest_f > 0) act.u_glo.topRows(rest_f) = act.u_for.topRows(rest_f);
        if (rest_b > 0) act.u_glo.bottomRows(rest_b) = act.u_bac.topRows(rest_b);

        const Eigen::Index rows = act.u_glo.rows();
        Eigen::VectorXd attn_out = Eigen::VectorXd::Zero(h);
        Eigen::VectorXd max_out = Eigen::VectorXd::Zero(h);
        Eigen::VectorXd mean_out = Eigen::VectorXd::Zero(h);
        if (rows > 0) {
            const auto& aw = params.at("attn.W");
            const auto& ab = params.at("attn.b");
            const auto& ctx = params.at("attn.ctx");
            Eigen::MatrixXd hidden(rows, h);
            Eigen::VectorXd scores(rows);
            for (Eigen::Index r = 0; r < rows; ++r) {
                Eigen::VectorXd a = (aw * act.u_glo.row(r).transpose() + ab.col(0)).array().tanh();
                hidden.row(r) = a;
                scores[r] = ctx.col(0).dot(a);
            }
            Eigen::VectorXd alpha = softmax(scores);
            act.attention_weights = alpha;
            attn_out = act.u_glo.transpose() * alpha;
            std::vector<int> arg(h, 0);
            for (int j = 0; j < h; ++j) {
                Eigen::Index r;
                max_out[j] = act.u_glo.col(j).maxCoeff(&r);
                arg[j] = static_cast<int>(r);
            }
            mean_out = act.u_glo.colwise().mean();
            if (cache) {
                cache->attn_hidden = hidden;
                cache->max_arg = arg;
            }
        }
        act.u_glo2.resize(3 * h);
        act.u_glo2 << attn_out, max_out, mean_out;
    }

    act.u_loc.resize(cfg.u_loc_dim());
    {
        int off = 0;
        if (!cfg.ablate_lstms) {
            act.u_loc.segment(off, h) = act.u_for_last;
            off += h;
            act.u_loc.segment(off, h) = act.u_bac_last;
            off += h;
        }
        if (!cfg.ablate_char) {
            act.u_loc.segment(off, act.u_char.size()) = act.u_char;
            off += static_cast<int>(act.u_char.size());
        }
        if (!cfg.ablate_pho) {
            act.u_loc.segment(off, act.u_pho.size()) = act.u_pho;
            off += static_cast<int>(act.u_pho.size());
        }
    }

    Eigen::VectorXd feature(cfg.feature_dim());
    if (cfg.ablate_lstms)
        feature = act.u_loc;
    else
        feature << act.u_glo2, act.u_loc;

    // MLP head: ReLU hidden layers with (inverted) dropout, linear output.
    Eigen::VectorXd cur = feature;
    const std::size_t n_layers = cfg.mlp_hidden.size() + 1;
    for (std::size_t i = 0; i < n_layers; ++i) {
        if (cache) cache->mlp_inputs.push_back(cur);
        const auto& w = params.at("mlp." + std::to_string(i) + ".W");
        const auto& b = params.at("mlp." + std::to_string(i) + ".b");
        cur = w * cur + b.col(0);
        if (i + 1 < n_layers) {
            cur = cur.cwiseMax(0.0);
            if (dropout_rng && cfg.dropout_rate > 0.0) {
                Eigen::VectorXd mask(cur.size());
                const double keep = 1.0 - cfg.dropout_rate;
                for (Eigen::Index k = 0; k < cur.size(); ++k)
                    mask[k] = dropout_rng->uniform01() < keep ? 1.0 / keep : 0.0;
                cur = cur.cwiseProduct(mask);
                if (cache) cache->mlp_dropout.push_back(mask);
            } else if (cache) {
                cache->mlp_dropout.push_back(Eigen::VectorXd());
            }
        }
    }
    act.logits = cur;
    if (cache) cache->act = act;
    return act;
}

void backward(const ModelParams& params, const ModelConfig& cfg, const ForwardCache& cache,
              const Eigen::VectorXd& dlogits, ModelParams& grads) {
    const int h = cfg.lstm_hidden;
    const Activations& act = cache.act;

    // MLP backward.
    Eigen::VectorXd d = dlogits;
    const std::size_t n_layers = cfg.mlp_hidden.size() + 1;
    for (std::size_t i = n_layers; i-- > 0;) {
        const auto& w = params.at("mlp." + std::to_string(i) + ".W");
        auto& dw = grads.at("mlp." + std::to_string(i) + ".W");
        auto& db = grads.at("mlp." + std::to_string(i) + ".b");
        const Eigen::VectorXd& in = cache.mlp_inputs[i];
        dw += d * in.transpose();
        db.col(0) += d;
        d = w.transpose() * d;
        if (i > 0) {
            // Undo dropout and ReLU of the layer below. Its post-activation
            // (post-dropout) output is exactly mlp_inputs[i].
            const Eigen::VectorXd& mask = cache.mlp_dropout[i - 1];
            if (mask.size() > 0) d = d.cwiseProduct(mask);
            const Eigen::VectorXd& post = cache.mlp_inputs[i];
            for (Eigen::Index k = 0; k < d.size(); ++k)
                if (post[k] <= 0.0) d[k] = 0.0;
        }
    }
    const Eigen::VectorXd dfeature = d;

    Eigen::VectorXd du_loc;
    if (cfg.ablate_lstms) {
        du_loc = dfeature;
    } else {
        du_loc = dfeature.tail(cfg.u_loc_dim());
        Eigen::VectorXd du_glo2 = dfeature.head(3 * h);
        Eigen::VectorXd d_attn = du_glo2.segment(0, h);
        Eigen::VectorXd d_max = du_glo2.segment(h, h);
        Eigen::VectorXd d_mean = du_glo2.segment(2 * h, h);

        const Eigen::Index rows = act.u_glo.rows();
        Eigen::MatrixXd du_glo = Eigen::MatrixXd::Zero(rows, h);
        if (rows > 0) {
            const auto& aw = params.at("attn.W");
            const auto& ctx = params.at("attn.ctx");
            auto& daw = grads.at("attn.W");
            auto& dab = grads.at("attn.b");
            auto& dctx = grads.at("attn.ctx");
            const Eigen::VectorXd& alpha = act.attention_weights;

            // attn_out = sum_r alpha_r * u_glo_r
            Eigen::VectorXd dalpha(rows);
            for (Eigen::Index r = 0; r < rows; ++r) {
                dalpha[r] = d_attn.dot(act.u_glo.row(r));
                du_glo.row(r) += alpha[r] * d_attn.transpose();
            }
            // softmax backward
            double dot = alpha.dot(dalpha);
            Eigen::VectorXd dscores = alpha.cwiseProduct(dalpha.array().matrix() -
                                                         Eigen::VectorXd::Constant(rows, dot));
            for (Eigen::Index r = 0; r < rows; ++r) {
                Eigen::VectorXd a = cache.attn_hidden.row(r);
                dctx.col(0) += dscores[r] * a;
                Eigen::VectorXd da = dscores[r] * ctx.col(0);
                Eigen::VectorXd dpre = da.cwiseProduct((1.0 - a.array().square()).matrix());
                daw += dpre * act.u_glo.row(r);
                dab.col(0) += dpre;
                du_glo.row(r) += (aw.transpose() * dpre).transpose();
            }
            for (int j = 0; j < h; ++j) du_glo(cache.max_arg[j], j) += d_max[j];
            double inv = 1.0 / static_cast<double>(rows);
            for (Eigen::Index r = 0; r < rows; ++r) du_glo.row(r) += inv * d_mean.transpose();
        }

        // Per-step gradients for the layer-top outputs of both LSTMs.
        const Eigen::Index steps_f = act.u_for.rows();
        const Eigen::Index steps_b = act.u_bac.rows();
        Eigen::MatrixXd dh_for = Eigen::MatrixXd::Zero(steps_f, h);
        Eigen::MatrixXd dh_bac = Eigen::MatrixXd::Zero(steps_b, h);
        const Eigen::Index rest_f = steps_f - 1;
        if (rest_f > 0) dh_for.topRows(rest_f) = du_glo.topRows(rest_f);
        if (steps_b - 1 > 0) dh_bac.topRows(steps_b - 1) = du_glo.bottomRows(steps_b - 1);
        dh_for.row(steps_f - 1) = du_loc.segment(0, h).transpose();
        dh_bac.row(steps_b - 1) = du_loc.segment(h, h).transpose();
        lstm_backward(params, cfg, "lstm_fwd", cache.lstm_fwd, dh_for, grads);
        lstm_backward(params, cfg, "lstm_bwd", cache.lstm_bwd, dh_bac, grads);
    }

    int off = cfg.ablate_lstms ? 0 : 2 * h;
    if (!cfg.ablate_char) {
        cnn_backward(params, cfg, "cnn_char", cache.input.v_char, cache.cnn_char,
                     du_loc.segment(off, cfg.cnn_out_dim()), grads);
        off += cfg.cnn_out_dim();
    }
    if (!cfg.ablate_pho)
        cnn_backward(params, cfg, "cnn_pho", cache.input.v_pho, cache.cnn_pho,
                     du_loc.segment(off, cfg.cnn_out_dim()), grads);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    Eigen::VectorXd z = logits.array() - logits.maxCoeff();
    Eigen::VectorXd e = z.array().exp();
    return e / e.sum();
}

double loss(const Eigen::VectorXd& logits, Label label, const std::vector<double>& class_weights) {
    Eigen::VectorXd p = softmax(logits);
    int y = static_cast<int>(label);
    return -class_weights[static_cast<std::size_t>(y)] * std::log(std::max(p[y], 1e-300));
}

Eigen::VectorXd loss_grad(const Eigen::VectorXd& logits, Label label,
                          const std::vector<double>& class_weights) {
    Eigen::VectorXd p = softmax(logits);
    int y = static_cast<int>(label);
    p[y] -= 1.0;
    return class_weights[static_cast<std::size_t>(y)] * p;
}

Prediction predict_from_input(const ModelParams& params, const ModelConfig& cfg,
                              const ModelInput& input) {
    Activations act = forward(params, cfg, input);
    Eigen::VectorXd p = softmax(act.logits);
    Prediction pred;
    pred.prob_hate = p[1];
    pred.label = p[1] > p[0] ? Label::HateSpeech : Label::Legitimate;
    return pred;
}

TrainHistory train(ModelParams& params, const std::vector<TrainSample>& train_set,
                   const std::vector<TrainSample>& valid_set, const ModelConfig& cfg) {
    cfg.validate();
    if (train_set.empty()) throw EmptyDataset();

    ModelParams m = params.zeros_like();
    ModelParams v = params.zeros_like();
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::int64_t step = 0;

    TrainHistory history;
    ModelParams best = params;
    double best_acc = -1.0;

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(2 * epoch)));
        Rng dropout_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(2 * epoch + 1)));
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t correct = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            std::size_t end = std::min(order.size(), begin + cfg.batch_size);
            ModelParams grads = params.zeros_like();
            for (std::size_t k = begin; k < end; ++k) {
                const TrainSample& s = train_set[order[k]];
                ForwardCache cache;
                Activations act = forward(params, cfg, s.input, &cache, &dropout_rng);
                epoch_loss += loss(act.logits, s.label, cfg.class_weights);
                Eigen::Index pred;
                act.logits.maxCoeff(&pred);
                if (pred == static_cast<Eigen::Index>(s.label)) ++correct;
                Eigen::VectorXd dlogits = loss_grad(act.logits, s.label, cfg.class_weights);
                backward(params, cfg, cache, dlogits, grads);
            }
            const double inv_batch = 1.0 / static_cast<double>(end - begin);
            ++step;
            const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (auto& [name, g] : grads.tensors) {
                Eigen::MatrixXd gs = g * inv_batch;
                auto& mt = m.tensors[name];
                auto& vt = v.tensors[name];
                mt = beta1 * mt + (1.0 - beta1) * gs;
                vt = beta2 * vt + (1.0 - beta2) * gs.cwiseProduct(gs);
                params.tensors[name].array() -=
                    cfg.learning_rate * (mt.array() / corr1) /
                    ((vt.array() / corr2).sqrt() + adam_eps);
            }
        }

        EpochStats stats;
        stats.train_loss = epoch_loss / static_cast<double>(train_set.size());
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
        if (!valid_set.empty()) {
            std::size_t vc = 0;
            for (const auto& s : valid_set) {
                Prediction p = predict_from_input(params, cfg, s.input);
                if (p.label == s.label) ++vc;
            }
            stats.valid_accuracy = static_cast<double>(vc) / static_cast<double>(valid_set.size());
        } else {
            stats.valid_accuracy = stats.train_accuracy;
        }
        history.epochs.push_back(stats);
        if (stats.valid_accuracy > best_acc) {
            best_acc = stats.valid_accuracy;
            best = params;
            history.best_epoch = epoch;
        }
    }
    params = best;
    return history;
}

double grad_check(const ModelParams& params, const ModelConfig& cfg,
                  const std::vector<TrainSample>& batch, double epsilon, std::size_t min_samples,
                  std::uint64_t seed, const std::string& name_prefix) {
    auto batch_loss = [&](const ModelParams& p) {
        double total = 0.0;
        for (const auto& s : batch) {
            Activations act = forward(p, cfg, s.input);
            total += loss(act.logits, s.label, cfg.class_weights);
        }
        return total;
    };

    ModelParams grads = params.zeros_like();
    for (const auto& s : batch) {
        ForwardCache cache;
        Activations act = forward(params, cfg, s.input, &cache);
        backward(params, cfg, cache, loss_grad(act.logits, s.label, cfg.class_weights), grads);
    }

    // Flat index -> (tensor, coeff) addressing over the name-ordered map.
    std::vector<std::pair<const std::string*, Eigen::Index>> layout;
    std::size_t total = 0;
    for (const auto& [name, t] : params.tensors) {
        if (!name_prefix.empty() && name.rfind(name_prefix, 0) != 0) continue;
        layout.emplace_back(&name, t.size());
        total += static_cast<std::size_t>(t.size());
    }

    Rng rng(seed);
    ModelParams work = params;
    double worst = 0.0;
    const std::size_t n_samples = std::min(total, min_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        std::size_t flat = rng.uniform_index(total);
        std::size_t tensor_idx = 0;
        while (flat >= static_cast<std::size_t>(layout[tensor_idx].second)) {
            flat -= static_cast<std::size_t>(layout[tensor_idx].second);
            ++tensor_idx;
        }
        const std::string& name = *layout[tensor_idx].first;
        Eigen::MatrixXd& t = work.tensors[name];
        const Eigen::Index k = static_cast<Eigen::Index>(flat);
        const double orig = t(k);
        t(k) = orig + epsilon;
        double lp = batch_loss(work);
        t(k) = orig - epsilon;
        double lm = batch_loss(work);
        t(k) = orig;
        double fd = (lp - lm) / (2.0 * epsilon);
        double g = grads.tensors[name](k);
        double rel = std::fabs(g - fd) / std::max(1.0, std::fabs(g) + std::fabs(fd));
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace swe2
