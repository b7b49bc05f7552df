#include <fstream>

#include <json.hpp>

#include "swe2/errors.hpp"
#include "swe2/model.hpp"

namespace swe2 {

namespace {

using nlohmann::json;

json config_to_jobj(const ModelConfig& c) {
    return json{{"char_dim", c.char_dim},
                {"pho_dim", c.pho_dim},
                {"word_dim", c.word_dim},
                {"cnn_kernel_widths", c.cnn_kernel_widths},
                {"cnn_filters_per_width", c.cnn_filters_per_width},
                {"lstm_hidden", c.lstm_hidden},
                {"lstm_layers", c.lstm_layers},
                {"mlp_hidden", c.mlp_hidden},
                {"dropout_rate", c.dropout_rate},
                {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"epochs", c.epochs},
                {"class_weights", c.class_weights},
                {"seed", c.seed},
                {"ablate_char", c.ablate_char},
                {"ablate_pho", c.ablate_pho},
                {"ablate_lstms", c.ablate_lstms}};
}

ModelConfig config_from_jobj(const json& j) {
    ModelConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("char_dim", c.char_dim);
    get("pho_dim", c.pho_dim);
    get("word_dim", c.word_dim);
    get("cnn_kernel_widths", c.cnn_kernel_widths);
    get("cnn_filters_per_width", c.cnn_filters_per_width);
    get("lstm_hidden", c.lstm_hidden);
    get("lstm_layers", c.lstm_layers);
    get("mlp_hidden", c.mlp_hidden);
    get("dropout_rate", c.dropout_rate);
    get("batch_size", c.batch_size);
    get("learning_rate", c.learning_rate);
    get("epochs", c.epochs);
    get("class_weights", c.class_weights);
    get("seed", c.seed);
    get("ablate_char", c.ablate_char);
    get("ablate_pho", c.ablate_pho);
    get("ablate_lstms", c.ablate_lstms);
    return c;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const ModelConfig& cfg, const std::string& path) {
    json doc;
    doc["format_version"] = 1;
    doc["config"] = config_to_jobj(cfg);
    json tensors = json::object();
    for (const auto& [name, t] : params.tensors) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < t.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < t.cols(); ++c) row.push_back(t(r, c));
            rows.push_back(std::move(row));
        }
        tensors[name] = std::move(rows);
    }
    doc["params"] = std::move(tensors);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out << doc.dump();
}

std::pair<ModelParams, ModelConfig> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    json doc = json::parse(in);
    if (doc.value("format_version", 0) != 1)
        throw ParseError("unsupported checkpoint format_version", 1);
    ModelConfig cfg = config_from_jobj(doc.at("config"));
    cfg.validate();
    ModelParams params;
    for (const auto& [name, rows] : doc.at("params").items()) {
        Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
        Eigen::Index nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
        Eigen::MatrixXd t(nr, nc);
        for (Eigen::Index r = 0; r < nr; ++r) {
            if (static_cast<Eigen::Index>(rows[r].size()) != nc)
                throw ParseError("ragged tensor " + name, 1);
            for (Eigen::Index c = 0; c < nc; ++c) t(r, c) = rows[r][c].get<double>();
        }
        params.tensors[name] = std::move(t);
    }
    // Shapes must match what the config would build.
    ModelParams reference = build(cfg);
    for (const auto& [name, t] : reference.tensors) {
        auto it = params.tensors.find(name);
        if (it == params.tensors.end()) throw ParseError("missing tensor " + name, 1);
        if (it->second.rows() != t.rows() || it->second.cols() != t.cols())
            throw ParseError("bad shape for tensor " + name, 1);
    }
    return {std::move(params), cfg};
}

std::string config_to_json(const ModelConfig& cfg) { return config_to_jobj(cfg).dump(2); }

ModelConfig config_from_json(const std::string& json_text) {
    return config_from_jobj(json::parse(json_text));
}

}  // namespace swe2
