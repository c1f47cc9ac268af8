#include "coformer/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <stdexcept>

namespace coformer {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& what) {
    throw std::runtime_error("config: " + what);
}

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) {
        config_fail(where + " must be a JSON object");
    }
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            config_fail("unknown key \"" + key + "\" in " + where);
        }
    }
}

int get_int(const json& j, const char* key, const std::string& where, int fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_number_integer()) {
        config_fail(where + "." + key + " must be an integer");
    }
    return j[key].get<int>();
}

int require_int(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) {
        config_fail(where + "." + key + " is required");
    }
    return get_int(j, key, where, 0);
}

double get_double(const json& j, const char* key, const std::string& where, double fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_number()) {
        config_fail(where + "." + key + " must be a number");
    }
    return j[key].get<double>();
}

bool get_bool(const json& j, const char* key, const std::string& where, bool fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_boolean()) {
        config_fail(where + "." + key + " must be a boolean");
    }
    return j[key].get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& where,
                       const std::string& fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_string()) {
        config_fail(where + "." + key + " must be a string");
    }
    return j[key].get<std::string>();
}

std::uint64_t require_u64(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) {
        config_fail(where + "." + key + " is required");
    }
    if (!j[key].is_number_unsigned() && !j[key].is_number_integer()) {
        config_fail(where + "." + key + " must be a non-negative integer");
    }
    if (j[key].is_number_integer() && j[key].get<long long>() < 0) {
        config_fail(where + "." + key + " must be a non-negative integer");
    }
    return j[key].get<std::uint64_t>();
}

NeighborQuery neighbor_from_json(const json& parent) {
    NeighborQuery q = NeighborQuery::knn(30);
    if (!parent.contains("neighbor")) {
        return q;
    }
    const json& j = parent["neighbor"];
    expect_object(j, "encoder.neighbor");
    const std::string mode = get_string(j, "mode", "neighbor", "");
    if (mode == "knn") {
        reject_unknown(j, "neighbor", {"mode", "k"});
        q = NeighborQuery::knn(get_int(j, "k", "neighbor", 30));
    } else if (mode == "radius") {
        reject_unknown(j, "neighbor", {"mode", "delta_tau"});
        q = NeighborQuery::radius(get_double(j, "delta_tau", "neighbor", 0.0));
    } else {
        config_fail("neighbor.mode must be \"knn\" or \"radius\"");
    }
    return q;
}

EncoderConfig encoder_from_json(const json& root) {
    if (!root.contains("encoder")) {
        config_fail("\"encoder\" section is required");
    }
    const json& j = root["encoder"];
    expect_object(j, "encoder");
    reject_unknown(j, "encoder",
                   {"n_variates", "time_code_dim", "variate_code_dim", "agg_linear_dim",
                    "measurement_embed_dim", "measurement_hidden_dim", "heads", "n_layers",
                    "neighbor", "time_encoding"});
    EncoderConfig cfg;
    cfg.n_variates = require_int(j, "n_variates", "encoder");
    cfg.time_code_dim = get_int(j, "time_code_dim", "encoder", cfg.time_code_dim);
    cfg.variate_code_dim = get_int(j, "variate_code_dim", "encoder", cfg.variate_code_dim);
    cfg.agg_linear_dim = get_int(j, "agg_linear_dim", "encoder", cfg.agg_linear_dim);
    cfg.measurement_embed_dim =
        get_int(j, "measurement_embed_dim", "encoder", cfg.measurement_embed_dim);
    cfg.measurement_hidden_dim =
        get_int(j, "measurement_hidden_dim", "encoder", cfg.measurement_hidden_dim);
    cfg.heads = get_int(j, "heads", "encoder", cfg.heads);
    cfg.n_layers = get_int(j, "n_layers", "encoder", cfg.n_layers);
    cfg.time_encoding = get_bool(j, "time_encoding", "encoder", cfg.time_encoding);
    cfg.neighbor = neighbor_from_json(j);
    return cfg;
}

HeadConfig head_from_json(const json& root) {
    if (!root.contains("head")) {
        config_fail("\"head\" section is required");
    }
    const json& j = root["head"];
    expect_object(j, "head");
    reject_unknown(j, "head",
                   {"n_classes", "static_dim", "static_proj_dim", "classifier_hidden_dim"});
    HeadConfig cfg;
    cfg.n_classes = require_int(j, "n_classes", "head");
    cfg.static_dim = get_int(j, "static_dim", "head", cfg.static_dim);
    cfg.static_proj_dim = get_int(j, "static_proj_dim", "head", cfg.static_proj_dim);
    cfg.classifier_hidden_dim =
        get_int(j, "classifier_hidden_dim", "head", cfg.classifier_hidden_dim);
    return cfg;
}

TrainingConfig training_from_json(const json& root) {
    if (!root.contains("training")) {
        config_fail("\"training\" section is required");
    }
    const json& j = root["training"];
    expect_object(j, "training");
    reject_unknown(j, "training",
                   {"seed", "batch_size", "learning_rate", "epochs", "beta1", "beta2", "epsilon",
                    "selection_metric"});
    TrainingConfig cfg;
    cfg.seed = require_u64(j, "seed", "training");
    cfg.batch_size = get_int(j, "batch_size", "training", cfg.batch_size);
    cfg.learning_rate = get_double(j, "learning_rate", "training", cfg.learning_rate);
    cfg.epochs = get_int(j, "epochs", "training", cfg.epochs);
    cfg.beta1 = get_double(j, "beta1", "training", cfg.beta1);
    cfg.beta2 = get_double(j, "beta2", "training", cfg.beta2);
    cfg.epsilon = get_double(j, "epsilon", "training", cfg.epsilon);
    const std::string metric = get_string(j, "selection_metric", "training", "auto");
    if (metric == "auto") {
        cfg.selection = SelectionMetric::Auto;
    } else if (metric == "auroc") {
        cfg.selection = SelectionMetric::Auroc;
    } else if (metric == "accuracy") {
        cfg.selection = SelectionMetric::Accuracy;
    } else {
        config_fail("training.selection_metric must be auto, auroc, or accuracy");
    }
    return cfg;
}

DataConfig data_from_json(const json& root) {
    DataConfig cfg;
    if (!root.contains("data")) {
        return cfg;
    }
    const json& j = root["data"];
    expect_object(j, "data");
    reject_unknown(j, "data",
                   {"n_obs", "duration", "mean_samples_per_variate", "noise_std", "split", "seed",
                    "train_path", "val_path", "test_path"});
    cfg.n_obs = get_int(j, "n_obs", "data", cfg.n_obs);
    cfg.duration = get_double(j, "duration", "data", cfg.duration);
    cfg.mean_samples_per_variate =
        get_double(j, "mean_samples_per_variate", "data", cfg.mean_samples_per_variate);
    cfg.noise_std = get_double(j, "noise_std", "data", cfg.noise_std);
    if (j.contains("split")) {
        if (!j["split"].is_array() || j["split"].size() != 3) {
            config_fail("data.split must be an array of three fractions");
        }
        for (std::size_t i = 0; i < 3; ++i) {
            if (!j["split"][i].is_number()) {
                config_fail("data.split must be an array of three fractions");
            }
            cfg.split[i] = j["split"][i].get<double>();
        }
    }
    if (j.contains("seed")) {
        cfg.seed = require_u64(j, "seed", "data");
    }
    cfg.train_path = get_string(j, "train_path", "data", "");
    cfg.val_path = get_string(j, "val_path", "data", "");
    cfg.test_path = get_string(j, "test_path", "data", "");
    return cfg;
}

}  // namespace

void TrainingConfig::validate() const {
    if (batch_size < 1) {
        config_fail("training.batch_size must be at least 1");
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        config_fail("training.learning_rate must be finite and non-negative");
    }
    if (epochs < 0) {
        config_fail("training.epochs must be non-negative");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        config_fail("training betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) {
        config_fail("training.epsilon must be positive");
    }
}

void DataConfig::validate() const {
    if (n_obs < 1) {
        config_fail("data.n_obs must be at least 1");
    }
    if (!(duration > 0.0) || !(mean_samples_per_variate > 0.0)) {
        config_fail("data durations and sample rates must be positive");
    }
    if (!(noise_std >= 0.0)) {
        config_fail("data.noise_std must be non-negative");
    }
    double sum = 0.0;
    for (double f : split) {
        if (!(f >= 0.0)) {
            config_fail("data.split fractions must be non-negative");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        config_fail("data.split fractions must sum to 1");
    }
}

SyntheticConfig DataConfig::synthetic(int n_variates, std::uint64_t fallback_seed) const {
    SyntheticConfig cfg;
    cfg.n_obs = n_obs;
    cfg.n_variates = n_variates;
    cfg.duration = duration;
    cfg.mean_samples_per_variate = mean_samples_per_variate;
    cfg.noise_std = noise_std;
    cfg.seed = seed.value_or(fallback_seed);
    return cfg;
}

void RunConfig::validate() const {
    model.validate();
    training.validate();
    data.validate();
}

json RunConfig::to_json() const {
    json j;
    const EncoderConfig& e = model.encoder;
    j["encoder"] = {{"n_variates", e.n_variates},
                    {"time_code_dim", e.time_code_dim},
                    {"variate_code_dim", e.variate_code_dim},
                    {"agg_linear_dim", e.agg_linear_dim},
                    {"measurement_embed_dim", e.measurement_embed_dim},
                    {"measurement_hidden_dim", e.measurement_hidden_dim},
                    {"heads", e.heads},
                    {"n_layers", e.n_layers},
                    {"time_encoding", e.time_encoding}};
    if (e.neighbor.mode == NeighborQuery::Mode::Knn) {
        j["encoder"]["neighbor"] = {{"mode", "knn"}, {"k", e.neighbor.k}};
    } else {
        j["encoder"]["neighbor"] = {{"mode", "radius"}, {"delta_tau", e.neighbor.delta_tau}};
    }
    j["head"] = {{"n_classes", model.head.n_classes},
                 {"static_dim", model.head.static_dim},
                 {"static_proj_dim", model.head.static_proj_dim},
                 {"classifier_hidden_dim", model.head.classifier_hidden_dim}};
    const char* metric = training.selection == SelectionMetric::Auto      ? "auto"
                         : training.selection == SelectionMetric::Auroc   ? "auroc"
                                                                          : "accuracy";
    j["training"] = {{"seed", training.seed},
                     {"batch_size", training.batch_size},
                     {"learning_rate", training.learning_rate},
                     {"epochs", training.epochs},
                     {"beta1", training.beta1},
                     {"beta2", training.beta2},
                     {"epsilon", training.epsilon},
                     {"selection_metric", metric}};
    j["data"] = {{"n_obs", data.n_obs},
                 {"duration", data.duration},
                 {"mean_samples_per_variate", data.mean_samples_per_variate},
                 {"noise_std", data.noise_std},
                 {"split", data.split}};
    if (data.seed.has_value()) {
        j["data"]["seed"] = *data.seed;
    }
    if (!data.train_path.empty()) {
        j["data"]["train_path"] = data.train_path;
    }
    if (!data.val_path.empty()) {
        j["data"]["val_path"] = data.val_path;
    }
    if (!data.test_path.empty()) {
        j["data"]["test_path"] = data.test_path;
    }
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    expect_object(j, "config root");
    reject_unknown(j, "config root", {"encoder", "head", "training", "data"});
    RunConfig cfg;
    cfg.model.encoder = encoder_from_json(j);
    cfg.model.head = head_from_json(j);
    cfg.training = training_from_json(j);
    cfg.data = data_from_json(j);
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file: " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("config: invalid JSON in " + path + ": " + e.what());
    }
    return from_json(j);
}

}  // namespace coformer
