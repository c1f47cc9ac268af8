#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "coformer/head.hpp"

namespace coformer {

enum class SelectionMetric { Auto, Auroc, Accuracy };

struct TrainingConfig {
    std::uint64_t seed = 0;
    int batch_size = 128;
    double learning_rate = 1e-4;
    int epochs = 20;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    SelectionMetric selection = SelectionMetric::Auto;

    void validate() const;
    AdamHyper adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

/// Synthetic-data and split settings; also carries optional dataset paths so
/// a config file can name its inputs.
struct DataConfig {
    int n_obs = 500;
    double duration = 10.0;
    double mean_samples_per_variate = 20.0;
    double noise_std = 0.1;
    std::array<double, 3> split = {0.8, 0.1, 0.1};
    std::optional<std::uint64_t> seed;
    std::string train_path;
    std::string val_path;
    std::string test_path;

    void validate() const;
    SyntheticConfig synthetic(int n_variates, std::uint64_t fallback_seed) const;
};

/// Everything one run needs.  The JSON form has sections "encoder" (with a
/// nested "neighbor" object), "head", "training", and "data"; unknown keys
/// anywhere are rejected.  Required: encoder.n_variates, head.n_classes,
/// training.seed.
struct RunConfig {
    ModelConfig model;
    TrainingConfig training;
    DataConfig data;

    void validate() const;
    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
};

}  // namespace coformer
