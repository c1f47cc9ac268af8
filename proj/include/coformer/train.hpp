#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "coformer/checkpoint.hpp"
#include "coformer/config.hpp"
#include "coformer/metrics.hpp"
#include "coformer/nn.hpp"

namespace coformer {

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    MetricsReport val;
    bool is_best = false;

    std::string line(int total_epochs) const;
};

struct TrainResult {
    Checkpoint best;
    int best_epoch = 0;
    double best_metric = 0.0;
    std::string selection_name;
    std::vector<EpochLog> log;
};

/// Forward passes over a dataset with fixed parameters.  Binary tasks also
/// get AUROC/AUPRC from the class-1 probability (omitted if the labels are
/// single-class).
MetricsReport evaluate_params(const ModelConfig& cfg, const ParameterStore& params,
                              const Dataset& ds);
MetricsReport evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& ds);

/// Full training run: seeded init, per-epoch shuffle, mean-loss batches with
/// one Adam step each, validation after every epoch, best-epoch selection by
/// AUROC (binary) or accuracy.  Epoch lines go to log_out when given.
/// epochs=0 returns the initialized model evaluated once.
TrainResult train_model(const RunConfig& config, const Dataset& train_ds, const Dataset& val_ds,
                        std::ostream* log_out);

struct SweepRow {
    std::string param;
    int value = 0;
    std::string split;
    MetricsReport metrics;
};

/// For each value: set k or n_layers, re-split the dataset with seeds 1..5,
/// train, and evaluate on the held-out test split.  Emits a CSV with one row
/// per (value, split seed) plus mean/std rows per value.
std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& param,
                                const std::vector<int>& values, const Dataset& full,
                                std::ostream& csv, std::ostream* log_out);

/// The documented gradcheck model: 3 variates, d_model 16 (variate code 4,
/// blend 12), time code 8, 2 heads, 1 layer, 2 classes, k=2 neighbors.
ModelConfig tiny_gradcheck_config();

/// Runs the finite-difference check on the full classification loss of a
/// freshly initialized model over one small synthetic observation.
GradcheckReport run_model_gradcheck(const ModelConfig& cfg, std::uint64_t seed,
                                    const GradcheckOptions& options);

}  // namespace coformer
