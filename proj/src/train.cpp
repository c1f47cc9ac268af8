#include "coformer/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "coformer/graph.hpp"
#include "coformer/neighbor.hpp"

namespace coformer {

namespace {

std::string format_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void check_dataset(const Dataset& ds, const ModelConfig& cfg, const std::string& which) {
    if (ds.observations.empty()) {
        throw std::runtime_error(which + " dataset is empty");
    }
    const DatasetMeta meta{cfg.encoder.n_variates, cfg.head.n_classes, cfg.head.static_dim};
    for (const auto& obs : ds.observations) {
        const auto violations = validate_observation(obs, meta);
        if (!violations.empty()) {
            throw std::runtime_error(which + " dataset, observation " + obs.id + ": " +
                                     violations.front());
        }
    }
}

/// Selection value of an epoch; AUROC falls back to accuracy when the
/// validation labels are single-class.
std::pair<double, std::string> selection_value(const MetricsReport& report,
                                               SelectionMetric metric, int n_classes) {
    const bool want_auroc =
        metric == SelectionMetric::Auroc || (metric == SelectionMetric::Auto && n_classes == 2);
    if (want_auroc && report.auroc.has_value()) {
        return {*report.auroc, "auroc"};
    }
    return {report.accuracy, "accuracy"};
}

}  // namespace

std::string EpochLog::line(int total_epochs) const {
    std::string s = "epoch " + std::to_string(epoch) + "/" + std::to_string(total_epochs) +
                    " train_loss " + format_metric(train_loss) + " val_accuracy " +
                    format_metric(val.accuracy);
    if (val.auroc.has_value()) {
        s += " val_auroc " + format_metric(*val.auroc);
    }
    if (val.auprc.has_value()) {
        s += " val_auprc " + format_metric(*val.auprc);
    }
    if (is_best) {
        s += " *";
    }
    return s;
}

MetricsReport evaluate_params(const ModelConfig& cfg, const ParameterStore& params,
                              const Dataset& ds) {
    cfg.validate();
    check_dataset(ds, cfg, "evaluation");

    std::vector<int> predictions;
    std::vector<int> labels;
    std::vector<ScoredLabel> scored;
    predictions.reserve(ds.observations.size());
    labels.reserve(ds.observations.size());

    for (const auto& obs : ds.observations) {
        const NeighborIndex index = NeighborIndex::build(obs);
        Graph g;
        const Var logits = observation_logits(g, obs, index, cfg, params);
        const std::vector<double> probs = softmax_values(logits.value().values);
        predictions.push_back(argmax_lowest(probs));
        labels.push_back(obs.label);
        if (cfg.head.n_classes == 2) {
            scored.push_back({probs[1], obs.label});
        }
    }

    MetricsReport report = multiclass_metrics(predictions, labels, cfg.head.n_classes);
    if (cfg.head.n_classes == 2) {
        bool has_pos = false;
        bool has_neg = false;
        for (int label : labels) {
            (label == 1 ? has_pos : has_neg) = true;
        }
        if (has_pos && has_neg) {
            report.auroc = auroc(scored);
            report.auprc = auprc(scored);
        }
    }
    return report;
}

MetricsReport evaluate_checkpoint(const Checkpoint& ckpt, const Dataset& ds) {
    return evaluate_params(ckpt.config.model, ckpt.params, ds);
}

TrainResult train_model(const RunConfig& config, const Dataset& train_ds, const Dataset& val_ds,
                        std::ostream* log_out) {
    config.validate();
    check_dataset(train_ds, config.model, "train");
    check_dataset(val_ds, config.model, "val");

    Rng root(config.training.seed);
    Rng init_rng = root.child(0);
    Rng shuffle_rng = root.child(1);
    ParameterStore params = init_model_params(config.model, init_rng);

    std::vector<NeighborIndex> indices;
    indices.reserve(train_ds.observations.size());
    for (const auto& obs : train_ds.observations) {
        indices.push_back(NeighborIndex::build(obs));
    }

    AdamState adam = AdamState::init(params);
    const AdamHyper hyper = config.training.adam();
    const std::size_t n = train_ds.observations.size();
    const auto batch_size = static_cast<std::size_t>(config.training.batch_size);

    TrainResult result;
    bool have_best = false;

    auto consider_snapshot = [&](int epoch, double train_loss) {
        const ParameterStore snapshot = quantize_f32(params);
        EpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = train_loss;
        entry.val = evaluate_params(config.model, snapshot, val_ds);
        const auto [value, name] =
            selection_value(entry.val, config.training.selection, config.model.head.n_classes);
        if (!have_best || value >= result.best_metric) {
            have_best = true;
            result.best = Checkpoint{config, snapshot};
            result.best_epoch = epoch;
            result.best_metric = value;
            result.selection_name = name;
            entry.is_best = true;
        }
        if (epoch > 0) {
            result.log.push_back(entry);
            if (log_out != nullptr) {
                (*log_out) << entry.line(config.training.epochs) << '\n';
            }
        }
    };

    if (config.training.epochs == 0) {
        consider_snapshot(0, 0.0);
        return result;
    }

    for (int epoch = 1; epoch <= config.training.epochs; ++epoch) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t j = i + shuffle_rng.below(n - i);
            std::swap(order[i], order[j]);
        }

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t end = std::min(start + batch_size, n);
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            GradientMap acc;
            for (const auto& [name, value] : params) {
                acc.emplace(name, Tensor::zeros(value.shape));
            }
            for (std::size_t i = start; i < end; ++i) {
                const std::size_t idx = order[i];
                const Observation& obs = train_ds.observations[idx];
                Graph g;
                Var loss = observation_loss(g, obs, indices[idx], config.model, params);
                const double value = loss.value()[0];
                if (!std::isfinite(value)) {
                    throw std::runtime_error("non-finite training loss at epoch " +
                                             std::to_string(epoch) + ", observation " + obs.id);
                }
                loss_sum += value;
                g.backward(loss);
                g.accumulate_gradients(acc, inv_batch);
            }
            adam_step(params, acc, adam, hyper);
        }
        consider_snapshot(epoch, loss_sum / static_cast<double>(n));
    }
    return result;
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& param,
                                const std::vector<int>& values, const Dataset& full,
                                std::ostream& csv, std::ostream* log_out) {
    if (param != "k" && param != "layers") {
        throw std::invalid_argument("sweep: param must be \"k\" or \"layers\"");
    }
    if (values.empty()) {
        throw std::invalid_argument("sweep: values must be nonempty");
    }

    constexpr std::uint64_t kSplitSeeds[] = {1, 2, 3, 4, 5};
    std::vector<SweepRow> rows;

    csv << "param,value,split_seed,n,accuracy,auroc,auprc,macro_precision,macro_recall,macro_f1\n";
    auto emit = [&](const SweepRow& row) {
        csv << row.param << ',' << row.value << ',' << row.split << ',' << row.metrics.n << ','
            << format_metric(row.metrics.accuracy) << ','
            << (row.metrics.auroc ? format_metric(*row.metrics.auroc) : std::string()) << ','
            << (row.metrics.auprc ? format_metric(*row.metrics.auprc) : std::string()) << ','
            << format_metric(row.metrics.macro_precision) << ','
            << format_metric(row.metrics.macro_recall) << ','
            << format_metric(row.metrics.macro_f1) << '\n';
    };

    for (int value : values) {
        RunConfig config = base;
        if (param == "k") {
            config.model.encoder.neighbor = NeighborQuery::knn(value);
        } else {
            config.model.encoder.n_layers = value;
        }
        config.validate();

        std::vector<MetricsReport> split_reports;
        for (std::uint64_t seed : kSplitSeeds) {
            Rng split_rng(seed);
            const SplitResult split = split_dataset(full, config.data.split, split_rng);
            if (log_out != nullptr) {
                (*log_out) << "sweep " << param << "=" << value << " split_seed=" << seed << '\n';
            }
            const TrainResult trained = train_model(config, split.train, split.val, log_out);
            const MetricsReport test = evaluate_checkpoint(trained.best, split.test);
            SweepRow row{param, value, std::to_string(seed), test};
            emit(row);
            rows.push_back(row);
            split_reports.push_back(test);
        }

        // Aggregate rows: population mean/std of each metric over the splits.
        // Optional metrics aggregate only when present in every split.
        auto stat = [&](const std::function<std::optional<double>(const MetricsReport&)>& get,
                        bool want_std) -> std::optional<double> {
            double sum = 0.0;
            for (const auto& r : split_reports) {
                const auto v = get(r);
                if (!v.has_value()) {
                    return std::nullopt;
                }
                sum += *v;
            }
            const double mean = sum / static_cast<double>(split_reports.size());
            if (!want_std) {
                return mean;
            }
            double sq = 0.0;
            for (const auto& r : split_reports) {
                const double d = *get(r) - mean;
                sq += d * d;
            }
            return std::sqrt(sq / static_cast<double>(split_reports.size()));
        };
        for (const bool want_std : {false, true}) {
            SweepRow row{param, value, want_std ? "std" : "mean", MetricsReport{}};
            row.metrics.n = split_reports.front().n;
            row.metrics.accuracy =
                *stat([](const MetricsReport& r) { return std::optional(r.accuracy); }, want_std);
            row.metrics.auroc = stat([](const MetricsReport& r) { return r.auroc; }, want_std);
            row.metrics.auprc = stat([](const MetricsReport& r) { return r.auprc; }, want_std);
            row.metrics.macro_precision = *stat(
                [](const MetricsReport& r) { return std::optional(r.macro_precision); }, want_std);
            row.metrics.macro_recall = *stat(
                [](const MetricsReport& r) { return std::optional(r.macro_recall); }, want_std);
            row.metrics.macro_f1 =
                *stat([](const MetricsReport& r) { return std::optional(r.macro_f1); }, want_std);
            emit(row);
            rows.push_back(row);
        }
    }
    return rows;
}

ModelConfig tiny_gradcheck_config() {
    ModelConfig cfg;
    cfg.encoder.n_variates = 3;
    cfg.encoder.time_code_dim = 8;
    cfg.encoder.variate_code_dim = 4;
    cfg.encoder.agg_linear_dim = 12;
    cfg.encoder.measurement_embed_dim = 16;
    cfg.encoder.measurement_hidden_dim = 16;
    cfg.encoder.heads = 2;
    cfg.encoder.n_layers = 1;
    cfg.encoder.neighbor = NeighborQuery::knn(2);
    cfg.head.n_classes = 2;
    cfg.head.classifier_hidden_dim = 16;
    return cfg;
}

GradcheckReport run_model_gradcheck(const ModelConfig& cfg, std::uint64_t seed,
                                    const GradcheckOptions& options) {
    cfg.validate();
    Rng rng(seed);
    Rng init_rng = rng.child(0);
    Rng data_rng = rng.child(1);
    const ParameterStore params = init_model_params(cfg, init_rng);

    SyntheticConfig data_cfg;
    data_cfg.n_obs = 2;
    data_cfg.n_variates = cfg.encoder.n_variates;
    data_cfg.duration = 10.0;
    data_cfg.mean_samples_per_variate = 3.0;
    data_cfg.noise_std = 0.1;
    data_cfg.seed = seed;
    const Dataset data = generate_synthetic(data_cfg, data_rng);
    const Observation& obs = data.observations[1];
    const NeighborIndex index = NeighborIndex::build(obs);

    const auto loss_fn = [&](const ParameterStore& p) {
        Graph g;
        return observation_loss(g, obs, index, cfg, p).value()[0];
    };
    const auto grad_fn = [&](const ParameterStore& p) {
        Graph g;
        Var loss = observation_loss(g, obs, index, cfg, p);
        return compute_gradients(g, loss, p);
    };
    return finite_difference_gradcheck(loss_fn, grad_fn, params, options);
}

}  // namespace coformer
