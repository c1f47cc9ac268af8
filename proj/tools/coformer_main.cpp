#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coformer/checkpoint.hpp"
#include "coformer/config.hpp"
#include "coformer/data.hpp"
#include "coformer/train.hpp"

namespace {

using namespace coformer;

int cmd_gen_data(const std::string& config_path, const std::string& out_path) {
    const RunConfig config = RunConfig::load(config_path);
    const SyntheticConfig cfg =
        config.data.synthetic(config.model.encoder.n_variates, config.training.seed);
    Rng rng(cfg.seed);
    const Dataset ds = generate_synthetic(cfg, rng);
    save_dataset(ds, out_path);
    std::cout << "wrote " << ds.observations.size() << " observations to " << out_path << '\n';
    return 0;
}

int cmd_irregularize(double ratio, std::uint64_t seed, const std::string& in_path,
                     const std::string& out_path) {
    const Dataset in = load_dataset(in_path);
    Dataset out;
    out.meta = in.meta;
    Rng rng(seed);
    std::size_t before = 0;
    std::size_t after = 0;
    for (const auto& obs : in.observations) {
        before += obs.total_samples();
        Observation reduced = irregularize(obs, ratio, rng);
        after += reduced.total_samples();
        out.observations.push_back(std::move(reduced));
    }
    save_dataset(out, out_path);
    std::cout << "kept " << after << " of " << before << " samples across "
              << out.observations.size() << " observations\n";
    return 0;
}

int cmd_train(const std::string& config_path, std::string train_path, std::string val_path,
              const std::string& out_path) {
    const RunConfig config = RunConfig::load(config_path);
    if (train_path.empty()) {
        train_path = config.data.train_path;
    }
    if (val_path.empty()) {
        val_path = config.data.val_path;
    }
    if (train_path.empty() || val_path.empty()) {
        throw std::runtime_error("train: --train and --val files are required "
                                 "(or data.train_path/val_path in the config)");
    }
    const DatasetMeta meta{config.model.encoder.n_variates, config.model.head.n_classes,
                           config.model.head.static_dim};
    const Dataset train_ds = load_dataset(train_path, meta);
    const Dataset val_ds = load_dataset(val_path, meta);

    const TrainResult result = train_model(config, train_ds, val_ds, &std::cout);
    save_checkpoint(result.best, out_path);
    std::cout << "best epoch " << result.best_epoch << " (" << result.selection_name << " "
              << result.best_metric << "); checkpoint written to " << out_path << '\n';
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& report_path) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const DatasetMeta meta{ckpt.config.model.encoder.n_variates, ckpt.config.model.head.n_classes,
                           ckpt.config.model.head.static_dim};
    const Dataset ds = load_dataset(data_path, meta);
    const MetricsReport report = evaluate_checkpoint(ckpt, ds);
    std::ofstream out(report_path);
    if (!out) {
        throw std::runtime_error("cannot open report file: " + report_path);
    }
    out << report.to_json().dump(2) << '\n';
    std::cout << "n " << report.n << " accuracy " << report.accuracy;
    if (report.auroc.has_value()) {
        std::cout << " auroc " << *report.auroc << " auprc " << *report.auprc;
    }
    std::cout << "; report written to " << report_path << '\n';
    return 0;
}

int cmd_gradcheck(const std::string& preset) {
    if (preset != "tiny") {
        throw std::runtime_error("gradcheck: unknown preset \"" + preset + "\"");
    }
    GradcheckOptions options;
    const GradcheckReport report = run_model_gradcheck(tiny_gradcheck_config(), 7, options);
    std::cout << "checked " << report.n_checked << " coordinates, skipped " << report.n_skipped
              << " near kinks\n";
    std::cout << "max_rel_err " << report.max_rel_err << " at " << report.worst.param << "["
              << report.worst.index << "] (analytic " << report.worst.analytic << ", numeric "
              << report.worst.numeric << ")\n";
    const bool ok = report.passed(options.tolerance);
    std::cout << (ok ? "PASS" : "FAIL") << " at tolerance " << options.tolerance << '\n';
    return ok ? 0 : 1;
}

int cmd_sweep(const std::string& param, const std::string& values_arg,
              const std::string& config_path, const std::string& out_path) {
    std::vector<int> values;
    std::stringstream ss(values_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        values.push_back(std::stoi(item));
    }
    const RunConfig config = RunConfig::load(config_path);

    const SyntheticConfig data_cfg =
        config.data.synthetic(config.model.encoder.n_variates, config.training.seed);
    Rng data_rng(data_cfg.seed);
    const Dataset full = generate_synthetic(data_cfg, data_rng);

    std::ofstream csv(out_path);
    if (!csv) {
        throw std::runtime_error("cannot open sweep output: " + out_path);
    }
    run_sweep(config, param, values, full, csv, &std::cout);
    std::cout << "sweep results written to " << out_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CoFormer: classification of irregularly sampled multivariate time series"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic phase-coupling dataset");
    gen->add_option("--config", config_path, "Run config JSON")->required();
    gen->add_option("--out", out_path, "Output dataset (JSONL)")->required();

    double ratio = 0.0;
    std::uint64_t seed = 0;
    std::string in_path;
    std::string irr_out;
    auto* irr = app.add_subcommand("irregularize", "Randomly remove a fraction of samples");
    irr->add_option("--ratio", ratio, "Removal ratio in [0,1)")->required();
    irr->add_option("--seed", seed, "Random seed")->required();
    irr->add_option("--in", in_path, "Input dataset (JSONL)")->required();
    irr->add_option("--out", irr_out, "Output dataset (JSONL)")->required();

    std::string train_cfg;
    std::string train_path;
    std::string val_path;
    std::string ckpt_out;
    auto* train = app.add_subcommand("train", "Train a model and keep the best checkpoint");
    train->add_option("--config", train_cfg, "Run config JSON")->required();
    train->add_option("--train", train_path, "Training dataset (JSONL)");
    train->add_option("--val", val_path, "Validation dataset (JSONL)");
    train->add_option("--out", ckpt_out, "Checkpoint output path")->required();

    std::string eval_ckpt;
    std::string eval_data;
    std::string report_path;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval->add_option("--ckpt", eval_ckpt, "Checkpoint path")->required();
    eval->add_option("--data", eval_data, "Dataset (JSONL)")->required();
    eval->add_option("--report", report_path, "Metrics report output (JSON)")->required();

    std::string preset = "tiny";
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
    gradcheck->add_option("--preset", preset, "Model preset (tiny)");

    std::string sweep_param;
    std::string sweep_values;
    std::string sweep_cfg;
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Ablation sweep over k or layers");
    sweep->add_option("--param", sweep_param, "Swept parameter: k or layers")->required();
    sweep->add_option("--values", sweep_values, "Comma-separated integer values")->required();
    sweep->add_option("--config", sweep_cfg, "Run config JSON")->required();
    sweep->add_option("--out", sweep_out, "CSV output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_gen_data(config_path, out_path);
        }
        if (irr->parsed()) {
            return cmd_irregularize(ratio, seed, in_path, irr_out);
        }
        if (train->parsed()) {
            return cmd_train(train_cfg, train_path, val_path, ckpt_out);
        }
        if (eval->parsed()) {
            return cmd_eval(eval_ckpt, eval_data, report_path);
        }
        if (gradcheck->parsed()) {
            return cmd_gradcheck(preset);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_param, sweep_values, sweep_cfg, sweep_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
