#include "coformer/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace coformer {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

Observation observation_from_json(const json& j, std::size_t line_no) {
    if (!j.is_object()) {
        parse_fail(line_no, "expected a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "id" && key != "label" && key != "static" && key != "variates") {
            parse_fail(line_no, "unknown key \"" + key + "\"");
        }
    }
    if (!j.contains("id") || !j["id"].is_string()) {
        parse_fail(line_no, "\"id\" must be a string");
    }
    if (!j.contains("label") || !j["label"].is_number_integer()) {
        parse_fail(line_no, "\"label\" must be an integer");
    }
    if (!j.contains("variates") || !j["variates"].is_array()) {
        parse_fail(line_no, "\"variates\" must be an array");
    }

    Observation obs;
    obs.id = j["id"].get<std::string>();
    obs.label = j["label"].get<int>();

    if (j.contains("static")) {
        if (!j["static"].is_array()) {
            parse_fail(line_no, "\"static\" must be an array of numbers");
        }
        for (const auto& v : j["static"]) {
            if (!v.is_number()) {
                parse_fail(line_no, "\"static\" must be an array of numbers");
            }
            obs.static_features.push_back(v.get<double>());
        }
    }

    for (const auto& variate : j["variates"]) {
        if (!variate.is_array()) {
            parse_fail(line_no, "each variate must be an array of [t, m] pairs");
        }
        VariateSeries series;
        for (const auto& pair : variate) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
                parse_fail(line_no, "each sample must be a [t, m] pair of numbers");
            }
            series.samples.push_back({pair[0].get<double>(), pair[1].get<double>()});
        }
        std::stable_sort(series.samples.begin(), series.samples.end(),
                         [](const Sample& a, const Sample& b) { return a.timestamp < b.timestamp; });
        obs.variates.push_back(std::move(series));
    }
    return obs;
}

Dataset parse_dataset_impl(std::istream& in, const DatasetMeta* expected) {
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    bool has_static = false;
    int max_label = -1;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            parse_fail(line_no, std::string("invalid JSON: ") + e.what());
        }
        Observation obs = observation_from_json(j, line_no);

        if (first) {
            first = false;
            if (expected == nullptr) {
                ds.meta.n_variates = static_cast<int>(obs.variates.size());
                ds.meta.static_dim = static_cast<int>(obs.static_features.size());
                has_static = !obs.static_features.empty();
            }
        } else if (expected == nullptr) {
            if (static_cast<int>(obs.variates.size()) != ds.meta.n_variates) {
                parse_fail(line_no, "inconsistent variate count (expected " +
                                        std::to_string(ds.meta.n_variates) + ", got " +
                                        std::to_string(obs.variates.size()) + ")");
            }
            if (obs.static_features.empty() == has_static) {
                parse_fail(line_no, "static features must be present on all observations or none");
            }
            if (has_static && static_cast<int>(obs.static_features.size()) != ds.meta.static_dim) {
                parse_fail(line_no, "inconsistent static feature width");
            }
        }

        const DatasetMeta check_meta =
            expected != nullptr ? *expected
                                : DatasetMeta{ds.meta.n_variates, obs.label + 1, ds.meta.static_dim};
        const auto violations = validate_observation(obs, check_meta);
        if (!violations.empty()) {
            parse_fail(line_no, violations.front());
        }

        max_label = std::max(max_label, obs.label);
        ds.observations.push_back(std::move(obs));
    }

    if (ds.observations.empty()) {
        throw std::runtime_error("dataset is empty");
    }
    if (expected != nullptr) {
        ds.meta = *expected;
    } else {
        ds.meta.n_classes = max_label + 1;
    }
    return ds;
}

json observation_to_json(const Observation& obs) {
    json j;
    j["id"] = obs.id;
    j["label"] = obs.label;
    if (!obs.static_features.empty()) {
        j["static"] = obs.static_features;
    }
    json variates = json::array();
    for (const auto& series : obs.variates) {
        json samples = json::array();
        for (const auto& s : series.samples) {
            samples.push_back(json::array({s.timestamp, s.measurement}));
        }
        variates.push_back(std::move(samples));
    }
    j["variates"] = std::move(variates);
    return j;
}

}  // namespace

std::size_t Observation::total_samples() const {
    std::size_t n = 0;
    for (const auto& series : variates) {
        n += series.samples.size();
    }
    return n;
}

std::size_t Observation::non_empty_variates() const {
    std::size_t n = 0;
    for (const auto& series : variates) {
        if (!series.samples.empty()) {
            ++n;
        }
    }
    return n;
}

std::vector<std::string> validate_observation(const Observation& obs, const DatasetMeta& meta) {
    std::vector<std::string> violations;
    if (static_cast<int>(obs.variates.size()) != meta.n_variates) {
        violations.push_back("expected " + std::to_string(meta.n_variates) + " variates, got " +
                             std::to_string(obs.variates.size()));
    }
    if (obs.label < 0 || obs.label >= meta.n_classes) {
        violations.push_back("label " + std::to_string(obs.label) + " outside [0, " +
                             std::to_string(meta.n_classes) + ")");
    }
    if (static_cast<int>(obs.static_features.size()) != meta.static_dim) {
        violations.push_back("expected " + std::to_string(meta.static_dim) +
                             " static features, got " + std::to_string(obs.static_features.size()));
    }
    for (double v : obs.static_features) {
        if (!std::isfinite(v)) {
            violations.push_back("non-finite static feature");
            break;
        }
    }
    if (obs.total_samples() == 0) {
        violations.push_back("observation has no samples");
    }
    for (std::size_t i = 0; i < obs.variates.size(); ++i) {
        const auto& samples = obs.variates[i].samples;
        for (std::size_t k = 0; k < samples.size(); ++k) {
            if (!std::isfinite(samples[k].timestamp) || samples[k].timestamp < 0.0) {
                violations.push_back("variate " + std::to_string(i) +
                                     ": timestamps must be finite and non-negative");
                break;
            }
            if (!std::isfinite(samples[k].measurement)) {
                violations.push_back("variate " + std::to_string(i) + ": non-finite measurement");
                break;
            }
            if (k > 0 && samples[k].timestamp < samples[k - 1].timestamp) {
                violations.push_back("variate " + std::to_string(i) + ": timestamps out of order");
                break;
            }
        }
    }
    return violations;
}

Dataset parse_dataset(std::istream& in) {
    return parse_dataset_impl(in, nullptr);
}

Dataset parse_dataset(std::istream& in, const DatasetMeta& expected) {
    return parse_dataset_impl(in, &expected);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open dataset file: " + path);
    }
    return parse_dataset(in);
}

Dataset load_dataset(const std::string& path, const DatasetMeta& expected) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open dataset file: " + path);
    }
    return parse_dataset(in, expected);
}

void serialize_dataset(const Dataset& ds, std::ostream& out) {
    for (const auto& obs : ds.observations) {
        out << observation_to_json(obs).dump() << '\n';
    }
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    serialize_dataset(ds, out);
}

Observation irregularize(const Observation& obs, double removal_ratio, Rng& rng) {
    if (!(removal_ratio >= 0.0) || !(removal_ratio < 1.0)) {
        throw std::invalid_argument("removal ratio must lie in [0, 1)");
    }
    const std::size_t total = obs.total_samples();
    const std::size_t n_remove =
        static_cast<std::size_t>(std::floor(removal_ratio * static_cast<double>(total)));
    if (n_remove >= total) {
        throw std::runtime_error("irregularize would remove every sample of observation " + obs.id);
    }

    // Flat index over (variate, sample); a partial Fisher-Yates picks the
    // removal set uniformly over all samples of the observation.
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) {
        order[i] = i;
    }
    for (std::size_t i = 0; i < n_remove; ++i) {
        const std::size_t j = i + rng.below(total - i);
        std::swap(order[i], order[j]);
    }
    std::vector<bool> removed(total, false);
    for (std::size_t i = 0; i < n_remove; ++i) {
        removed[order[i]] = true;
    }

    Observation out;
    out.id = obs.id;
    out.label = obs.label;
    out.static_features = obs.static_features;
    out.variates.resize(obs.variates.size());
    std::size_t flat = 0;
    for (std::size_t v = 0; v < obs.variates.size(); ++v) {
        for (const auto& s : obs.variates[v].samples) {
            if (!removed[flat]) {
                out.variates[v].samples.push_back(s);
            }
            ++flat;
        }
    }
    return out;
}

void SyntheticConfig::validate() const {
    if (n_obs <= 0) {
        throw std::invalid_argument("synthetic config: n_obs must be positive");
    }
    if (n_variates <= 0) {
        throw std::invalid_argument("synthetic config: n_variates must be positive");
    }
    if (!(duration > 0.0)) {
        throw std::invalid_argument("synthetic config: duration must be positive");
    }
    if (!(mean_samples_per_variate > 0.0)) {
        throw std::invalid_argument("synthetic config: mean_samples_per_variate must be positive");
    }
    if (!(noise_std >= 0.0)) {
        throw std::invalid_argument("synthetic config: noise_std must be non-negative");
    }
}

Dataset generate_synthetic(const SyntheticConfig& cfg, Rng& rng) {
    cfg.validate();
    Dataset ds;
    ds.meta = {cfg.n_variates, 2, 0};
    ds.observations.reserve(static_cast<std::size_t>(cfg.n_obs));

    for (int i = 0; i < cfg.n_obs; ++i) {
        Observation obs;
        {
            std::ostringstream id;
            id << "syn-";
            id.width(6);
            id.fill('0');
            id << i;
            obs.id = id.str();
        }
        obs.label = i % 2;
        const double base_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        obs.variates.resize(static_cast<std::size_t>(cfg.n_variates));
        for (int v = 0; v < cfg.n_variates; ++v) {
            const double phase =
                obs.label == 0
                    ? base_phase
                    : base_phase + static_cast<double>(v) * std::numbers::pi / cfg.n_variates;
            const long long count = std::max<long long>(2, rng.poisson(cfg.mean_samples_per_variate));
            std::vector<double> times(static_cast<std::size_t>(count));
            for (auto& t : times) {
                t = rng.uniform(0.0, cfg.duration);
            }
            std::sort(times.begin(), times.end());
            auto& samples = obs.variates[static_cast<std::size_t>(v)].samples;
            samples.reserve(times.size());
            for (double t : times) {
                double m = std::sin(kSyntheticOmega * t + phase);
                if (cfg.noise_std > 0.0) {
                    m += rng.normal(0.0, cfg.noise_std);
                }
                samples.push_back({t, m});
            }
        }
        ds.observations.push_back(std::move(obs));
    }
    return ds;
}

SplitResult split_dataset(const Dataset& ds, const std::array<double, 3>& fractions, Rng& rng) {
    double sum = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0)) {
            throw std::invalid_argument("split fractions must be non-negative");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("split fractions must sum to 1");
    }

    const std::size_t n = ds.observations.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(order[i], order[j]);
    }

    const auto n_val = static_cast<std::size_t>(std::floor(fractions[1] * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::floor(fractions[2] * static_cast<double>(n)));
    const std::size_t n_train = n - n_val - n_test;

    SplitResult result;
    result.train.meta = result.val.meta = result.test.meta = ds.meta;
    for (std::size_t i = 0; i < n; ++i) {
        const Observation& obs = ds.observations[order[i]];
        if (i < n_train) {
            result.train.observations.push_back(obs);
        } else if (i < n_train + n_val) {
            result.val.observations.push_back(obs);
        } else {
            result.test.observations.push_back(obs);
        }
    }
    if (result.train.observations.empty()) {
        result.warnings.push_back("train split is empty");
    }
    if (result.val.observations.empty()) {
        result.warnings.push_back("val split is empty");
    }
    if (result.test.observations.empty()) {
        result.warnings.push_back("test split is empty");
    }
    return result;
}

}  // namespace coformer
