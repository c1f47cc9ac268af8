#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coformer/rng.hpp"

namespace coformer {

/// One measurement of one variate.
struct Sample {
    double timestamp = 0.0;
    double measurement = 0.0;
};

/// All samples of a single variate within one observation, sorted by
/// timestamp (ties keep input order).  A variate may be empty.
struct VariateSeries {
    std::vector<Sample> samples;
};

/// Identifies a sample inside an observation.
struct VariateTimePoint {
    int variate_id = 0;
    int sample_idx = 0;
    double timestamp = 0.0;
};

struct Observation {
    std::string id;
    int label = 0;
    std::vector<VariateSeries> variates;
    std::vector<double> static_features;

    std::size_t total_samples() const;
    std::size_t non_empty_variates() const;
};

struct DatasetMeta {
    int n_variates = 0;
    int n_classes = 0;
    int static_dim = 0;
};

struct Dataset {
    DatasetMeta meta;
    std::vector<Observation> observations;
};

/// Returns human-readable violations; empty means the observation is valid
/// against the given meta.  Checked: variate count, label range, static
/// feature width, finite values, non-negative timestamps, per-variate
/// timestamp ordering, and at least one sample overall.
std::vector<std::string> validate_observation(const Observation& obs, const DatasetMeta& meta);

/// Parses one observation per line.  Meta is inferred from the stream: the
/// variate count and static width come from the first line and must be
/// consistent throughout, and the class count is max(label) + 1.
/// Malformed input raises std::runtime_error naming the 1-based line.
Dataset parse_dataset(std::istream& in);

/// Same, but validates every observation against an expected meta instead of
/// inferring one; any violation is an error.
Dataset parse_dataset(std::istream& in, const DatasetMeta& expected);

Dataset load_dataset(const std::string& path);
Dataset load_dataset(const std::string& path, const DatasetMeta& expected);

void serialize_dataset(const Dataset& ds, std::ostream& out);
void save_dataset(const Dataset& ds, const std::string& path);

/// Removes floor(ratio * total_samples) samples chosen uniformly across the
/// whole observation (not per variate).  Ratio must lie in [0, 1); removing
/// every sample is an error.
Observation irregularize(const Observation& obs, double removal_ratio, Rng& rng);

/// Angular frequency of the synthetic sinusoids.  Low enough that samples a
/// typical neighbor gap apart stay strongly correlated, so the phase coupling
/// is detectable from temporally close cross-variate pairs.
inline constexpr double kSyntheticOmega = 0.45;

struct SyntheticConfig {
    int n_obs = 0;
    int n_variates = 0;
    double duration = 10.0;
    double mean_samples_per_variate = 20.0;
    double noise_std = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Phase-coupling classification task.  Every variate of an observation
/// measures a sinusoid with a shared random base phase; class 0 keeps all
/// variates in phase and class 1 offsets variate i by i*pi/N.  When the
/// window spans several oscillation periods, per-variate value statistics
/// carry almost no label information and the classes are only separable by
/// comparing temporally close samples across variates.
Dataset generate_synthetic(const SyntheticConfig& cfg, Rng& rng);

struct SplitResult {
    Dataset train;
    Dataset val;
    Dataset test;
    std::vector<std::string> warnings;
};

/// Shuffles observations and cuts floor(fraction * n) sized splits, giving
/// the remainder to train.  Fractions must be non-negative and sum to 1.
SplitResult split_dataset(const Dataset& ds, const std::array<double, 3>& fractions, Rng& rng);

}  // namespace coformer
