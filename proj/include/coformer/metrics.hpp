#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

namespace coformer {

/// One scored binary example; label must be 0 or 1.
struct ScoredLabel {
    double score = 0.0;
    int label = 0;
};

/// Probability that a random positive outscores a random negative, ties
/// counted half.  Both classes must be present.
double auroc(const std::vector<ScoredLabel>& examples);

/// Average precision with step interpolation; tied scores are handled as one
/// block.  Both classes must be present.
double auprc(const std::vector<ScoredLabel>& examples);

struct MetricsReport {
    std::size_t n = 0;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    /// confusion[true_class][predicted_class]
    std::vector<std::vector<long long>> confusion;
    std::optional<double> auroc;
    std::optional<double> auprc;

    nlohmann::json to_json() const;
};

/// Confusion-matrix metrics; macro averages treat per-class 0/0 as 0.
MetricsReport multiclass_metrics(const std::vector<int>& predictions,
                                 const std::vector<int>& labels, int n_classes);

}  // namespace coformer
