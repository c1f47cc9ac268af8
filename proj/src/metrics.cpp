#include "coformer/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace coformer {

namespace {

void check_binary(const std::vector<ScoredLabel>& examples) {
    std::size_t positives = 0;
    for (const auto& e : examples) {
        if (e.label != 0 && e.label != 1) {
            throw std::invalid_argument("binary metrics: labels must be 0 or 1");
        }
        positives += static_cast<std::size_t>(e.label);
    }
    if (positives == 0 || positives == examples.size()) {
        throw std::invalid_argument("binary metrics: both classes must be present");
    }
}

}  // namespace

double auroc(const std::vector<ScoredLabel>& examples) {
    check_binary(examples);
    // Pairwise comparison count; quadratic but exact, including tie handling.
    double wins = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    for (const auto& pos : examples) {
        if (pos.label != 1) {
            continue;
        }
        ++n_pos;
        for (const auto& neg : examples) {
            if (neg.label != 0) {
                continue;
            }
            if (pos.score > neg.score) {
                wins += 1.0;
            } else if (pos.score == neg.score) {
                wins += 0.5;
            }
        }
    }
    n_neg = examples.size() - n_pos;
    return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auprc(const std::vector<ScoredLabel>& examples) {
    check_binary(examples);
    std::vector<ScoredLabel> sorted = examples;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

    std::size_t total_pos = 0;
    for (const auto& e : sorted) {
        total_pos += static_cast<std::size_t>(e.label);
    }

    // Walk score blocks from the top; each block contributes its positives at
    // the precision reached once the whole block is included.
    double ap = 0.0;
    std::size_t tp = 0;
    std::size_t seen = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        std::size_t block_pos = 0;
        while (j < sorted.size() && sorted[j].score == sorted[i].score) {
            block_pos += static_cast<std::size_t>(sorted[j].label);
            ++j;
        }
        tp += block_pos;
        seen += j - i;
        if (block_pos > 0) {
            const double precision = static_cast<double>(tp) / static_cast<double>(seen);
            ap += precision * static_cast<double>(block_pos) / static_cast<double>(total_pos);
        }
        i = j;
    }
    return ap;
}

MetricsReport multiclass_metrics(const std::vector<int>& predictions,
                                 const std::vector<int>& labels, int n_classes) {
    if (predictions.size() != labels.size() || predictions.empty()) {
        throw std::invalid_argument("multiclass metrics: predictions and labels must pair up");
    }
    if (n_classes < 2) {
        throw std::invalid_argument("multiclass metrics: need at least 2 classes");
    }

    MetricsReport report;
    report.n = labels.size();
    report.confusion.assign(static_cast<std::size_t>(n_classes),
                            std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes || predictions[i] < 0 ||
            predictions[i] >= n_classes) {
            throw std::invalid_argument("multiclass metrics: class index out of range");
        }
        ++report.confusion[static_cast<std::size_t>(labels[i])]
                          [static_cast<std::size_t>(predictions[i])];
    }

    long long trace = 0;
    double precision_sum = 0.0;
    double recall_sum = 0.0;
    double f1_sum = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        long long tp = report.confusion[uc][uc];
        long long row = 0;
        long long col = 0;
        for (int k = 0; k < n_classes; ++k) {
            row += report.confusion[uc][static_cast<std::size_t>(k)];
            col += report.confusion[static_cast<std::size_t>(k)][uc];
        }
        trace += tp;
        const double precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
        const double recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
        const double f1 =
            precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        precision_sum += precision;
        recall_sum += recall;
        f1_sum += f1;
    }
    report.accuracy = static_cast<double>(trace) / static_cast<double>(report.n);
    report.macro_precision = precision_sum / n_classes;
    report.macro_recall = recall_sum / n_classes;
    report.macro_f1 = f1_sum / n_classes;
    return report;
}

nlohmann::json MetricsReport::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["accuracy"] = accuracy;
    j["macro_precision"] = macro_precision;
    j["macro_recall"] = macro_recall;
    j["macro_f1"] = macro_f1;
    j["confusion"] = confusion;
    if (auroc.has_value()) {
        j["auroc"] = *auroc;
    }
    if (auprc.has_value()) {
        j["auprc"] = *auprc;
    }
    return j;
}

}  // namespace coformer
