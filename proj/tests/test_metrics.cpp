#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "coformer/metrics.hpp"
#include "coformer/rng.hpp"

using namespace coformer;

namespace {

std::vector<ScoredLabel> zip(const std::vector<double>& scores, const std::vector<int>& labels) {
    REQUIRE(scores.size() == labels.size());
    std::vector<ScoredLabel> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = {scores[i], labels[i]};
    }
    return out;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("auroc separates, counts pairs, and halves ties") {
    CHECK(auroc(zip({0.9, 0.8, 0.3, 0.2}, {1, 1, 0, 0})) == 1.0);
    // 3 of the 4 (positive, negative) pairs rank correctly.
    CHECK(auroc(zip({0.8, 0.4, 0.6, 0.2}, {1, 1, 0, 0})) == 0.75);
    CHECK(auroc(zip({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0})) == 0.5);
    // One tied pair out of four contributes one half.
    CHECK(auroc(zip({0.9, 0.5, 0.5, 0.1}, {1, 1, 0, 0})) == 0.875);
}

TEST_CASE("auroc rejects degenerate inputs") {
    CHECK_THROWS_WITH_AS(auroc(zip({0.1, 0.9}, {1, 1})), doctest::Contains("both classes"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(auroc(zip({0.1, 0.9}, {0, 0})), doctest::Contains("both classes"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(auroc({}), doctest::Contains("both classes"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(auroc(zip({0.1, 0.9}, {0, 2})), doctest::Contains("0 or 1"),
                         std::invalid_argument);
}

TEST_CASE("auroc is invariant under strictly increasing transforms") {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ScoredLabel> examples;
        for (int i = 0; i < 40; ++i) {
            // A distinct-by-construction grid keeps the comparison exact.
            examples.push_back({0.01 * i, static_cast<int>(rng.below(2))});
        }
        bool has_pos = false;
        bool has_neg = false;
        for (const auto& e : examples) {
            (e.label == 1 ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) {
            continue;
        }
        const double base = auroc(examples);
        std::vector<ScoredLabel> warped = examples;
        for (auto& e : warped) {
            e.score = std::exp(2.0 * e.score) + 1.0;
        }
        CHECK(auroc(warped) == base);

        std::vector<ScoredLabel> flipped = examples;
        for (auto& e : flipped) {
            e.label = 1 - e.label;
        }
        CHECK(auroc(flipped) == doctest::Approx(1.0 - base).epsilon(1e-12));
    }
}

TEST_CASE("auprc matches hand-computed average precision") {
    CHECK(auprc(zip({0.9, 0.8, 0.3, 0.2}, {1, 1, 0, 0})) == 1.0);
    // Thresholds at 0.8 and 0.4 catch the positives at precision 1 and 2/3.
    CHECK(auprc(zip({0.8, 0.4, 0.6, 0.2}, {1, 1, 0, 0})) ==
          doctest::Approx(5.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("constant scores score the positive rate") {
    std::vector<ScoredLabel> examples;
    for (int i = 0; i < 10; ++i) {
        examples.push_back({0.5, i < 3 ? 1 : 0});
    }
    CHECK(auprc(examples) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(auroc(examples) == 0.5);
}

TEST_CASE("tied scores form one block regardless of input order") {
    // The tie at 0.5 holds one positive and one negative; the block rule
    // pins the precision at 2/3 either way.
    const double a = auprc(zip({0.8, 0.5, 0.5, 0.2}, {1, 0, 1, 0}));
    const double b = auprc(zip({0.8, 0.5, 0.5, 0.2}, {1, 1, 0, 0}));
    CHECK(a == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(a == b);
}

TEST_CASE("auprc rejects single-class inputs") {
    CHECK_THROWS_WITH_AS(auprc(zip({0.3, 0.7}, {0, 0})), doctest::Contains("both classes"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(auprc(zip({0.3, 0.7}, {1, 1})), doctest::Contains("both classes"),
                         std::invalid_argument);
}

TEST_CASE("randomized auprc stays within bounds and beats nothing it should not") {
    Rng rng(202);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(40));
        std::vector<ScoredLabel> examples;
        int pos = 0;
        for (int i = 0; i < n; ++i) {
            const int label = static_cast<int>(rng.below(2));
            pos += label;
            examples.push_back({rng.below(8) * 0.125, label});
        }
        if (pos == 0 || pos == n) {
            continue;
        }
        const double ap = auprc(examples);
        CHECK(ap > 0.0);
        CHECK(ap <= 1.0);
        const double roc = auroc(examples);
        CHECK(roc >= 0.0);
        CHECK(roc <= 1.0);
    }
}

TEST_CASE("perfect predictions score one everywhere") {
    const std::vector<int> labels = {0, 1, 2, 1, 0, 2};
    const MetricsReport r = multiclass_metrics(labels, labels, 3);
    CHECK(r.n == 6);
    CHECK(r.accuracy == 1.0);
    CHECK(r.macro_precision == 1.0);
    CHECK(r.macro_recall == 1.0);
    CHECK(r.macro_f1 == 1.0);
    CHECK(r.confusion[0][0] == 2);
    CHECK(r.confusion[1][1] == 2);
    CHECK(r.confusion[2][2] == 2);
    CHECK(r.confusion[0][1] == 0);
}

TEST_CASE("a constant predictor on balanced binary labels") {
    const MetricsReport r = multiclass_metrics({0, 0, 0, 0}, {0, 0, 1, 1}, 2);
    CHECK(r.accuracy == 0.5);
    CHECK(r.macro_precision == 0.25);
    CHECK(r.macro_recall == 0.5);
    // Class 0 reaches F1 = 2/3; class 1 gets the 0/0 rule.
    CHECK(r.macro_f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(r.confusion[1][0] == 2);
}

TEST_CASE("a class absent from labels and predictions contributes zero") {
    const MetricsReport r = multiclass_metrics({0, 1, 1, 0}, {0, 1, 0, 1}, 3);
    CHECK(r.accuracy == 0.5);
    CHECK(r.macro_precision == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(r.macro_recall == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(r.macro_f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(r.confusion[2][2] == 0);
}

TEST_CASE("confusion rows count labels and the trace recovers accuracy") {
    Rng rng(303);
    for (int trial = 0; trial < 100; ++trial) {
        const int n_classes = 2 + static_cast<int>(rng.below(5));
        const int n = 1 + static_cast<int>(rng.below(50));
        std::vector<int> labels(static_cast<std::size_t>(n));
        std::vector<int> preds(static_cast<std::size_t>(n));
        std::vector<long long> class_counts(static_cast<std::size_t>(n_classes), 0);
        long long agree = 0;
        for (int i = 0; i < n; ++i) {
            labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(n_classes));
            preds[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(n_classes));
            ++class_counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
            agree += labels[static_cast<std::size_t>(i)] == preds[static_cast<std::size_t>(i)];
        }
        const MetricsReport r = multiclass_metrics(preds, labels, n_classes);
        long long trace = 0;
        for (int c = 0; c < n_classes; ++c) {
            long long row = 0;
            for (int k = 0; k < n_classes; ++k) {
                row += r.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
            }
            CHECK(row == class_counts[static_cast<std::size_t>(c)]);
            trace += r.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
        }
        CHECK(trace == agree);
        CHECK(r.accuracy == static_cast<double>(agree) / static_cast<double>(n));
        CHECK(r.macro_precision >= 0.0);
        CHECK(r.macro_precision <= 1.0);
        CHECK(r.macro_recall >= 0.0);
        CHECK(r.macro_recall <= 1.0);
        CHECK(r.macro_f1 >= 0.0);
        CHECK(r.macro_f1 <= 1.0);
    }
}

TEST_CASE("multiclass_metrics rejects malformed inputs") {
    CHECK_THROWS_WITH_AS(multiclass_metrics({0, 1}, {0}, 2), doctest::Contains("pair up"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(multiclass_metrics({}, {}, 2), doctest::Contains("pair up"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(multiclass_metrics({0}, {0}, 1), doctest::Contains("at least 2"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(multiclass_metrics({2}, {0}, 2), doctest::Contains("out of range"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(multiclass_metrics({0}, {-1}, 2), doctest::Contains("out of range"),
                         std::invalid_argument);
}

TEST_CASE("reports serialize with optional ranking metrics") {
    MetricsReport r = multiclass_metrics({0, 1}, {0, 1}, 2);
    nlohmann::json j = r.to_json();
    CHECK(j["n"] == 2);
    CHECK(j["accuracy"] == 1.0);
    CHECK(j["confusion"].size() == 2);
    CHECK(j["confusion"][0][0] == 1);
    CHECK_FALSE(j.contains("auroc"));
    CHECK_FALSE(j.contains("auprc"));

    r.auroc = 0.75;
    r.auprc = 5.0 / 6.0;
    j = r.to_json();
    CHECK(j["auroc"] == 0.75);
    CHECK(j["auprc"] == doctest::Approx(5.0 / 6.0));
}

}
