#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coformer/data.hpp"

using namespace coformer;

namespace {

Observation make_obs(std::string id, int label, std::vector<std::vector<Sample>> variates) {
    Observation obs;
    obs.id = std::move(id);
    obs.label = label;
    for (auto& v : variates) {
        obs.variates.push_back({std::move(v)});
    }
    return obs;
}

bool same_observation(const Observation& a, const Observation& b) {
    if (a.id != b.id || a.label != b.label || a.static_features != b.static_features ||
        a.variates.size() != b.variates.size()) {
        return false;
    }
    for (std::size_t v = 0; v < a.variates.size(); ++v) {
        const auto& sa = a.variates[v].samples;
        const auto& sb = b.variates[v].samples;
        if (sa.size() != sb.size()) {
            return false;
        }
        for (std::size_t k = 0; k < sa.size(); ++k) {
            if (sa[k].timestamp != sb[k].timestamp || sa[k].measurement != sb[k].measurement) {
                return false;
            }
        }
    }
    return true;
}

std::string dump(const Dataset& ds) {
    std::ostringstream out;
    serialize_dataset(ds, out);
    return out.str();
}

}  // namespace

TEST_SUITE("data_model") {

TEST_CASE("validate_observation accepts a well-formed observation") {
    Observation obs = make_obs("a", 1, {{{0.0, 1.0}, {2.0, -1.0}}, {}});
    obs.static_features = {0.5, 0.5};
    CHECK(validate_observation(obs, {2, 3, 2}).empty());
    CHECK(obs.total_samples() == 2);
    CHECK(obs.non_empty_variates() == 1);
}

TEST_CASE("validate_observation flags an empty observation") {
    Observation obs = make_obs("a", 0, {{}, {}});
    const auto v = validate_observation(obs, {2, 2, 0});
    REQUIRE(v.size() == 1);
    CHECK(v.front() == "observation has no samples");
}

TEST_CASE("validate_observation flags non-finite values") {
    Observation nan_m = make_obs("a", 0, {{{1.0, std::numeric_limits<double>::quiet_NaN()}}});
    auto v = validate_observation(nan_m, {1, 2, 0});
    REQUIRE(v.size() == 1);
    CHECK(v.front().find("non-finite measurement") != std::string::npos);

    Observation inf_t = make_obs("a", 0, {{{std::numeric_limits<double>::infinity(), 1.0}}});
    v = validate_observation(inf_t, {1, 2, 0});
    REQUIRE(v.size() == 1);
    CHECK(v.front().find("timestamps must be finite") != std::string::npos);
}

TEST_CASE("validate_observation flags label, width, and order problems") {
    Observation obs = make_obs("a", 5, {{{0.0, 1.0}}});
    auto v = validate_observation(obs, {1, 2, 0});
    REQUIRE(v.size() == 1);
    CHECK(v.front().find("label 5") != std::string::npos);

    Observation wide = make_obs("b", 0, {{{0.0, 1.0}}, {}});
    CHECK(validate_observation(wide, {1, 2, 0}).size() == 1);

    Observation unsorted = make_obs("c", 0, {{{3.0, 1.0}, {1.0, 2.0}}});
    v = validate_observation(unsorted, {1, 2, 0});
    REQUIRE(v.size() == 1);
    CHECK(v.front().find("out of order") != std::string::npos);

    Observation neg_t = make_obs("d", 0, {{{-0.5, 1.0}}});
    CHECK(validate_observation(neg_t, {1, 2, 0}).size() == 1);

    Observation bad_static = make_obs("e", 0, {{{0.0, 1.0}}});
    bad_static.static_features = {std::numeric_limits<double>::quiet_NaN()};
    v = validate_observation(bad_static, {1, 2, 1});
    REQUIRE(v.size() == 1);
    CHECK(v.front() == "non-finite static feature");
}

TEST_CASE("parse sorts samples by timestamp and keeps ties stable") {
    std::istringstream in(
        R"({"id":"a","label":0,"variates":[[[3,30],[1,10],[3,31],[2,20]]]})"
        "\n");
    Dataset ds = parse_dataset(in);
    REQUIRE(ds.observations.size() == 1);
    const auto& s = ds.observations[0].variates[0].samples;
    REQUIRE(s.size() == 4);
    CHECK(s[0].timestamp == 1.0);
    CHECK(s[1].timestamp == 2.0);
    CHECK(s[2].timestamp == 3.0);
    CHECK(s[2].measurement == 30.0);
    CHECK(s[3].timestamp == 3.0);
    CHECK(s[3].measurement == 31.0);
}

TEST_CASE("parse infers meta from the stream") {
    std::istringstream in(
        R"({"id":"a","label":2,"variates":[[[0,1]],[]],"static":[1,2,3]})"
        "\n"
        R"({"id":"b","label":0,"variates":[[],[[1,5]]],"static":[4,5,6]})"
        "\n");
    Dataset ds = parse_dataset(in);
    CHECK(ds.meta.n_variates == 2);
    CHECK(ds.meta.n_classes == 3);
    CHECK(ds.meta.static_dim == 3);
    CHECK(ds.observations.size() == 2);
}

TEST_CASE("parse then serialize then parse is a fixed point") {
    std::istringstream in(
        R"({"id":"a","label":1,"variates":[[[0.125,-3.5],[2.75,0.0078125]],[]]})"
        "\n"
        R"({"id":"b","label":0,"variates":[[[7,-1]],[[0.1,0.2],[0.3,0.4]]]})"
        "\n");
    Dataset first = parse_dataset(in);
    std::istringstream round(dump(first));
    Dataset second = parse_dataset(round);
    CHECK(dump(first) == dump(second));
    REQUIRE(first.observations.size() == second.observations.size());
    for (std::size_t i = 0; i < first.observations.size(); ++i) {
        CHECK(same_observation(first.observations[i], second.observations[i]));
    }
}

TEST_CASE("parse reports the failing physical line") {
    std::istringstream in(
        R"({"id":"a","label":0,"variates":[[[0,1]]]})"
        "\n\n"
        R"({"id":"b","label":0,"variates":[[[0,1]]],"foo":3})"
        "\n");
    CHECK_THROWS_WITH_AS(parse_dataset(in),
                         doctest::Contains("line 3: unknown key \"foo\""), std::runtime_error);
}

TEST_CASE("parse rejects malformed JSON and bad field types") {
    std::istringstream bad_json("not json at all\n");
    CHECK_THROWS_WITH_AS(parse_dataset(bad_json), doctest::Contains("line 1: invalid JSON"),
                         std::runtime_error);

    std::istringstream bad_label(R"({"id":"a","label":"x","variates":[[[0,1]]]})"
                                 "\n");
    CHECK_THROWS_WITH_AS(parse_dataset(bad_label), doctest::Contains("\"label\""),
                         std::runtime_error);

    std::istringstream bad_pair(R"({"id":"a","label":0,"variates":[[[0]]]})"
                                "\n");
    CHECK_THROWS_WITH_AS(parse_dataset(bad_pair), doctest::Contains("[t, m] pair"),
                         std::runtime_error);

    std::istringstream negative(R"({"id":"a","label":-1,"variates":[[[0,1]]]})"
                                "\n");
    CHECK_THROWS_AS(parse_dataset(negative), std::runtime_error);

    std::istringstream empty("\n  \n");
    CHECK_THROWS_WITH_AS(parse_dataset(empty), "dataset is empty", std::runtime_error);
}

TEST_CASE("parse enforces static features on all observations or none") {
    std::istringstream in(
        R"({"id":"a","label":0,"variates":[[[0,1]]],"static":[1]})"
        "\n"
        R"({"id":"b","label":0,"variates":[[[0,1]]]})"
        "\n");
    CHECK_THROWS_WITH_AS(parse_dataset(in),
                         doctest::Contains("line 2: static features must be present"),
                         std::runtime_error);
}

TEST_CASE("parse enforces a consistent variate count") {
    std::istringstream in(
        R"({"id":"a","label":0,"variates":[[[0,1]],[]]})"
        "\n"
        R"({"id":"b","label":0,"variates":[[[0,1]]]})"
        "\n");
    CHECK_THROWS_WITH_AS(parse_dataset(in), doctest::Contains("line 2: inconsistent variate count"),
                         std::runtime_error);
}

TEST_CASE("parse against an expected meta validates every line") {
    std::istringstream ok(R"({"id":"a","label":1,"variates":[[[0,1]],[]]})"
                          "\n");
    Dataset ds = parse_dataset(ok, {2, 4, 0});
    CHECK(ds.meta.n_classes == 4);

    std::istringstream wrong(R"({"id":"a","label":1,"variates":[[[0,1]]]})"
                             "\n");
    CHECK_THROWS_WITH_AS(parse_dataset(wrong, DatasetMeta{2, 4, 0}),
                         doctest::Contains("expected 2 variates"), std::runtime_error);
}

TEST_CASE("irregularize with ratio zero is the identity") {
    Observation obs = make_obs("a", 1, {{{0.0, 1.0}, {1.0, 2.0}}, {{0.5, -1.0}}});
    Rng rng(3);
    Observation out = irregularize(obs, 0.0, rng);
    CHECK(same_observation(obs, out));
}

TEST_CASE("irregularize removes the floor of ratio times total") {
    Observation small = make_obs("a", 0, {{}});
    for (int i = 0; i < 10; ++i) {
        small.variates[0].samples.push_back({static_cast<double>(i), static_cast<double>(i)});
    }
    Rng rng(4);
    CHECK(irregularize(small, 0.95, rng).total_samples() == 1);

    Observation big = make_obs("b", 0, {{}, {}, {}});
    for (int v = 0; v < 3; ++v) {
        for (int i = 0; i < 200; ++i) {
            big.variates[v].samples.push_back({static_cast<double>(i), v * 1000.0 + i});
        }
    }
    Observation out = irregularize(big, 0.6, rng);
    CHECK(out.total_samples() == 240);
}

TEST_CASE("irregularize keeps retained samples intact and ordered") {
    Observation obs = make_obs("a", 1, {{}, {}});
    for (int v = 0; v < 2; ++v) {
        for (int i = 0; i < 50; ++i) {
            obs.variates[v].samples.push_back({i * 0.25, std::sin(v + i * 0.1)});
        }
    }
    Rng rng(5);
    Observation out = irregularize(obs, 0.5, rng);
    CHECK(out.id == obs.id);
    CHECK(out.label == obs.label);
    REQUIRE(out.variates.size() == 2);
    for (int v = 0; v < 2; ++v) {
        const auto& kept = out.variates[v].samples;
        const auto& orig = obs.variates[v].samples;
        std::size_t pos = 0;
        for (const auto& s : kept) {
            while (pos < orig.size() &&
                   (orig[pos].timestamp != s.timestamp || orig[pos].measurement != s.measurement)) {
                ++pos;
            }
            REQUIRE(pos < orig.size());
            ++pos;
        }
    }
}

TEST_CASE("irregularize is deterministic and rejects bad ratios") {
    Observation obs = make_obs("a", 0, {{}});
    for (int i = 0; i < 20; ++i) {
        obs.variates[0].samples.push_back({static_cast<double>(i), static_cast<double>(i)});
    }
    Rng r1(9);
    Rng r2(9);
    CHECK(same_observation(irregularize(obs, 0.4, r1), irregularize(obs, 0.4, r2)));

    Rng rng(9);
    CHECK_THROWS_AS(irregularize(obs, 1.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(irregularize(obs, -0.1, rng), std::invalid_argument);
    CHECK_THROWS_AS(irregularize(obs, std::numeric_limits<double>::quiet_NaN(), rng),
                    std::invalid_argument);
}

TEST_CASE("generate_synthetic produces a valid balanced dataset") {
    SyntheticConfig cfg;
    cfg.n_obs = 40;
    cfg.n_variates = 3;
    cfg.duration = 6.0;
    cfg.mean_samples_per_variate = 8.0;
    cfg.noise_std = 0.1;
    cfg.seed = 0;
    Rng rng(17);
    Dataset ds = generate_synthetic(cfg, rng);

    CHECK(ds.meta.n_variates == 3);
    CHECK(ds.meta.n_classes == 2);
    CHECK(ds.meta.static_dim == 0);
    REQUIRE(ds.observations.size() == 40);

    int ones = 0;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < ds.observations.size(); ++i) {
        const auto& obs = ds.observations[i];
        CHECK(validate_observation(obs, ds.meta).empty());
        CHECK(obs.label == static_cast<int>(i) % 2);
        ones += obs.label;
        ids.insert(obs.id);
        for (const auto& series : obs.variates) {
            CHECK(series.samples.size() >= 2);
            for (const auto& s : series.samples) {
                CHECK(s.timestamp >= 0.0);
                CHECK(s.timestamp < cfg.duration);
            }
        }
    }
    CHECK(ones == 20);
    CHECK(ids.size() == 40);
}

TEST_CASE("generate_synthetic enforces the minimum of two samples") {
    SyntheticConfig cfg;
    cfg.n_obs = 10;
    cfg.n_variates = 2;
    cfg.mean_samples_per_variate = 0.1;
    Rng rng(21);
    Dataset ds = generate_synthetic(cfg, rng);
    for (const auto& obs : ds.observations) {
        for (const auto& series : obs.variates) {
            CHECK(series.samples.size() >= 2);
        }
    }
}

TEST_CASE("generate_synthetic is deterministic in the rng") {
    SyntheticConfig cfg;
    cfg.n_obs = 12;
    cfg.n_variates = 2;
    Rng r1(33);
    Rng r2(33);
    CHECK(dump(generate_synthetic(cfg, r1)) == dump(generate_synthetic(cfg, r2)));
    Rng r3(34);
    CHECK(dump(generate_synthetic(cfg, r1)) != dump(generate_synthetic(cfg, r3)));
}

TEST_CASE("noise-free synthetic data is a pure sinusoid with class phase offsets") {
    SyntheticConfig cfg;
    cfg.n_obs = 20;
    cfg.n_variates = 4;
    cfg.duration = 5.0;
    cfg.mean_samples_per_variate = 15.0;
    cfg.noise_std = 0.0;
    Rng rng(55);
    Dataset ds = generate_synthetic(cfg, rng);

    for (const auto& obs : ds.observations) {
        std::vector<double> phase(obs.variates.size());
        for (std::size_t v = 0; v < obs.variates.size(); ++v) {
            const auto& s = obs.variates[v].samples;
            REQUIRE(s.size() >= 2);

            // Fit m = a sin(w t) + b cos(w t) from the best-conditioned sample
            // pair, so (a, b) = (cos phi, sin phi).
            std::size_t bi = 0;
            std::size_t bj = 1;
            double best = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                for (std::size_t j = i + 1; j < s.size(); ++j) {
                    const double det =
                        std::abs(std::sin(kSyntheticOmega * (s[i].timestamp - s[j].timestamp)));
                    if (det > best) {
                        best = det;
                        bi = i;
                        bj = j;
                    }
                }
            }
            REQUIRE(best > 0.05);
            const double s1 = std::sin(kSyntheticOmega * s[bi].timestamp);
            const double c1 = std::cos(kSyntheticOmega * s[bi].timestamp);
            const double s2 = std::sin(kSyntheticOmega * s[bj].timestamp);
            const double c2 = std::cos(kSyntheticOmega * s[bj].timestamp);
            const double det = s1 * c2 - c1 * s2;
            const double a = (s[bi].measurement * c2 - c1 * s[bj].measurement) / det;
            const double b = (s1 * s[bj].measurement - s[bi].measurement * s2) / det;

            for (const auto& sample : s) {
                const double predicted = a * std::sin(kSyntheticOmega * sample.timestamp) +
                                         b * std::cos(kSyntheticOmega * sample.timestamp);
                CHECK(std::abs(predicted - sample.measurement) < 1e-9);
            }
            phase[v] = std::atan2(b, a);
        }

        for (std::size_t v = 1; v < phase.size(); ++v) {
            const double expected =
                obs.label == 0 ? 0.0
                               : static_cast<double>(v) * std::numbers::pi / cfg.n_variates;
            double diff = phase[v] - phase[0] - expected;
            diff = std::remainder(diff, 2.0 * std::numbers::pi);
            CHECK(std::abs(diff) < 1e-9);
        }
    }
}

TEST_CASE("split_dataset cuts floor-sized validation and test splits") {
    SyntheticConfig cfg;
    cfg.n_obs = 10;
    cfg.n_variates = 2;
    Rng gen(1);
    Dataset ds = generate_synthetic(cfg, gen);

    Rng rng(2);
    SplitResult split = split_dataset(ds, {0.8, 0.1, 0.1}, rng);
    CHECK(split.train.observations.size() == 8);
    CHECK(split.val.observations.size() == 1);
    CHECK(split.test.observations.size() == 1);
    CHECK(split.warnings.empty());
    CHECK(split.train.meta.n_variates == ds.meta.n_variates);
}

TEST_CASE("split_dataset warns about empty splits") {
    SyntheticConfig cfg;
    cfg.n_obs = 3;
    cfg.n_variates = 1;
    Rng gen(1);
    Dataset ds = generate_synthetic(cfg, gen);

    Rng rng(2);
    SplitResult split = split_dataset(ds, {1.0, 0.0, 0.0}, rng);
    CHECK(split.train.observations.size() == 3);
    CHECK(split.val.observations.empty());
    CHECK(split.test.observations.empty());
    REQUIRE(split.warnings.size() == 2);
    CHECK(split.warnings[0] == "val split is empty");
    CHECK(split.warnings[1] == "test split is empty");
}

TEST_CASE("split_dataset partitions the observations") {
    SyntheticConfig cfg;
    cfg.n_obs = 25;
    cfg.n_variates = 2;
    Rng gen(7);
    Dataset ds = generate_synthetic(cfg, gen);

    Rng rng(8);
    SplitResult split = split_dataset(ds, {0.6, 0.2, 0.2}, rng);
    std::set<std::string> seen;
    for (const Dataset* part : {&split.train, &split.val, &split.test}) {
        for (const auto& obs : part->observations) {
            CHECK(seen.insert(obs.id).second);
        }
    }
    CHECK(seen.size() == ds.observations.size());
}

TEST_CASE("split_dataset is deterministic and validates fractions") {
    SyntheticConfig cfg;
    cfg.n_obs = 20;
    cfg.n_variates = 2;
    Rng gen(3);
    Dataset ds = generate_synthetic(cfg, gen);

    Rng r1(4);
    Rng r2(4);
    SplitResult a = split_dataset(ds, {0.5, 0.25, 0.25}, r1);
    SplitResult b = split_dataset(ds, {0.5, 0.25, 0.25}, r2);
    CHECK(dump(a.train) == dump(b.train));
    CHECK(dump(a.val) == dump(b.val));
    CHECK(dump(a.test) == dump(b.test));

    Rng rng(5);
    CHECK_THROWS_AS(split_dataset(ds, {0.5, 0.5, 0.5}, rng), std::invalid_argument);
    CHECK_THROWS_AS(split_dataset(ds, {1.5, -0.5, 0.0}, rng), std::invalid_argument);
}

}
