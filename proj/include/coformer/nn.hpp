#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coformer/graph.hpp"
#include "coformer/params.hpp"
#include "coformer/rng.hpp"

namespace coformer {

/// Weight matrices are filled uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)]
/// in row-major order; biases start at zero.
Tensor init_weight(int rows, int cols, Rng& rng);

/// Three affine layers with ReLU after the first two; the output is linear.
struct MlpShape {
    int in = 0;
    int hidden = 0;
    int out = 0;
};

struct MlpVars {
    Var w1, b1, w2, b2, w3, b3;
};

void init_mlp(ParameterStore& store, const std::string& prefix, const MlpShape& shape, Rng& rng);
MlpVars mlp_vars(Graph& g, const ParameterStore& store, const std::string& prefix);
Var mlp_forward(Graph& g, Var x, const MlpVars& p);

/// Query/key/value/output projections of one attention block.
struct AttentionShape {
    int dim = 0;
    int heads = 0;
};

struct AttentionVars {
    Var wq, bq, wk, bk, wv, bv, wo, bo;
    int heads = 0;
};

void init_attention(ParameterStore& store, const std::string& prefix, const AttentionShape& shape,
                    Rng& rng);
AttentionVars attention_vars(Graph& g, const ParameterStore& store, const std::string& prefix,
                             int heads);

/// Full multi-head attention of one query against a neighbor set: projects
/// the query, every key and every value, mixes per head, then applies the
/// output projection.  No residual or normalization; callers add those.
Var multi_head_attention(Graph& g, Var query, const std::vector<Var>& keys,
                         const std::vector<Var>& values, const AttentionVars& p);

/// Forward-only softmax used outside the graph (prediction, tests).
std::vector<double> softmax_values(const std::vector<double>& z);

/// Index of the largest element; ties resolve to the lowest index.
int argmax_lowest(const std::vector<double>& v);

struct AdamHyper {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    GradientMap m;
    GradientMap v;
    long long step = 0;

    static AdamState init(const ParameterStore& params);
};

/// One bias-corrected Adam update over every parameter in the store.
void adam_step(ParameterStore& params, const GradientMap& grads, AdamState& state,
               const AdamHyper& hyper);

struct GradcheckOptions {
    double eps_fd = 1e-4;
    double tolerance = 1e-3;
    /// 0 checks every coordinate; otherwise at most this many per parameter,
    /// sampled with sample_seed.
    std::size_t max_coords_per_param = 0;
    std::uint64_t sample_seed = 0;
};

struct GradcheckCoordinate {
    std::string param;
    int index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_err = 0.0;
};

struct GradcheckReport {
    double max_rel_err = 0.0;
    GradcheckCoordinate worst;
    std::size_t n_checked = 0;
    std::size_t n_skipped = 0;
    std::vector<GradcheckCoordinate> skipped;

    bool passed(double tolerance) const { return n_checked > 0 && max_rel_err < tolerance; }
};

/// Central-difference verification of analytic gradients.  Coordinates whose
/// one-sided slopes disagree (the loss is locally non-smooth there, e.g. at a
/// ReLU kink) are excluded and reported as skipped rather than failed.
GradcheckReport finite_difference_gradcheck(
    const std::function<double(const ParameterStore&)>& loss_fn,
    const std::function<GradientMap(const ParameterStore&)>& grad_fn, const ParameterStore& params,
    const GradcheckOptions& options);

}  // namespace coformer
