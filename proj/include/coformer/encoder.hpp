#pragma once

#include <string>
#include <vector>

#include "coformer/data.hpp"
#include "coformer/neighbor.hpp"
#include "coformer/nn.hpp"

namespace coformer {

inline constexpr double kLayerNormEps = 1e-5;

struct EncoderConfig {
    int n_variates = 0;
    int time_code_dim = 256;
    int variate_code_dim = 32;
    int agg_linear_dim = 224;
    int measurement_embed_dim = 256;
    int measurement_hidden_dim = 256;
    int heads = 8;
    int n_layers = 4;
    NeighborQuery neighbor = NeighborQuery::knn(30);
    /// With the flag off the time code is a zero vector of the same width,
    /// which removes all timestamp information from the features.
    bool time_encoding = true;

    int d_model() const { return variate_code_dim + agg_linear_dim; }
    void validate() const;
};

/// Parameter name prefixes; indices are zero-padded so lexicographic order
/// matches numeric order.
std::string measurement_mlp_prefix(int variate_id);
std::string encoder_layer_prefix(int layer);

void init_encoder_params(ParameterStore& store, const EncoderConfig& cfg, Rng& rng);

/// Sinusoidal time code: entry 2k is sin(t / 10000^(2k/psi)) and entry 2k+1
/// is cos of the same argument, for k in [0, psi/2).
std::vector<double> encode_time(double t, int psi);

/// Per-variate MLP embedding of one scalar measurement.
Var encode_measurement(Graph& g, const ParameterStore& store, const EncoderConfig& cfg,
                       int variate_id, double measurement);

/// Trainable code of a variate: one column of the shared dictionary.
Var encode_variate(Graph& g, const ParameterStore& store, int variate_id);

/// Initial per-sample feature: the variate code concatenated with a linear
/// blend of the measurement embedding and the time code.
Var aggregate(Graph& g, const ParameterStore& store, Var measurement_embed, Var time_code,
              Var variate_code);

/// Per-sample features at one stage of the encoder, indexed by the flat
/// (canonical) point id of a NeighborIndex.
struct SampleFeatureMap {
    enum class Stage { Input, Intra, Inter };
    Stage stage = Stage::Input;
    std::vector<Var> features;
};

struct EncoderLayerVars {
    AttentionVars intra;
    Var ln1_gain, ln1_bias;
    AttentionVars inter;
    Var ln2_gain, ln2_bias;
};

EncoderLayerVars encoder_layer_vars(Graph& g, const ParameterStore& store, int layer, int heads);

/// One point through the intra-variate half of a layer: attention over every
/// point of the same variate (itself included), residual, layer norm.
Var intra_attention_step(Graph& g, const VariateTimePoint& p, const SampleFeatureMap& features,
                         const NeighborIndex& index, const EncoderLayerVars& layer);

/// One point through the inter-variate half: attention over the other-variate
/// neighbor set, residual, layer norm.  When the neighbor set is empty the
/// point attends to itself, keeping the operator total.
Var inter_attention_step(Graph& g, const VariateTimePoint& p, const SampleFeatureMap& features,
                         const NeighborIndex& index, const NeighborQuery& query,
                         const EncoderLayerVars& layer);

/// Full encoder: initial features, then n_layers of intra followed by inter
/// attention, each layer consuming the previous layer's output.  Keys and
/// values are projected once per layer and gathered per query, which is
/// arithmetically identical to projecting inside every step.
SampleFeatureMap encode_observation(Graph& g, const Observation& obs, const NeighborIndex& index,
                                    const EncoderConfig& cfg, const ParameterStore& store);

}  // namespace coformer
