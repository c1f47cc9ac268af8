#pragma once

#include <vector>

#include "coformer/encoder.hpp"

namespace coformer {

struct HeadConfig {
    int n_classes = 0;
    int static_dim = 0;
    int static_proj_dim = 64;
    int classifier_hidden_dim = 256;

    void validate() const;
};

/// Encoder and head together describe one model.
struct ModelConfig {
    EncoderConfig encoder;
    HeadConfig head;

    void validate() const;
};

void init_head_params(ParameterStore& store, const EncoderConfig& enc, const HeadConfig& cfg,
                      Rng& rng);

/// All model parameters, freshly initialized from the given rng.
ParameterStore init_model_params(const ModelConfig& cfg, Rng& rng);

/// Temporal mean of one variate's final sample features.
Var variate_mean(Graph& g, const std::vector<Var>& features);

/// Attention readout of one variate: the mean feature queries the variate's
/// sample features.
Var variate_attention_pool(Graph& g, Var query, const std::vector<Var>& features,
                           const AttentionVars& pool);

/// Observation feature: mean of the per-variate readouts (empty variates are
/// skipped).
Var observation_feature(Graph& g, const std::vector<Var>& variate_features);

Var embed_static(Graph& g, const ParameterStore& store, const std::vector<double>& static_features);

/// Classifier logits from the observation feature.
Var classify(Graph& g, const ParameterStore& store, Var feature);

/// Full forward pass: encoder, per-variate pooling, optional static features,
/// classifier.
Var observation_logits(Graph& g, const Observation& obs, const NeighborIndex& index,
                       const ModelConfig& cfg, const ParameterStore& store);

/// Cross-entropy of the forward pass against the observation's label.
Var observation_loss(Graph& g, const Observation& obs, const NeighborIndex& index,
                     const ModelConfig& cfg, const ParameterStore& store);

}  // namespace coformer
