#include "coformer/head.hpp"

#include <stdexcept>

namespace coformer {

void HeadConfig::validate() const {
    if (n_classes < 2) {
        throw std::invalid_argument("head config: n_classes must be at least 2");
    }
    if (static_dim < 0) {
        throw std::invalid_argument("head config: static_dim must be non-negative");
    }
    if (static_dim > 0 && static_proj_dim < 1) {
        throw std::invalid_argument("head config: static_proj_dim must be positive");
    }
    if (classifier_hidden_dim < 1) {
        throw std::invalid_argument("head config: classifier_hidden_dim must be positive");
    }
}

void ModelConfig::validate() const {
    encoder.validate();
    head.validate();
}

void init_head_params(ParameterStore& store, const EncoderConfig& enc, const HeadConfig& cfg,
                      Rng& rng) {
    cfg.validate();
    init_attention(store, "head.pool", {enc.d_model(), enc.heads}, rng);
    int feature_dim = enc.d_model();
    if (cfg.static_dim > 0) {
        store.add("head.static.w", init_weight(cfg.static_proj_dim, cfg.static_dim, rng));
        store.add("head.static.b", Tensor::zeros({cfg.static_proj_dim}));
        feature_dim += cfg.static_proj_dim;
    }
    init_mlp(store, "head.cls", {feature_dim, cfg.classifier_hidden_dim, cfg.n_classes}, rng);
}

ParameterStore init_model_params(const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    ParameterStore store;
    init_encoder_params(store, cfg.encoder, rng);
    init_head_params(store, cfg.encoder, cfg.head, rng);
    return store;
}

Var variate_mean(Graph& g, const std::vector<Var>& features) {
    if (features.empty()) {
        throw std::invalid_argument("variate_mean: variate has no samples");
    }
    return g.mean(features);
}

Var variate_attention_pool(Graph& g, Var query, const std::vector<Var>& features,
                           const AttentionVars& pool) {
    if (features.empty()) {
        throw std::invalid_argument("variate_attention_pool: variate has no samples");
    }
    return multi_head_attention(g, query, features, features, pool);
}

Var observation_feature(Graph& g, const std::vector<Var>& variate_features) {
    if (variate_features.empty()) {
        throw std::invalid_argument("observation_feature: every variate is empty");
    }
    return g.mean(variate_features);
}

Var embed_static(Graph& g, const ParameterStore& store,
                 const std::vector<double>& static_features) {
    if (static_features.empty()) {
        throw std::invalid_argument("embed_static: empty static feature vector");
    }
    Var x = g.constant(Tensor::from_vector(static_features));
    return g.affine(g.param(store, "head.static.w"), g.param(store, "head.static.b"), x);
}

Var classify(Graph& g, const ParameterStore& store, Var feature) {
    return mlp_forward(g, feature, mlp_vars(g, store, "head.cls"));
}

Var observation_logits(Graph& g, const Observation& obs, const NeighborIndex& index,
                       const ModelConfig& cfg, const ParameterStore& store) {
    if (static_cast<int>(obs.static_features.size()) != cfg.head.static_dim) {
        throw std::invalid_argument("observation_logits: static feature width mismatch");
    }
    const SampleFeatureMap encoded = encode_observation(g, obs, index, cfg.encoder, store);

    const AttentionVars pool = attention_vars(g, store, "head.pool", cfg.encoder.heads);
    std::vector<Var> pooled;
    for (int v = 0; v < cfg.encoder.n_variates; ++v) {
        std::vector<Var> feats;
        const int count = index.samples_in(v);
        feats.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            const VariateTimePoint p{v, i, obs.variates[static_cast<std::size_t>(v)]
                                               .samples[static_cast<std::size_t>(i)]
                                               .timestamp};
            feats.push_back(encoded.features[static_cast<std::size_t>(index.flat_id(p))]);
        }
        if (feats.empty()) {
            continue;
        }
        Var f_mean = variate_mean(g, feats);
        pooled.push_back(variate_attention_pool(g, f_mean, feats, pool));
    }

    Var feature = observation_feature(g, pooled);
    if (cfg.head.static_dim > 0) {
        feature = g.concat(feature, embed_static(g, store, obs.static_features));
    }
    return classify(g, store, feature);
}

Var observation_loss(Graph& g, const Observation& obs, const NeighborIndex& index,
                     const ModelConfig& cfg, const ParameterStore& store) {
    if (obs.label < 0 || obs.label >= cfg.head.n_classes) {
        throw std::invalid_argument("observation_loss: label out of range");
    }
    return g.cross_entropy(observation_logits(g, obs, index, cfg, store), obs.label);
}

}  // namespace coformer
