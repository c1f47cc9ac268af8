#include "coformer/encoder.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace coformer {

namespace {

std::string padded(int value, int width) {
    std::ostringstream out;
    out.width(width);
    out.fill('0');
    out << value;
    return out.str();
}

}  // namespace

void EncoderConfig::validate() const {
    if (n_variates < 1) {
        throw std::invalid_argument("encoder config: n_variates must be at least 1");
    }
    if (time_code_dim < 2 || time_code_dim % 2 != 0) {
        throw std::invalid_argument("encoder config: time_code_dim must be even and positive");
    }
    if (variate_code_dim < 1 || agg_linear_dim < 1 || measurement_embed_dim < 1 ||
        measurement_hidden_dim < 1) {
        throw std::invalid_argument("encoder config: feature widths must be positive");
    }
    if (n_layers < 1) {
        throw std::invalid_argument("encoder config: n_layers must be at least 1");
    }
    if (heads < 1 || d_model() % heads != 0) {
        throw std::invalid_argument("encoder config: heads must divide the model width");
    }
    neighbor.validate();
}

std::string measurement_mlp_prefix(int variate_id) {
    return "enc.me.v" + padded(variate_id, 3);
}

std::string encoder_layer_prefix(int layer) {
    return "enc.l" + padded(layer, 2);
}

void init_encoder_params(ParameterStore& store, const EncoderConfig& cfg, Rng& rng) {
    cfg.validate();
    for (int v = 0; v < cfg.n_variates; ++v) {
        init_mlp(store, measurement_mlp_prefix(v),
                 {1, cfg.measurement_hidden_dim, cfg.measurement_embed_dim}, rng);
    }
    {
        // Dictionary columns are variate codes, so the fan-in is the code width.
        const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.variate_code_dim));
        Tensor dict = Tensor::zeros({cfg.variate_code_dim, cfg.n_variates});
        for (auto& v : dict.values) {
            v = rng.uniform(-bound, bound);
        }
        store.add("enc.dict", std::move(dict));
    }
    store.add("enc.agg.w",
              init_weight(cfg.agg_linear_dim, cfg.measurement_embed_dim + cfg.time_code_dim, rng));
    store.add("enc.agg.b", Tensor::zeros({cfg.agg_linear_dim}));

    const AttentionShape att{cfg.d_model(), cfg.heads};
    for (int l = 0; l < cfg.n_layers; ++l) {
        const std::string prefix = encoder_layer_prefix(l);
        init_attention(store, prefix + ".intra", att, rng);
        init_attention(store, prefix + ".inter", att, rng);
        Tensor ones = Tensor::zeros({cfg.d_model()});
        for (auto& v : ones.values) {
            v = 1.0;
        }
        store.add(prefix + ".ln1.g", ones);
        store.add(prefix + ".ln1.b", Tensor::zeros({cfg.d_model()}));
        store.add(prefix + ".ln2.g", ones);
        store.add(prefix + ".ln2.b", Tensor::zeros({cfg.d_model()}));
    }
}

std::vector<double> encode_time(double t, int psi) {
    if (psi < 2 || psi % 2 != 0) {
        throw std::invalid_argument("encode_time: psi must be even and positive");
    }
    std::vector<double> u(static_cast<std::size_t>(psi));
    for (int k = 0; k < psi / 2; ++k) {
        const double divisor = std::pow(10000.0, 2.0 * k / static_cast<double>(psi));
        const double arg = t / divisor;
        u[static_cast<std::size_t>(2 * k)] = std::sin(arg);
        u[static_cast<std::size_t>(2 * k + 1)] = std::cos(arg);
    }
    return u;
}

Var encode_measurement(Graph& g, const ParameterStore& store, const EncoderConfig& cfg,
                       int variate_id, double measurement) {
    if (variate_id < 0 || variate_id >= cfg.n_variates) {
        throw std::invalid_argument("encode_measurement: variate id out of range");
    }
    Var x = g.constant(Tensor({1}, {measurement}));
    return mlp_forward(g, x, mlp_vars(g, store, measurement_mlp_prefix(variate_id)));
}

Var encode_variate(Graph& g, const ParameterStore& store, int variate_id) {
    return g.column(g.param(store, "enc.dict"), variate_id);
}

Var aggregate(Graph& g, const ParameterStore& store, Var measurement_embed, Var time_code,
              Var variate_code) {
    Var blended = g.affine(g.param(store, "enc.agg.w"), g.param(store, "enc.agg.b"),
                           g.concat(measurement_embed, time_code));
    return g.concat(variate_code, blended);
}

EncoderLayerVars encoder_layer_vars(Graph& g, const ParameterStore& store, int layer, int heads) {
    const std::string prefix = encoder_layer_prefix(layer);
    EncoderLayerVars vars;
    vars.intra = attention_vars(g, store, prefix + ".intra", heads);
    vars.ln1_gain = g.param(store, prefix + ".ln1.g");
    vars.ln1_bias = g.param(store, prefix + ".ln1.b");
    vars.inter = attention_vars(g, store, prefix + ".inter", heads);
    vars.ln2_gain = g.param(store, prefix + ".ln2.g");
    vars.ln2_bias = g.param(store, prefix + ".ln2.b");
    return vars;
}

namespace {

Var feature_of(const SampleFeatureMap& features, const NeighborIndex& index,
               const VariateTimePoint& p) {
    const int id = index.flat_id(p);
    if (id < 0 || static_cast<std::size_t>(id) >= features.features.size()) {
        throw std::logic_error("feature map does not cover the queried point");
    }
    return features.features[static_cast<std::size_t>(id)];
}

}  // namespace

Var intra_attention_step(Graph& g, const VariateTimePoint& p, const SampleFeatureMap& features,
                         const NeighborIndex& index, const EncoderLayerVars& layer) {
    const Var h_p = feature_of(features, index, p);
    std::vector<Var> neighbor_feats;
    for (const auto& n : index.intra(p)) {
        neighbor_feats.push_back(feature_of(features, index, n));
    }
    Var att = multi_head_attention(g, h_p, neighbor_feats, neighbor_feats, layer.intra);
    return g.layer_norm(g.add(h_p, att), layer.ln1_gain, layer.ln1_bias, kLayerNormEps);
}

Var inter_attention_step(Graph& g, const VariateTimePoint& p, const SampleFeatureMap& features,
                         const NeighborIndex& index, const NeighborQuery& query,
                         const EncoderLayerVars& layer) {
    const Var t_p = feature_of(features, index, p);
    const auto neighbors = index.inter(p, query);
    std::vector<Var> neighbor_feats;
    if (neighbors.empty()) {
        neighbor_feats.push_back(t_p);
    } else {
        neighbor_feats.reserve(neighbors.size());
        for (const auto& n : neighbors) {
            neighbor_feats.push_back(feature_of(features, index, n));
        }
    }
    Var att = multi_head_attention(g, t_p, neighbor_feats, neighbor_feats, layer.inter);
    return g.layer_norm(g.add(t_p, att), layer.ln2_gain, layer.ln2_bias, kLayerNormEps);
}

SampleFeatureMap encode_observation(Graph& g, const Observation& obs, const NeighborIndex& index,
                                    const EncoderConfig& cfg, const ParameterStore& store) {
    cfg.validate();
    if (static_cast<int>(obs.variates.size()) != cfg.n_variates) {
        throw std::invalid_argument("encode_observation: variate count does not match config");
    }
    const auto& points = index.points();
    if (points.empty()) {
        throw std::invalid_argument("encode_observation: observation has no samples");
    }

    SampleFeatureMap map;
    map.stage = SampleFeatureMap::Stage::Input;
    map.features.reserve(points.size());
    for (const auto& p : points) {
        const double m = obs.variates[static_cast<std::size_t>(p.variate_id)]
                             .samples[static_cast<std::size_t>(p.sample_idx)]
                             .measurement;
        Var e = encode_measurement(g, store, cfg, p.variate_id, m);
        Tensor u_val = cfg.time_encoding
                           ? Tensor::from_vector(encode_time(p.timestamp, cfg.time_code_dim))
                           : Tensor::zeros({cfg.time_code_dim});
        Var u = g.constant(std::move(u_val));
        Var v = encode_variate(g, store, p.variate_id);
        map.features.push_back(aggregate(g, store, e, u, v));
    }

    // Neighbor sets and flat gather lists are layer-independent.  An empty
    // inter set falls back to the point itself.
    std::vector<std::vector<int>> intra_ids(points.size());
    std::vector<std::vector<int>> inter_ids(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (const auto& n : index.intra(points[i])) {
            intra_ids[i].push_back(index.flat_id(n));
        }
        for (const auto& n : index.inter(points[i], cfg.neighbor)) {
            inter_ids[i].push_back(index.flat_id(n));
        }
        if (inter_ids[i].empty()) {
            inter_ids[i].push_back(static_cast<int>(i));
        }
    }

    auto attention_half = [&](const std::vector<Var>& in, const AttentionVars& att,
                              const std::vector<std::vector<int>>& neighbor_ids, Var ln_gain,
                              Var ln_bias) {
        std::vector<Var> q(points.size());
        std::vector<Var> k(points.size());
        std::vector<Var> v(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            q[i] = g.affine(att.wq, att.bq, in[i]);
            k[i] = g.affine(att.wk, att.bk, in[i]);
            v[i] = g.affine(att.wv, att.bv, in[i]);
        }
        std::vector<Var> out(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::vector<Var> keys;
            std::vector<Var> vals;
            keys.reserve(neighbor_ids[i].size());
            vals.reserve(neighbor_ids[i].size());
            for (int id : neighbor_ids[i]) {
                keys.push_back(k[static_cast<std::size_t>(id)]);
                vals.push_back(v[static_cast<std::size_t>(id)]);
            }
            Var mixed = g.attention_mix(q[i], keys, vals, att.heads);
            Var projected = g.affine(att.wo, att.bo, mixed);
            out[i] = g.layer_norm(g.add(in[i], projected), ln_gain, ln_bias, kLayerNormEps);
        }
        return out;
    };

    for (int l = 0; l < cfg.n_layers; ++l) {
        const EncoderLayerVars layer = encoder_layer_vars(g, store, l, cfg.heads);
        map.features = attention_half(map.features, layer.intra, intra_ids, layer.ln1_gain,
                                      layer.ln1_bias);
        map.stage = SampleFeatureMap::Stage::Intra;
        map.features = attention_half(map.features, layer.inter, inter_ids, layer.ln2_gain,
                                      layer.ln2_bias);
        map.stage = SampleFeatureMap::Stage::Inter;
    }
    return map;
}

}  // namespace coformer
