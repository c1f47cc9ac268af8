#include "coformer/graph.hpp"

#include <algorithm>
#include <memory>
#include <cmath>
#include <stdexcept>

namespace coformer {

const Tensor& Var::value() const {
    if (node_ == nullptr) {
        throw std::logic_error("Var::value on an empty handle");
    }
    return node_->value;
}

const Tensor& Var::grad() const {
    if (node_ == nullptr) {
        throw std::logic_error("Var::grad on an empty handle");
    }
    if (node_->grad.numel() == 0) {
        throw std::logic_error("gradient not available before backward()");
    }
    return node_->grad;
}

void Graph::require(bool cond, const std::string& what) {
    if (!cond) {
        throw std::invalid_argument("graph: " + what);
    }
}

detail::Node* Graph::fresh(Tensor value) {
    require(!backward_done_, "graph is frozen after backward()");
    nodes_.emplace_back();
    nodes_.back().value = std::move(value);
    return &nodes_.back();
}

Var Graph::constant(Tensor value) {
    return wrap(fresh(std::move(value)));
}

Var Graph::param(const ParameterStore& store, const std::string& name) {
    auto it = param_nodes_.find(name);
    if (it != param_nodes_.end()) {
        return wrap(it->second);
    }
    detail::Node* n = fresh(store.at(name));
    n->param_name = name;
    param_nodes_[name] = n;
    return wrap(n);
}

Var Graph::affine(Var w, Var b, Var x) {
    require(w.valid() && b.valid() && x.valid(), "affine: empty operand");
    const Tensor& W = w.value();
    const Tensor& B = b.value();
    const Tensor& X = x.value();
    require(W.rank() == 2, "affine: weight must be rank 2");
    require(B.rank() == 1 && X.rank() == 1, "affine: bias and input must be rank 1");
    require(W.dim(1) == X.dim(0), "affine: weight columns must match input size");
    require(W.dim(0) == B.dim(0), "affine: weight rows must match bias size");

    const int rows = W.dim(0);
    const int cols = W.dim(1);
    Tensor out = Tensor::zeros({rows});
    for (int r = 0; r < rows; ++r) {
        double acc = B[static_cast<std::size_t>(r)];
        const double* wrow = &W.values[static_cast<std::size_t>(r) * cols];
        for (int c = 0; c < cols; ++c) {
            acc += wrow[c] * X[static_cast<std::size_t>(c)];
        }
        out[static_cast<std::size_t>(r)] = acc;
    }

    detail::Node* n = fresh(std::move(out));
    detail::Node* wn = w.node_;
    detail::Node* bn = b.node_;
    detail::Node* xn = x.node_;
    n->parents = {wn, bn, xn};
    n->back = [wn, bn, xn, rows, cols](const Tensor& g) {
        for (int r = 0; r < rows; ++r) {
            const double gr = g[static_cast<std::size_t>(r)];
            bn->grad[static_cast<std::size_t>(r)] += gr;
            double* wgrow = &wn->grad.values[static_cast<std::size_t>(r) * cols];
            const double* wrow = &wn->value.values[static_cast<std::size_t>(r) * cols];
            for (int c = 0; c < cols; ++c) {
                wgrow[c] += gr * xn->value[static_cast<std::size_t>(c)];
                xn->grad[static_cast<std::size_t>(c)] += gr * wrow[c];
            }
        }
    };
    return wrap(n);
}

Var Graph::add(Var a, Var b) {
    require(a.valid() && b.valid(), "add: empty operand");
    require(a.value().same_shape(b.value()), "add: shape mismatch");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.numel(); ++i) {
        out[i] += b.value()[i];
    }
    detail::Node* n = fresh(std::move(out));
    n->parents = {a.node_, b.node_};
    detail::Node* an = a.node_;
    detail::Node* bn = b.node_;
    n->back = [an, bn](const Tensor& g) {
        for (std::size_t i = 0; i < g.numel(); ++i) {
            an->grad[i] += g[i];
            bn->grad[i] += g[i];
        }
    };
    return wrap(n);
}

Var Graph::relu(Var x) {
    require(x.valid(), "relu: empty operand");
    Tensor out = x.value();
    for (auto& v : out.values) {
        v = std::max(0.0, v);
    }
    detail::Node* n = fresh(std::move(out));
    n->parents = {x.node_};
    detail::Node* xn = x.node_;
    n->back = [xn](const Tensor& g) {
        for (std::size_t i = 0; i < g.numel(); ++i) {
            if (xn->value[i] > 0.0) {
                xn->grad[i] += g[i];
            }
        }
    };
    return wrap(n);
}

Var Graph::concat(Var a, Var b) {
    require(a.valid() && b.valid(), "concat: empty operand");
    require(a.value().rank() == 1 && b.value().rank() == 1, "concat: operands must be rank 1");
    const std::size_t na = a.value().numel();
    const std::size_t nb = b.value().numel();
    Tensor out = Tensor::zeros({static_cast<int>(na + nb)});
    std::copy(a.value().values.begin(), a.value().values.end(), out.values.begin());
    std::copy(b.value().values.begin(), b.value().values.end(), out.values.begin() + static_cast<long>(na));
    detail::Node* n = fresh(std::move(out));
    n->parents = {a.node_, b.node_};
    detail::Node* an = a.node_;
    detail::Node* bn = b.node_;
    n->back = [an, bn, na, nb](const Tensor& g) {
        for (std::size_t i = 0; i < na; ++i) {
            an->grad[i] += g[i];
        }
        for (std::size_t i = 0; i < nb; ++i) {
            bn->grad[i] += g[na + i];
        }
    };
    return wrap(n);
}

Var Graph::scale(Var x, double factor) {
    require(x.valid(), "scale: empty operand");
    Tensor out = x.value();
    for (auto& v : out.values) {
        v *= factor;
    }
    detail::Node* n = fresh(std::move(out));
    n->parents = {x.node_};
    detail::Node* xn = x.node_;
    n->back = [xn, factor](const Tensor& g) {
        for (std::size_t i = 0; i < g.numel(); ++i) {
            xn->grad[i] += factor * g[i];
        }
    };
    return wrap(n);
}

Var Graph::column(Var m, int j) {
    require(m.valid(), "column: empty operand");
    const Tensor& M = m.value();
    require(M.rank() == 2, "column: operand must be rank 2");
    require(j >= 0 && j < M.dim(1), "column: index out of range");
    const int rows = M.dim(0);
    const int cols = M.dim(1);
    Tensor out = Tensor::zeros({rows});
    for (int r = 0; r < rows; ++r) {
        out[static_cast<std::size_t>(r)] = M.values[static_cast<std::size_t>(r) * cols + j];
    }
    detail::Node* n = fresh(std::move(out));
    n->parents = {m.node_};
    detail::Node* mn = m.node_;
    n->back = [mn, j, rows, cols](const Tensor& g) {
        for (int r = 0; r < rows; ++r) {
            mn->grad.values[static_cast<std::size_t>(r) * cols + j] += g[static_cast<std::size_t>(r)];
        }
    };
    return wrap(n);
}

Var Graph::mean(const std::vector<Var>& xs) {
    require(!xs.empty(), "mean: needs at least one input");
    for (const Var& x : xs) {
        require(x.valid(), "mean: empty operand");
        require(x.value().same_shape(xs.front().value()), "mean: shape mismatch");
    }
    const double inv = 1.0 / static_cast<double>(xs.size());
    Tensor out = Tensor::zeros(xs.front().value().shape);
    for (const Var& x : xs) {
        for (std::size_t i = 0; i < out.numel(); ++i) {
            out[i] += x.value()[i];
        }
    }
    for (auto& v : out.values) {
        v *= inv;
    }
    detail::Node* n = fresh(std::move(out));
    std::vector<detail::Node*> parents;
    parents.reserve(xs.size());
    for (const Var& x : xs) {
        parents.push_back(x.node_);
    }
    n->parents = parents;
    n->back = [parents, inv](const Tensor& g) {
        for (detail::Node* p : parents) {
            for (std::size_t i = 0; i < g.numel(); ++i) {
                p->grad[i] += inv * g[i];
            }
        }
    };
    return wrap(n);
}

Var Graph::softmax(Var z) {
    require(z.valid(), "softmax: empty operand");
    require(z.value().rank() == 1, "softmax: operand must be rank 1");
    const Tensor& Z = z.value();
    double m = Z[0];
    for (double v : Z.values) {
        m = std::max(m, v);
    }
    Tensor out = Tensor::zeros(Z.shape);
    double sum = 0.0;
    for (std::size_t i = 0; i < Z.numel(); ++i) {
        out[i] = std::exp(Z[i] - m);
        sum += out[i];
    }
    for (auto& v : out.values) {
        v /= sum;
    }
    detail::Node* n = fresh(std::move(out));
    n->parents = {z.node_};
    detail::Node* zn = z.node_;
    detail::Node* self = n;
    n->back = [zn, self](const Tensor& g) {
        const Tensor& y = self->value;
        double dot = 0.0;
        for (std::size_t i = 0; i < g.numel(); ++i) {
            dot += g[i] * y[i];
        }
        for (std::size_t i = 0; i < g.numel(); ++i) {
            zn->grad[i] += y[i] * (g[i] - dot);
        }
    };
    return wrap(n);
}

Var Graph::layer_norm(Var x, Var gamma, Var beta, double eps) {
    require(x.valid() && gamma.valid() && beta.valid(), "layer_norm: empty operand");
    require(eps > 0.0, "layer_norm: eps must be positive");
    const Tensor& X = x.value();
    require(X.rank() == 1, "layer_norm: input must be rank 1");
    require(gamma.value().same_shape(X) && beta.value().same_shape(X),
            "layer_norm: gain and bias must match input shape");

    const std::size_t d = X.numel();
    const double invd = 1.0 / static_cast<double>(d);
    double mu = 0.0;
    for (double v : X.values) {
        mu += v;
    }
    mu *= invd;
    double var = 0.0;
    for (double v : X.values) {
        var += (v - mu) * (v - mu);
    }
    var *= invd;
    const double inv_std = 1.0 / std::sqrt(var + eps);

    // Cache the normalized input; the backward pass reuses it.
    auto xhat = std::make_shared<std::vector<double>>(d);
    Tensor out = Tensor::zeros(X.shape);
    for (std::size_t i = 0; i < d; ++i) {
        (*xhat)[i] = (X[i] - mu) * inv_std;
        out[i] = gamma.value()[i] * (*xhat)[i] + beta.value()[i];
    }

    detail::Node* n = fresh(std::move(out));
    n->parents = {x.node_, gamma.node_, beta.node_};
    detail::Node* xn = x.node_;
    detail::Node* gn = gamma.node_;
    detail::Node* bn = beta.node_;
    n->back = [xn, gn, bn, xhat, inv_std, invd](const Tensor& g) {
        const std::size_t d = g.numel();
        double mean_w = 0.0;
        double mean_wx = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double w = g[i] * gn->value[i];
            mean_w += w;
            mean_wx += w * (*xhat)[i];
        }
        mean_w *= invd;
        mean_wx *= invd;
        for (std::size_t i = 0; i < d; ++i) {
            const double w = g[i] * gn->value[i];
            xn->grad[i] += (w - mean_w - (*xhat)[i] * mean_wx) * inv_std;
            gn->grad[i] += g[i] * (*xhat)[i];
            bn->grad[i] += g[i];
        }
    };
    return wrap(n);
}

Var Graph::attention_mix(Var q, const std::vector<Var>& keys, const std::vector<Var>& values,
                         int heads) {
    require(q.valid(), "attention_mix: empty query");
    require(!keys.empty(), "attention_mix: needs at least one key");
    require(keys.size() == values.size(), "attention_mix: key/value count mismatch");
    const Tensor& Q = q.value();
    require(Q.rank() == 1, "attention_mix: query must be rank 1");
    const int d = Q.dim(0);
    require(heads > 0 && d % heads == 0, "attention_mix: heads must divide the feature size");
    for (std::size_t i = 0; i < keys.size(); ++i) {
        require(keys[i].valid() && values[i].valid(), "attention_mix: empty operand");
        require(keys[i].value().same_shape(Q) && values[i].value().same_shape(Q),
                "attention_mix: key/value shape mismatch");
    }

    const int dh = d / heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    const std::size_t m = keys.size();

    std::vector<detail::Node*> key_nodes(m);
    std::vector<detail::Node*> value_nodes(m);
    for (std::size_t i = 0; i < m; ++i) {
        key_nodes[i] = keys[i].node_;
        value_nodes[i] = values[i].node_;
    }

    // alphas[h * m + i] is the attention weight of neighbor i under head h;
    // the backward pass needs them all.
    auto alphas = std::make_shared<std::vector<double>>(static_cast<std::size_t>(heads) * m);
    Tensor out = Tensor::zeros({d});
    std::vector<double> scores(m);
    for (int h = 0; h < heads; ++h) {
        const int base = h * dh;
        double max_score = -1e300;
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (int c = 0; c < dh; ++c) {
                s += Q[static_cast<std::size_t>(base + c)] *
                     key_nodes[i]->value[static_cast<std::size_t>(base + c)];
            }
            scores[i] = s * inv_sqrt;
            max_score = std::max(max_score, scores[i]);
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double e = std::exp(scores[i] - max_score);
            (*alphas)[static_cast<std::size_t>(h) * m + i] = e;
            sum += e;
        }
        for (std::size_t i = 0; i < m; ++i) {
            const double a = (*alphas)[static_cast<std::size_t>(h) * m + i] / sum;
            (*alphas)[static_cast<std::size_t>(h) * m + i] = a;
            for (int c = 0; c < dh; ++c) {
                out[static_cast<std::size_t>(base + c)] +=
                    a * value_nodes[i]->value[static_cast<std::size_t>(base + c)];
            }
        }
    }

    detail::Node* n = fresh(std::move(out));
    n->parents.reserve(1 + 2 * m);
    n->parents.push_back(q.node_);
    for (auto* kn : key_nodes) {
        n->parents.push_back(kn);
    }
    for (auto* vn : value_nodes) {
        n->parents.push_back(vn);
    }
    detail::Node* qn = q.node_;
    n->back = [qn, key_nodes, value_nodes, alphas, heads, dh, m, inv_sqrt](const Tensor& g) {
        // Per head: dv_i = a_i g, da_i = g . v_i, then the softmax jacobian
        // ds_i = a_i (da_i - sum_j a_j da_j) feeds dq and dk.
        std::vector<double> da(m);
        for (int h = 0; h < heads; ++h) {
            const int base = h * dh;
            double mix = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double a = (*alphas)[static_cast<std::size_t>(h) * m + i];
                double dot = 0.0;
                for (int c = 0; c < dh; ++c) {
                    const double gc = g[static_cast<std::size_t>(base + c)];
                    dot += gc * value_nodes[i]->value[static_cast<std::size_t>(base + c)];
                    value_nodes[i]->grad[static_cast<std::size_t>(base + c)] += a * gc;
                }
                da[i] = dot;
                mix += a * dot;
            }
            for (std::size_t i = 0; i < m; ++i) {
                const double a = (*alphas)[static_cast<std::size_t>(h) * m + i];
                const double ds = a * (da[i] - mix) * inv_sqrt;
                for (int c = 0; c < dh; ++c) {
                    qn->grad[static_cast<std::size_t>(base + c)] +=
                        ds * key_nodes[i]->value[static_cast<std::size_t>(base + c)];
                    key_nodes[i]->grad[static_cast<std::size_t>(base + c)] +=
                        ds * qn->value[static_cast<std::size_t>(base + c)];
                }
            }
        }
    };
    return wrap(n);
}

Var Graph::cross_entropy(Var logits, int label) {
    require(logits.valid(), "cross_entropy: empty operand");
    const Tensor& Z = logits.value();
    require(Z.rank() == 1, "cross_entropy: logits must be rank 1");
    require(label >= 0 && label < Z.dim(0), "cross_entropy: label out of range");

    double m = Z[0];
    for (double v : Z.values) {
        m = std::max(m, v);
    }
    double sum = 0.0;
    auto probs = std::make_shared<std::vector<double>>(Z.numel());
    for (std::size_t i = 0; i < Z.numel(); ++i) {
        (*probs)[i] = std::exp(Z[i] - m);
        sum += (*probs)[i];
    }
    for (auto& p : *probs) {
        p /= sum;
    }
    const double loss = std::log(sum) + m - Z[static_cast<std::size_t>(label)];

    detail::Node* n = fresh(Tensor({1}, {loss}));
    n->parents = {logits.node_};
    detail::Node* zn = logits.node_;
    n->back = [zn, probs, label](const Tensor& g) {
        const double go = g[0];
        for (std::size_t i = 0; i < probs->size(); ++i) {
            const double onehot = static_cast<int>(i) == label ? 1.0 : 0.0;
            zn->grad[i] += go * ((*probs)[i] - onehot);
        }
    };
    return wrap(n);
}

void Graph::backward(Var loss) {
    require(loss.valid(), "backward: empty loss handle");
    require(!backward_done_, "backward: may only run once per graph");
    require(loss.value().numel() == 1, "backward: loss must be scalar");
    if (!std::isfinite(loss.value()[0])) {
        throw std::runtime_error("backward: loss is not finite");
    }
    backward_done_ = true;

    for (auto& node : nodes_) {
        node.grad = Tensor::zeros(node.value.shape);
    }
    loss.node_->grad[0] = 1.0;
    loss.node_->reached = true;

    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        detail::Node& node = *it;
        if (!node.reached || !node.back) {
            continue;
        }
        for (double v : node.grad.values) {
            if (!std::isfinite(v)) {
                throw std::runtime_error("backward: non-finite gradient encountered");
            }
        }
        node.back(node.grad);
        for (detail::Node* p : node.parents) {
            p->reached = true;
        }
    }
}

GradientMap Graph::gradients(const ParameterStore& store) const {
    require(backward_done_, "gradients: backward() has not run");
    GradientMap out;
    for (const auto& [name, value] : store) {
        auto it = param_nodes_.find(name);
        if (it != param_nodes_.end() && it->second->reached) {
            out.emplace(name, it->second->grad);
        } else {
            out.emplace(name, Tensor::zeros(value.shape));
        }
    }
    return out;
}

void Graph::accumulate_gradients(GradientMap& acc, double scale) const {
    require(backward_done_, "accumulate_gradients: backward() has not run");
    for (const auto& [name, node] : param_nodes_) {
        auto it = acc.find(name);
        if (it == acc.end()) {
            it = acc.emplace(name, Tensor::zeros(node->value.shape)).first;
        }
        if (!node->reached) {
            continue;
        }
        for (std::size_t i = 0; i < node->grad.numel(); ++i) {
            it->second[i] += scale * node->grad[i];
        }
    }
}

GradientMap compute_gradients(Graph& g, Var loss, const ParameterStore& params) {
    g.backward(loss);
    return g.gradients(params);
}

}  // namespace coformer
