#pragma once

#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "coformer/params.hpp"
#include "coformer/tensor.hpp"

namespace coformer {

class Graph;

namespace detail {
struct Node {
    Tensor value;
    Tensor grad;
    bool reached = false;
    std::vector<Node*> parents;
    std::function<void(const Tensor& upstream)> back;
    std::string param_name;
};
}  // namespace detail

/// Handle to a node inside a Graph.  Cheap to copy; only valid while the
/// owning graph is alive.
class Var {
public:
    Var() = default;
    bool valid() const { return node_ != nullptr; }
    const Tensor& value() const;
    const Tensor& grad() const;
    int dim() const { return value().dim(0); }

private:
    friend class Graph;
    explicit Var(detail::Node* node) : node_(node) {}
    detail::Node* node_ = nullptr;
};

/// Reverse-mode tape.  Every op appends a node whose creation order is a
/// topological order, so backward() is a single reverse sweep.  A graph is
/// built per forward pass and discarded afterwards.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    /// Leaf with no gradient tracking.
    Var constant(Tensor value);

    /// Leaf bound to a named parameter.  Repeated requests for the same name
    /// return the same node, so gradients from all uses accumulate.
    Var param(const ParameterStore& store, const std::string& name);

    /// y = W x + b with W rank 2 [out, in], b and x rank 1.
    Var affine(Var w, Var b, Var x);

    Var add(Var a, Var b);
    Var relu(Var x);
    Var concat(Var a, Var b);
    Var scale(Var x, double factor);

    /// Column j of a rank-2 matrix as a vector.
    Var column(Var m, int j);

    /// Elementwise mean of same-shaped vectors.
    Var mean(const std::vector<Var>& xs);

    Var softmax(Var z);
    Var layer_norm(Var x, Var gamma, Var beta, double eps);

    /// Scaled dot-product attention over pre-projected inputs: the query and
    /// each key/value is split into `heads` slices, every head softmax-mixes
    /// its values by q.k / sqrt(d_head), and the head outputs are
    /// re-concatenated.  One fused node covers the whole computation.
    Var attention_mix(Var q, const std::vector<Var>& keys, const std::vector<Var>& values,
                      int heads);

    /// Scalar cross-entropy of a logit vector against an integer label,
    /// computed via the shifted log-sum-exp.
    Var cross_entropy(Var logits, int label);

    /// Reverse sweep from a scalar loss.  May be called once per graph.
    void backward(Var loss);

    /// Gradient for every parameter in the store (zeros when a parameter does
    /// not participate in this graph).  Requires a prior backward().
    GradientMap gradients(const ParameterStore& store) const;

    /// acc[name] += scale * grad for every parameter node in this graph.
    /// Missing entries are created as zeros first.
    void accumulate_gradients(GradientMap& acc, double scale) const;

    std::size_t node_count() const { return nodes_.size(); }

private:
    detail::Node* fresh(Tensor value);
    Var wrap(detail::Node* n) { return Var(n); }
    static void require(bool cond, const std::string& what);

    std::deque<detail::Node> nodes_;
    std::map<std::string, detail::Node*> param_nodes_;
    bool backward_done_ = false;
};

/// Runs the reverse sweep and extracts per-parameter gradients in one call.
GradientMap compute_gradients(Graph& g, Var loss, const ParameterStore& params);

}  // namespace coformer
