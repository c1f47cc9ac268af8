#pragma once

#include <map>
#include <string>

#include "coformer/tensor.hpp"

namespace coformer {

/// Named model parameters.  Iteration order is lexicographic by name, which
/// fixes the layout used by gradient accumulation, the optimizer, and the
/// checkpoint payload.
class ParameterStore {
public:
    void add(const std::string& name, Tensor value);
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool contains(const std::string& name) const;

    std::size_t size() const { return entries_.size(); }
    std::size_t total_elements() const;

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

private:
    std::map<std::string, Tensor> entries_;
};

/// Per-parameter gradients, keyed like the store they were computed against.
using GradientMap = std::map<std::string, Tensor>;

}  // namespace coformer
