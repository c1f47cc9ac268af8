#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace coformer {

/// Dense row-major tensor of doubles.  Rank 1 (vectors) and rank 2 (matrices)
/// cover everything the model needs; higher ranks are rejected.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> values;

    Tensor() = default;
    Tensor(std::vector<int> shape_in, std::vector<double> values_in);

    static Tensor zeros(const std::vector<int>& shape);
    static Tensor from_vector(std::vector<double> v);

    std::size_t numel() const { return values.size(); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int axis) const { return shape.at(static_cast<std::size_t>(axis)); }

    /// Rank-2 accessors; row/col bounds are checked.
    double& at(int row, int col);
    double at(int row, int col) const;

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;
    std::string shape_str() const;
};

std::size_t shape_numel(const std::vector<int>& shape);

}  // namespace coformer
