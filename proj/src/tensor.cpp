#include "coformer/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace coformer {

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) {
            throw std::invalid_argument("tensor shape dimensions must be positive");
        }
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape_in, std::vector<double> values_in)
    : shape(std::move(shape_in)), values(std::move(values_in)) {
    if (shape.size() > 2) {
        throw std::invalid_argument("tensor rank above 2 is not supported");
    }
    if (shape_numel(shape) != values.size()) {
        throw std::invalid_argument("tensor shape does not match value count");
    }
}

Tensor Tensor::zeros(const std::vector<int>& shape) {
    return Tensor(shape, std::vector<double>(shape_numel(shape), 0.0));
}

Tensor Tensor::from_vector(std::vector<double> v) {
    const int n = static_cast<int>(v.size());
    return Tensor({n}, std::move(v));
}

double& Tensor::at(int row, int col) {
    if (rank() != 2) {
        throw std::logic_error("Tensor::at(row, col) requires rank 2");
    }
    if (row < 0 || row >= shape[0] || col < 0 || col >= shape[1]) {
        throw std::out_of_range("tensor index out of range");
    }
    return values[static_cast<std::size_t>(row) * shape[1] + col];
}

double Tensor::at(int row, int col) const {
    return const_cast<Tensor*>(this)->at(row, col);
}

bool Tensor::all_finite() const {
    for (double v : values) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

std::string Tensor::shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            s += ", ";
        }
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

}  // namespace coformer
