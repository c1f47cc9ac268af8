#include "coformer/params.hpp"

#include <stdexcept>

namespace coformer {

void ParameterStore::add(const std::string& name, Tensor value) {
    if (name.empty()) {
        throw std::invalid_argument("parameter name must not be empty");
    }
    auto [it, inserted] = entries_.emplace(name, std::move(value));
    (void)it;
    if (!inserted) {
        throw std::invalid_argument("duplicate parameter name: " + name);
    }
}

Tensor& ParameterStore::at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
        throw std::out_of_range("unknown parameter: " + name);
    }
    return it->second;
}

const Tensor& ParameterStore::at(const std::string& name) const {
    return const_cast<ParameterStore*>(this)->at(name);
}

bool ParameterStore::contains(const std::string& name) const {
    return entries_.find(name) != entries_.end();
}

std::size_t ParameterStore::total_elements() const {
    std::size_t n = 0;
    for (const auto& [name, t] : entries_) {
        (void)name;
        n += t.numel();
    }
    return n;
}

}  // namespace coformer
