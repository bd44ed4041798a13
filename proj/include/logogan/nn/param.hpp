#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "logogan/core/rng.hpp"
#include "logogan/core/tensor.hpp"

namespace logogan {

// Learned tensor with its gradient accumulator.
struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;

    void init(std::string n, std::vector<int> s) {
        name = std::move(n);
        shape = std::move(s);
        value.assign(Tensor::count(shape), 0.0);
        grad.assign(value.size(), 0.0);
    }

    void fill_normal(std::uint64_t seed) {
        Rng rng(mix_seed(seed, std::hash<std::string>{}(name)));
        for (auto& v : value) v = rng.normal();
    }

    void fill(double x) { std::fill(value.begin(), value.end(), x); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
    std::size_t size() const { return value.size(); }
};

// Flat view over every parameter of a model, used by the optimizer and the
// checkpoint writer. Names must be unique.
using ParamList = std::vector<Param*>;

} // namespace logogan
