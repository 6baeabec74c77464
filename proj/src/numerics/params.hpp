#pragma once

#include <string>
#include <utility>
#include <vector>

#include "numerics/rng.hpp"
#include "numerics/tensor.hpp"

namespace dgp {

// Ordered collection of named trainable tensors. Order is insertion order and
// is what checkpoints and the optimizer iterate over.
class ParamSet {
public:
    Tensor& add(std::string name, Tensor t);
    const Tensor& get(const std::string& name) const;
    Tensor& get(const std::string& name);
    bool contains(const std::string& name) const;

    std::size_t size() const { return entries_.size(); }
    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    void zero_grad();
    // Concatenated parameter bytes; used to compare parameter states exactly.
    std::vector<float> snapshot() const;

private:
    std::vector<std::pair<std::string, Tensor>> entries_;
};

// k x k convolution with bias, registered into a ParamSet under `name`.weight
// and `name`.bias.
struct Conv2d {
    Tensor weight;
    Tensor bias;
    int stride = 1;
    int pad = 0;

    Conv2d() = default;
    Conv2d(ParamSet& params, const std::string& name, int in_channels, int out_channels, int kernel, int stride,
           int pad, Rng& rng);

    Tensor operator()(const Tensor& x) const;
};

}  // namespace dgp
