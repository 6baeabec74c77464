#include "numerics/params.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "numerics/ops.hpp"

namespace dgp {

Tensor& ParamSet::add(std::string name, Tensor t) {
    if (contains(name)) fail(ErrorCode::InvalidArgument, "duplicate parameter name '" + name + "'");
    entries_.emplace_back(std::move(name), std::move(t));
    return entries_.back().second;
}

bool ParamSet::contains(const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == name; });
}

const Tensor& ParamSet::get(const std::string& name) const {
    for (const auto& [n, t] : entries_) {
        if (n == name) return t;
    }
    fail(ErrorCode::MissingTensor, "missing tensor '" + name + "'");
}

Tensor& ParamSet::get(const std::string& name) {
    return const_cast<Tensor&>(static_cast<const ParamSet&>(*this).get(name));
}

void ParamSet::zero_grad() {
    for (auto& [_, t] : entries_) t.zero_grad();
}

std::vector<float> ParamSet::snapshot() const {
    std::vector<float> out;
    for (const auto& [_, t] : entries_) out.insert(out.end(), t.data().begin(), t.data().end());
    return out;
}

Conv2d::Conv2d(ParamSet& params, const std::string& name, int in_channels, int out_channels, int kernel, int stride_,
               int pad_, Rng& rng)
    : stride(stride_), pad(pad_) {
    const float bound = 1.0f / std::sqrt(static_cast<float>(in_channels * kernel * kernel));
    std::vector<float> w(static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel);
    for (auto& v : w) v = static_cast<float>(rng.uniform(-bound, bound));
    std::vector<float> b(out_channels);
    for (auto& v : b) v = static_cast<float>(rng.uniform(-bound, bound));
    weight = params.add(name + ".weight", Tensor({out_channels, in_channels, kernel, kernel}, std::move(w), true));
    bias = params.add(name + ".bias", Tensor({out_channels}, std::move(b), true));
}

Tensor Conv2d::operator()(const Tensor& x) const { return conv2d(x, weight, bias, stride, pad); }

}  // namespace dgp
