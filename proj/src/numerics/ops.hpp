#pragma once

#include "numerics/rng.hpp"
#include "numerics/tensor.hpp"

namespace dgp {

// i.i.d. standard normals; advances `rng`.
Tensor randn(Rng& rng, const Shape& shape);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float s);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor leaky_relu(const Tensor& a, float slope);
Tensor abs(const Tensor& a);
// log(1 + exp(a)), computed without overflow.
Tensor softplus(const Tensor& a);

// Scalar reductions, shape [1].
Tensor mean(const Tensor& a);
Tensor sum_squares(const Tensor& a);

// Channel axis is dimension rank-3, so both [C,H,W] and [N,C,H,W] work.
Tensor concat_channels(const Tensor& a, const Tensor& b);
Tensor slice_channels(const Tensor& a, int begin, int count);
// Replicates a one-channel tensor to `channels` channels.
Tensor broadcast_channels(const Tensor& a, int channels);

// [N,C,H,W] -> [N,C,H*f,W*f]
Tensor upsample_nearest(const Tensor& x, int factor);
// [N,C,H,W] -> [N,C,1,1]
Tensor spatial_mean(const Tensor& x);
// x: [N,C,H,W] plus v: [N,C,1,1] broadcast over each plane.
Tensor add_spatial(const Tensor& x, const Tensor& v);

// x: [N,C_in,H,W], w: [C_out,C_in,k,k], b: [C_out]. Cross-correlation.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);

}  // namespace dgp
