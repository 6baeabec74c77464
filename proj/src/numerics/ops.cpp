#include "numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace dgp {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        fail(ErrorCode::Shape, std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
}

// Elementwise unary op whose derivative is expressed from (input, output).
template <typename F, typename D>
Tensor unary(const Tensor& a, F f, D df) {
    const auto in = a.data();
    std::vector<float> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
    return make_result(a.shape(), std::move(out), {a}, [df](detail::Node& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * df(p.data[i], self.data[i]);
    });
}

struct ChannelLayout {
    std::size_t outer;  // product of dims before the channel axis
    int channels;
    std::size_t inner;  // H*W
};

ChannelLayout channel_layout(const Tensor& t, const char* op) {
    if (t.rank() != 3 && t.rank() != 4) {
        fail(ErrorCode::Shape, std::string(op) + ": expected [C,H,W] or [N,C,H,W], got " + shape_str(t.shape()));
    }
    const auto& s = t.shape();
    const std::size_t c_axis = s.size() - 3;
    return {c_axis == 1 ? static_cast<std::size_t>(s[0]) : 1, s[c_axis],
            static_cast<std::size_t>(s[c_axis + 1]) * s[c_axis + 2]};
}

void require_4d(const Tensor& t, const char* op) {
    if (t.rank() != 4) fail(ErrorCode::Shape, std::string(op) + ": expected [N,C,H,W], got " + shape_str(t.shape()));
}

// cols: [C*k*k, Ho*Wo] for one sample.
void im2col(const float* x, int c, int h, int w, int k, int stride, int pad, int ho, int wo, float* cols) {
    for (int ci = 0; ci < c; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                float* row = cols + (static_cast<std::size_t>(ci * k + ky) * k + kx) * ho * wo;
                for (int oy = 0; oy < ho; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    for (int ox = 0; ox < wo; ++ox) {
                        const int ix = ox * stride - pad + kx;
                        const bool inside = iy >= 0 && iy < h && ix >= 0 && ix < w;
                        row[oy * wo + ox] = inside ? x[(static_cast<std::size_t>(ci) * h + iy) * w + ix] : 0.0f;
                    }
                }
            }
        }
    }
}

void col2im_add(const float* cols, int c, int h, int w, int k, int stride, int pad, int ho, int wo, float* x) {
    for (int ci = 0; ci < c; ++ci) {
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const float* row = cols + (static_cast<std::size_t>(ci * k + ky) * k + kx) * ho * wo;
                for (int oy = 0; oy < ho; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int ox = 0; ox < wo; ++ox) {
                        const int ix = ox * stride - pad + kx;
                        if (ix < 0 || ix >= w) continue;
                        x[(static_cast<std::size_t>(ci) * h + iy) * w + ix] += row[oy * wo + ox];
                    }
                }
            }
        }
    }
}

}  // namespace

Tensor randn(Rng& rng, const Shape& shape) {
    if (shape.empty() || std::any_of(shape.begin(), shape.end(), [](int d) { return d < 1; })) {
        fail(ErrorCode::Shape, "empty shape");
    }
    std::vector<float> values(shape_numel(shape));
    rng.fill_normal(values.data(), values.size());
    return Tensor(shape, std::move(values));
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<float> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        for (auto& p : self.parents) {
            if (!p->requires_grad) continue;
            auto& g = p->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<float> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        for (std::size_t k = 0; k < 2; ++k) {
            auto& p = *self.parents[k];
            if (!p.requires_grad) continue;
            const float sign = k == 0 ? 1.0f : -1.0f;
            auto& g = p.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<float> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
            auto& g = pa.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.data[i];
        }
        if (pb.requires_grad) {
            auto& g = pb.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.data[i];
        }
    });
}

Tensor scale(const Tensor& a, float s) {
    return unary(a, [s](float x) { return s * x; }, [s](float, float) { return s; });
}

Tensor tanh(const Tensor& a) {
    return unary(a, [](float x) { return std::tanh(x); }, [](float, float y) { return 1.0f - y * y; });
}

Tensor sigmoid(const Tensor& a) {
    return unary(
        a, [](float x) { return 1.0f / (1.0f + std::exp(-x)); }, [](float, float y) { return y * (1.0f - y); });
}

Tensor leaky_relu(const Tensor& a, float slope) {
    return unary(
        a, [slope](float x) { return x >= 0.0f ? x : slope * x; },
        [slope](float x, float) { return x >= 0.0f ? 1.0f : slope; });
}

Tensor abs(const Tensor& a) {
    return unary(
        a, [](float x) { return std::fabs(x); },
        [](float x, float) { return x > 0.0f ? 1.0f : (x < 0.0f ? -1.0f : 0.0f); });
}

Tensor softplus(const Tensor& a) {
    return unary(
        a, [](float x) { return std::max(x, 0.0f) + std::log1p(std::exp(-std::fabs(x))); },
        [](float x, float) { return 1.0f / (1.0f + std::exp(-x)); });
}

Tensor mean(const Tensor& a) {
    double acc = 0.0;
    for (float v : a.data()) acc += v;
    const auto n = static_cast<float>(a.numel());
    return make_result({1}, {static_cast<float>(acc / n)}, {a}, [n](detail::Node& self) {
        auto& p = *self.parents[0];
        auto& g = p.ensure_grad();
        const float d = self.grad[0] / n;
        for (auto& v : g) v += d;
    });
}

Tensor sum_squares(const Tensor& a) {
    double acc = 0.0;
    for (float v : a.data()) acc += static_cast<double>(v) * v;
    return make_result({1}, {static_cast<float>(acc)}, {a}, [](detail::Node& self) {
        auto& p = *self.parents[0];
        auto& g = p.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0f * p.data[i] * self.grad[0];
    });
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    const auto la = channel_layout(a, "concat_channels");
    const auto lb = channel_layout(b, "concat_channels");
    if (a.rank() != b.rank()) fail(ErrorCode::Shape, "concat_channels: rank mismatch");
    for (std::size_t i = 0; i < a.rank(); ++i) {
        if (i == a.rank() - 3) continue;
        if (a.dim(i) != b.dim(i)) {
            fail(ErrorCode::Shape, "concat_channels: dimension " + std::to_string(i) + " differs (" +
                                       shape_str(a.shape()) + " vs " + shape_str(b.shape()) + ")");
        }
    }
    Shape shape = a.shape();
    shape[a.rank() - 3] = la.channels + lb.channels;
    const std::size_t ca = la.channels * la.inner, cb = lb.channels * lb.inner;
    std::vector<float> out(la.outer * (ca + cb));
    for (std::size_t n = 0; n < la.outer; ++n) {
        std::copy_n(a.data().begin() + n * ca, ca, out.begin() + n * (ca + cb));
        std::copy_n(b.data().begin() + n * cb, cb, out.begin() + n * (ca + cb) + ca);
    }
    return make_result(std::move(shape), std::move(out), {a, b}, [outer = la.outer, ca, cb](detail::Node& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        for (std::size_t n = 0; n < outer; ++n) {
            const float* src = self.grad.data() + n * (ca + cb);
            if (pa.requires_grad) {
                auto& g = pa.ensure_grad();
                for (std::size_t i = 0; i < ca; ++i) g[n * ca + i] += src[i];
            }
            if (pb.requires_grad) {
                auto& g = pb.ensure_grad();
                for (std::size_t i = 0; i < cb; ++i) g[n * cb + i] += src[ca + i];
            }
        }
    });
}

Tensor slice_channels(const Tensor& a, int begin, int count) {
    const auto l = channel_layout(a, "slice_channels");
    if (begin < 0 || count < 1 || begin + count > l.channels) {
        fail(ErrorCode::Shape, "slice_channels: range [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                                   ") outside " + std::to_string(l.channels) + " channels");
    }
    Shape shape = a.shape();
    shape[a.rank() - 3] = count;
    const std::size_t src_stride = l.channels * l.inner, dst_stride = count * l.inner, offset = begin * l.inner;
    std::vector<float> out(l.outer * dst_stride);
    for (std::size_t n = 0; n < l.outer; ++n) {
        std::copy_n(a.data().begin() + n * src_stride + offset, dst_stride, out.begin() + n * dst_stride);
    }
    return make_result(std::move(shape), std::move(out), {a},
                       [outer = l.outer, src_stride, dst_stride, offset](detail::Node& self) {
                           auto& g = self.parents[0]->ensure_grad();
                           for (std::size_t n = 0; n < outer; ++n) {
                               for (std::size_t i = 0; i < dst_stride; ++i) {
                                   g[n * src_stride + offset + i] += self.grad[n * dst_stride + i];
                               }
                           }
                       });
}

Tensor broadcast_channels(const Tensor& a, int channels) {
    const auto l = channel_layout(a, "broadcast_channels");
    if (l.channels != 1) fail(ErrorCode::Shape, "broadcast_channels: input must have one channel, got " + shape_str(a.shape()));
    if (channels < 1) fail(ErrorCode::Shape, "broadcast_channels: channel count must be positive");
    Shape shape = a.shape();
    shape[a.rank() - 3] = channels;
    std::vector<float> out(l.outer * channels * l.inner);
    for (std::size_t n = 0; n < l.outer; ++n) {
        for (int c = 0; c < channels; ++c) {
            std::copy_n(a.data().begin() + n * l.inner, l.inner, out.begin() + (n * channels + c) * l.inner);
        }
    }
    return make_result(std::move(shape), std::move(out), {a}, [l, channels](detail::Node& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t n = 0; n < l.outer; ++n) {
            for (int c = 0; c < channels; ++c) {
                const float* src = self.grad.data() + (n * channels + c) * l.inner;
                for (std::size_t i = 0; i < l.inner; ++i) g[n * l.inner + i] += src[i];
            }
        }
    });
}

Tensor upsample_nearest(const Tensor& x, int factor) {
    require_4d(x, "upsample_nearest");
    if (factor < 1) fail(ErrorCode::InvalidArgument, "upsample_nearest: factor must be >= 1");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int ho = h * factor, wo = w * factor;
    std::vector<float> out(static_cast<std::size_t>(n) * c * ho * wo);
    const auto in = x.data();
    for (std::size_t plane = 0; plane < static_cast<std::size_t>(n) * c; ++plane) {
        for (int y = 0; y < ho; ++y) {
            for (int xx = 0; xx < wo; ++xx) {
                out[(plane * ho + y) * wo + xx] = in[(plane * h + y / factor) * w + xx / factor];
            }
        }
    }
    return make_result({n, c, ho, wo}, std::move(out), {x}, [n, c, h, w, factor](detail::Node& self) {
        auto& g = self.parents[0]->ensure_grad();
        const int ho = h * factor, wo = w * factor;
        for (std::size_t plane = 0; plane < static_cast<std::size_t>(n) * c; ++plane) {
            for (int y = 0; y < ho; ++y) {
                for (int xx = 0; xx < wo; ++xx) {
                    g[(plane * h + y / factor) * w + xx / factor] += self.grad[(plane * ho + y) * wo + xx];
                }
            }
        }
    });
}

Tensor spatial_mean(const Tensor& x) {
    require_4d(x, "spatial_mean");
    const int n = x.dim(0), c = x.dim(1);
    const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
    std::vector<float> out(static_cast<std::size_t>(n) * c);
    for (std::size_t plane = 0; plane < out.size(); ++plane) {
        double acc = 0.0;
        for (std::size_t i = 0; i < hw; ++i) acc += x.data()[plane * hw + i];
        out[plane] = static_cast<float>(acc / static_cast<double>(hw));
    }
    return make_result({n, c, 1, 1}, std::move(out), {x}, [hw](detail::Node& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t plane = 0; plane < self.grad.size(); ++plane) {
            const float d = self.grad[plane] / static_cast<float>(hw);
            for (std::size_t i = 0; i < hw; ++i) g[plane * hw + i] += d;
        }
    });
}

Tensor add_spatial(const Tensor& x, const Tensor& v) {
    require_4d(x, "add_spatial");
    const int n = x.dim(0), c = x.dim(1);
    if (v.shape() != Shape{n, c, 1, 1}) {
        fail(ErrorCode::Shape, "add_spatial: expected [" + std::to_string(n) + "," + std::to_string(c) + ",1,1], got " +
                                   shape_str(v.shape()));
    }
    const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
    std::vector<float> out(x.data().begin(), x.data().end());
    for (std::size_t plane = 0; plane < v.numel(); ++plane) {
        const float add = v.data()[plane];
        for (std::size_t i = 0; i < hw; ++i) out[plane * hw + i] += add;
    }
    return make_result(x.shape(), std::move(out), {x, v}, [hw](detail::Node& self) {
        if (self.parents[0]->requires_grad) {
            auto& gx = self.parents[0]->ensure_grad();
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
        }
        if (self.parents[1]->requires_grad) {
            auto& gv = self.parents[1]->ensure_grad();
            for (std::size_t plane = 0; plane < gv.size(); ++plane) {
                double acc = 0.0;
                for (std::size_t i = 0; i < hw; ++i) acc += self.grad[plane * hw + i];
                gv[plane] += static_cast<float>(acc);
            }
        }
    });
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
    require_4d(x, "conv2d input");
    if (w.rank() != 4) fail(ErrorCode::Shape, "conv2d: weight must be [C_out,C_in,k,k], got " + shape_str(w.shape()));
    if (stride < 1) fail(ErrorCode::InvalidArgument, "conv2d: stride must be >= 1");
    if (pad < 0) fail(ErrorCode::InvalidArgument, "conv2d: pad must be >= 0");
    const int n = x.dim(0), cin = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const int cout = w.dim(0), k = w.dim(2);
    if (w.dim(1) != cin) {
        fail(ErrorCode::Shape, "conv2d: C_in mismatch (input has " + std::to_string(cin) + " channels, weight expects " +
                                   std::to_string(w.dim(1)) + ")");
    }
    if (w.dim(3) != k) fail(ErrorCode::Shape, "conv2d: kernel must be square, got " + shape_str(w.shape()));
    if (b.rank() != 1 || b.dim(0) != cout) {
        fail(ErrorCode::Shape, "conv2d: bias must be [" + std::to_string(cout) + "], got " + shape_str(b.shape()));
    }
    if (h + 2 * pad < k) fail(ErrorCode::Shape, "conv2d: kernel height " + std::to_string(k) + " exceeds padded input H");
    if (wd + 2 * pad < k) fail(ErrorCode::Shape, "conv2d: kernel width " + std::to_string(k) + " exceeds padded input W");
    const int ho = (h + 2 * pad - k) / stride + 1;
    const int wo = (wd + 2 * pad - k) / stride + 1;
    const int depth = cin * k * k;
    const int cols_n = ho * wo;

    std::vector<float> out(static_cast<std::size_t>(n) * cout * cols_n);
    std::vector<float> cols(static_cast<std::size_t>(depth) * cols_n);
    ConstMapMat wm(w.data().data(), cout, depth);
    for (int s = 0; s < n; ++s) {
        im2col(x.data().data() + static_cast<std::size_t>(s) * cin * h * wd, cin, h, wd, k, stride, pad, ho, wo,
               cols.data());
        MapMat ym(out.data() + static_cast<std::size_t>(s) * cout * cols_n, cout, cols_n);
        ym.noalias() = wm * ConstMapMat(cols.data(), depth, cols_n);
        for (int co = 0; co < cout; ++co) ym.row(co).array() += b.data()[co];
    }

    return make_result(
        {n, cout, ho, wo}, std::move(out), {x, w, b},
        [n, cin, h, wd, cout, k, stride, pad, ho, wo, depth, cols_n](detail::Node& self) {
            auto& px = *self.parents[0];
            auto& pw = *self.parents[1];
            auto& pb = *self.parents[2];
            std::vector<float> cols(static_cast<std::size_t>(depth) * cols_n);
            std::vector<float> dcols(px.requires_grad ? cols.size() : 0);
            ConstMapMat wm(pw.data.data(), cout, depth);
            float* gw = pw.requires_grad ? pw.ensure_grad().data() : nullptr;
            float* gb = pb.requires_grad ? pb.ensure_grad().data() : nullptr;
            float* gx = px.requires_grad ? px.ensure_grad().data() : nullptr;
            for (int s = 0; s < n; ++s) {
                ConstMapMat gy(self.grad.data() + static_cast<std::size_t>(s) * cout * cols_n, cout, cols_n);
                if (gw) {
                    im2col(px.data.data() + static_cast<std::size_t>(s) * cin * h * wd, cin, h, wd, k, stride, pad, ho,
                           wo, cols.data());
                    MapMat(gw, cout, depth).noalias() += gy * ConstMapMat(cols.data(), depth, cols_n).transpose();
                }
                if (gb) {
                    // Plain loop: a vectorized redux would peel by pointer
                    // alignment and change the summation order between runs.
                    for (int co = 0; co < cout; ++co) {
                        const float* row = self.grad.data() + (static_cast<std::size_t>(s) * cout + co) * cols_n;
                        float acc = 0.0f;
                        for (int i = 0; i < cols_n; ++i) acc += row[i];
                        gb[co] += acc;
                    }
                }
                if (gx) {
                    MapMat(dcols.data(), depth, cols_n).noalias() = wm.transpose() * gy;
                    col2im_add(dcols.data(), cin, h, wd, k, stride, pad, ho, wo,
                               gx + static_cast<std::size_t>(s) * cin * h * wd);
                }
            }
        });
}

}  // namespace dgp
