#include "bsrdiff/nn/ops.hpp"

#include <cmath>
#include <stdexcept>

namespace bsrdiff::nn {

namespace {

// first index idx >= 0 with idx*stride + off >= 0
inline int lo_index(int off, int stride) {
    if (off >= 0) return 0;
    return (-off + stride - 1) / stride;
}

// last index idx <= limit with idx*stride + off <= bound-1
inline int hi_index(int off, int stride, int bound, int limit) {
    const int v = (bound - 1 - off) / stride;
    return v < limit ? v : limit;
}

}  // namespace

void conv2d_forward_1(const float* x, int ci, int h, int w, const float* wgt, int co, int k,
                      int stride, int pad, float* y, int oh, int ow) {
    for (int oc = 0; oc < co; ++oc) {
        float* yplane = y + static_cast<size_t>(oc) * oh * ow;
        for (int i = 0; i < oh * ow; ++i) yplane[i] = 0.0f;
        for (int ic = 0; ic < ci; ++ic) {
            const float* xplane = x + static_cast<size_t>(ic) * h * w;
            const float* wbase = wgt + (static_cast<size_t>(oc) * ci + ic) * k * k;
            for (int kh = 0; kh < k; ++kh) {
                const int hoff = kh - pad;
                const int ho_lo = lo_index(hoff, stride);
                const int ho_hi = hi_index(hoff, stride, h, oh - 1);
                for (int kw = 0; kw < k; ++kw) {
                    const float wv = wbase[kh * k + kw];
                    if (wv == 0.0f) continue;
                    const int woff = kw - pad;
                    const int wo_lo = lo_index(woff, stride);
                    const int wo_hi = hi_index(woff, stride, w, ow - 1);
                    for (int ho = ho_lo; ho <= ho_hi; ++ho) {
                        const float* xrow =
                            xplane + static_cast<size_t>(ho * stride + hoff) * w + woff;
                        float* yrow = yplane + static_cast<size_t>(ho) * ow;
                        if (stride == 1) {
                            for (int wo = wo_lo; wo <= wo_hi; ++wo)
                                yrow[wo] += wv * xrow[wo];
                        } else {
                            for (int wo = wo_lo; wo <= wo_hi; ++wo)
                                yrow[wo] += wv * xrow[static_cast<size_t>(wo) * stride];
                        }
                    }
                }
            }
        }
    }
}

void conv2d_bwd_input_1(const float* gy, int co, int oh, int ow, const float* wgt, int ci,
                        int k, int stride, int pad, float* gx, int h, int w) {
    for (int ic = 0; ic < ci; ++ic) {
        float* gxplane = gx + static_cast<size_t>(ic) * h * w;
        for (int oc = 0; oc < co; ++oc) {
            const float* gyplane = gy + static_cast<size_t>(oc) * oh * ow;
            const float* wbase = wgt + (static_cast<size_t>(oc) * ci + ic) * k * k;
            for (int kh = 0; kh < k; ++kh) {
                const int hoff = kh - pad;
                const int ho_lo = lo_index(hoff, stride);
                const int ho_hi = hi_index(hoff, stride, h, oh - 1);
                for (int kw = 0; kw < k; ++kw) {
                    const float wv = wbase[kh * k + kw];
                    if (wv == 0.0f) continue;
                    const int woff = kw - pad;
                    const int wo_lo = lo_index(woff, stride);
                    const int wo_hi = hi_index(woff, stride, w, ow - 1);
                    for (int ho = ho_lo; ho <= ho_hi; ++ho) {
                        float* gxrow =
                            gxplane + static_cast<size_t>(ho * stride + hoff) * w + woff;
                        const float* gyrow = gyplane + static_cast<size_t>(ho) * ow;
                        if (stride == 1) {
                            for (int wo = wo_lo; wo <= wo_hi; ++wo)
                                gxrow[wo] += wv * gyrow[wo];
                        } else {
                            for (int wo = wo_lo; wo <= wo_hi; ++wo)
                                gxrow[static_cast<size_t>(wo) * stride] += wv * gyrow[wo];
                        }
                    }
                }
            }
        }
    }
}

void conv2d_bwd_weight_1(const float* x, int ci, int h, int w, const float* gy, int co,
                         int oh, int ow, int k, int stride, int pad, float* gw) {
    for (int oc = 0; oc < co; ++oc) {
        const float* gyplane = gy + static_cast<size_t>(oc) * oh * ow;
        for (int ic = 0; ic < ci; ++ic) {
            const float* xplane = x + static_cast<size_t>(ic) * h * w;
            float* gwbase = gw + (static_cast<size_t>(oc) * ci + ic) * k * k;
            for (int kh = 0; kh < k; ++kh) {
                const int hoff = kh - pad;
                const int ho_lo = lo_index(hoff, stride);
                const int ho_hi = hi_index(hoff, stride, h, oh - 1);
                for (int kw = 0; kw < k; ++kw) {
                    const int woff = kw - pad;
                    const int wo_lo = lo_index(woff, stride);
                    const int wo_hi = hi_index(woff, stride, w, ow - 1);
                    float acc = 0.0f;
                    for (int ho = ho_lo; ho <= ho_hi; ++ho) {
                        const float* xrow =
                            xplane + static_cast<size_t>(ho * stride + hoff) * w + woff;
                        const float* gyrow = gyplane + static_cast<size_t>(ho) * ow;
                        if (stride == 1) {
                            for (int wo = wo_lo; wo <= wo_hi; ++wo)
                                acc += xrow[wo] * gyrow[wo];
                        } else {
                            for (int wo = wo_lo; wo <= wo_hi; ++wo)
                                acc += xrow[static_cast<size_t>(wo) * stride] * gyrow[wo];
                        }
                    }
                    gwbase[kh * k + kw] += acc;
                }
            }
        }
    }
}

Tensor conv2d_forward(const Tensor& x, const Tensor& wgt, const float* bias, int stride,
                      int pad) {
    if (wgt.c() != x.c())
        throw std::invalid_argument("conv2d: weight in_ch " + std::to_string(wgt.c()) +
                                    " vs input " + std::to_string(x.c()));
    if (wgt.h() != wgt.w()) throw std::invalid_argument("conv2d: non-square kernel");
    const int k = wgt.h();
    const int oh = conv_out_size(x.h(), k, stride, pad);
    const int ow = conv_out_size(x.w(), k, stride, pad);
    if (oh < 1 || ow < 1) throw std::invalid_argument("conv2d: empty output");
    Tensor y(x.n(), wgt.n(), oh, ow);
    for (int n = 0; n < x.n(); ++n)
        conv2d_forward_1(x.sample(n), x.c(), x.h(), x.w(), wgt.data(), wgt.n(), k, stride,
                         pad, y.sample(n), oh, ow);
    if (bias) add_channel_bias(y, bias);
    return y;
}

Tensor conv2d_backward_input(const Tensor& gy, const Tensor& wgt, Shape4 xshape, int stride,
                             int pad) {
    Tensor gx(xshape);
    const int k = wgt.h();
    for (int n = 0; n < gy.n(); ++n)
        conv2d_bwd_input_1(gy.sample(n), gy.c(), gy.h(), gy.w(), wgt.data(), xshape.c, k,
                           stride, pad, gx.sample(n), xshape.h, xshape.w);
    return gx;
}

void conv2d_backward_weight(const Tensor& x, const Tensor& gy, int stride, int pad,
                            Tensor& gw_accum) {
    const int k = gw_accum.h();
    for (int n = 0; n < x.n(); ++n)
        conv2d_bwd_weight_1(x.sample(n), x.c(), x.h(), x.w(), gy.sample(n), gy.c(), gy.h(),
                            gy.w(), k, stride, pad, gw_accum.data());
}

void add_channel_bias(Tensor& y, const float* bias) {
    const int hw = y.h() * y.w();
    for (int n = 0; n < y.n(); ++n)
        for (int c = 0; c < y.c(); ++c) {
            float* p = y.plane(n, c);
            const float b = bias[c];
            for (int i = 0; i < hw; ++i) p[i] += b;
        }
}

void channel_bias_grad(const Tensor& gy, float* gbias_accum) {
    const int hw = gy.h() * gy.w();
    for (int n = 0; n < gy.n(); ++n)
        for (int c = 0; c < gy.c(); ++c) {
            const float* p = gy.plane(n, c);
            float acc = 0.0f;
            for (int i = 0; i < hw; ++i) acc += p[i];
            gbias_accum[c] += acc;
        }
}

// ---------------------------------------------------------------------------

float mish_scalar(float x) {
    const float sp = x > 20.0f ? x : std::log1p(std::exp(x));
    return x * std::tanh(sp);
}

Tensor mish_forward(const Tensor& x) {
    Tensor y(x.shape());
    const float* xp = x.data();
    float* yp = y.data();
    for (std::int64_t i = 0, n = x.numel(); i < n; ++i) yp[i] = mish_scalar(xp[i]);
    return y;
}

Tensor mish_backward(const Tensor& x, const Tensor& gy) {
    check_same_shape(x, gy, "mish_backward");
    Tensor gx(x.shape());
    const float* xp = x.data();
    const float* gp = gy.data();
    float* op = gx.data();
    for (std::int64_t i = 0, n = x.numel(); i < n; ++i) {
        const float v = xp[i];
        const float sp = v > 20.0f ? v : std::log1p(std::exp(v));
        const float t = std::tanh(sp);
        const float sig = 1.0f / (1.0f + std::exp(-v));
        op[i] = gp[i] * (t + v * (1.0f - t * t) * sig);
    }
    return gx;
}

Tensor leaky_relu_forward(const Tensor& x, float slope) {
    Tensor y(x.shape());
    const float* xp = x.data();
    float* yp = y.data();
    for (std::int64_t i = 0, n = x.numel(); i < n; ++i)
        yp[i] = xp[i] >= 0.0f ? xp[i] : slope * xp[i];
    return y;
}

Tensor leaky_relu_backward(const Tensor& x, float slope, const Tensor& gy) {
    check_same_shape(x, gy, "leaky_relu_backward");
    Tensor gx(x.shape());
    const float* xp = x.data();
    const float* gp = gy.data();
    float* op = gx.data();
    for (std::int64_t i = 0, n = x.numel(); i < n; ++i)
        op[i] = xp[i] >= 0.0f ? gp[i] : slope * gp[i];
    return gx;
}

// ---------------------------------------------------------------------------

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
        throw std::invalid_argument("concat_channels: incompatible shapes " +
                                    a.shape().str() + " vs " + b.shape().str());
    Tensor out(a.n(), a.c() + b.c(), a.h(), a.w());
    const size_t plane = static_cast<size_t>(a.h()) * a.w();
    for (int n = 0; n < a.n(); ++n) {
        float* dst = out.sample(n);
        std::copy_n(a.sample(n), plane * a.c(), dst);
        std::copy_n(b.sample(n), plane * b.c(), dst + plane * a.c());
    }
    return out;
}

void split_channels(const Tensor& g, Tensor& ga, Tensor& gb) {
    if (g.c() != ga.c() + gb.c() || g.n() != ga.n() || g.h() != ga.h() || g.w() != ga.w())
        throw std::invalid_argument("split_channels: incompatible shapes");
    const size_t plane = static_cast<size_t>(g.h()) * g.w();
    for (int n = 0; n < g.n(); ++n) {
        const float* src = g.sample(n);
        std::copy_n(src, plane * ga.c(), ga.sample(n));
        std::copy_n(src + plane * ga.c(), plane * gb.c(), gb.sample(n));
    }
}

Tensor pixel_shuffle(const Tensor& x, int s) {
    if (x.c() % (s * s) != 0)
        throw std::invalid_argument("pixel_shuffle: channels not divisible by s^2");
    const int oc = x.c() / (s * s);
    Tensor y(x.n(), oc, x.h() * s, x.w() * s);
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < oc; ++c)
            for (int dy = 0; dy < s; ++dy)
                for (int dx = 0; dx < s; ++dx) {
                    const float* src = x.plane(n, c * s * s + dy * s + dx);
                    float* dst = y.plane(n, c);
                    for (int h = 0; h < x.h(); ++h)
                        for (int w = 0; w < x.w(); ++w)
                            dst[static_cast<size_t>(h * s + dy) * y.w() + (w * s + dx)] =
                                src[static_cast<size_t>(h) * x.w() + w];
                }
    return y;
}

Tensor pixel_shuffle_backward(const Tensor& gy, int s) {
    if (gy.h() % s != 0 || gy.w() % s != 0)
        throw std::invalid_argument("pixel_shuffle_backward: size not divisible by s");
    Tensor gx(gy.n(), gy.c() * s * s, gy.h() / s, gy.w() / s);
    for (int n = 0; n < gy.n(); ++n)
        for (int c = 0; c < gy.c(); ++c)
            for (int dy = 0; dy < s; ++dy)
                for (int dx = 0; dx < s; ++dx) {
                    const float* src = gy.plane(n, c);
                    float* dst = gx.plane(n, c * s * s + dy * s + dx);
                    for (int h = 0; h < gx.h(); ++h)
                        for (int w = 0; w < gx.w(); ++w)
                            dst[static_cast<size_t>(h) * gx.w() + w] =
                                src[static_cast<size_t>(h * s + dy) * gy.w() + (w * s + dx)];
                }
    return gx;
}

Tensor bilinear_resize(const Tensor& x, int oh, int ow) {
    if (oh == x.h() && ow == x.w()) return x;
    Tensor y(x.n(), x.c(), oh, ow);
    const double sy = static_cast<double>(x.h()) / oh;
    const double sx = static_cast<double>(x.w()) / ow;
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < x.c(); ++c) {
            const float* src = x.plane(n, c);
            float* dst = y.plane(n, c);
            for (int j = 0; j < oh; ++j) {
                const double fy = (j + 0.5) * sy - 0.5;
                const int y0 = static_cast<int>(std::floor(fy));
                const double wy = fy - y0;
                const int ya = std::clamp(y0, 0, x.h() - 1);
                const int yb = std::clamp(y0 + 1, 0, x.h() - 1);
                for (int i = 0; i < ow; ++i) {
                    const double fx = (i + 0.5) * sx - 0.5;
                    const int x0 = static_cast<int>(std::floor(fx));
                    const double wx = fx - x0;
                    const int xa = std::clamp(x0, 0, x.w() - 1);
                    const int xb = std::clamp(x0 + 1, 0, x.w() - 1);
                    const double top = src[static_cast<size_t>(ya) * x.w() + xa] * (1 - wx) +
                                       src[static_cast<size_t>(ya) * x.w() + xb] * wx;
                    const double bot = src[static_cast<size_t>(yb) * x.w() + xa] * (1 - wx) +
                                       src[static_cast<size_t>(yb) * x.w() + xb] * wx;
                    dst[static_cast<size_t>(j) * ow + i] =
                        static_cast<float>(top * (1 - wy) + bot * wy);
                }
            }
        }
    return y;
}

}  // namespace bsrdiff::nn
