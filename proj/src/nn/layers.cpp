#include "bsrdiff/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace bsrdiff::nn {

void init_fan_in_uniform(Tensor& t, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    float* p = t.data();
    for (std::int64_t i = 0, n = t.numel(); i < n; ++i)
        p[i] = static_cast<float>(rng.uniform(-bound, bound));
}

// ---------------------------------------------------------------------------

Conv2d::Conv2d(const std::string& name, int in_ch, int out_ch, int k, int stride, int pad,
               bool bias)
    : in_ch_(in_ch), out_ch_(out_ch), k_(k), stride_(stride), pad_(pad), has_bias_(bias) {
    w.setup(name + ".w", {out_ch, in_ch, k, k});
    if (has_bias_) b.setup(name + ".b", {out_ch, 1, 1, 1});
}

void Conv2d::init(Rng& rng) {
    init_fan_in_uniform(w.value, in_ch_ * k_ * k_, rng);
    if (has_bias_) b.value.zero();
}

void Conv2d::init_zero() {
    w.value.zero();
    if (has_bias_) b.value.zero();
}

Tensor Conv2d::forward(const Tensor& x, Ctx* ctx) const {
    if (ctx) ctx->x = x;
    return conv2d_forward(x, w.value, has_bias_ ? b.value.data() : nullptr, stride_, pad_);
}

Tensor Conv2d::backward(const Tensor& gy, const Ctx& ctx) {
    conv2d_backward_weight(ctx.x, gy, stride_, pad_, w.grad);
    if (has_bias_) channel_bias_grad(gy, b.grad.data());
    return conv2d_backward_input(gy, w.value, ctx.x.shape(), stride_, pad_);
}

void Conv2d::collect_params(std::vector<Parameter*>& out) {
    out.push_back(&w);
    if (has_bias_) out.push_back(&b);
}

// ---------------------------------------------------------------------------

ConvTranspose2d::ConvTranspose2d(const std::string& name, int in_ch, int out_ch, int k,
                                 int stride, int pad, bool bias)
    : in_ch_(in_ch), out_ch_(out_ch), k_(k), stride_(stride), pad_(pad), has_bias_(bias) {
    w.setup(name + ".w", {in_ch, out_ch, k, k});
    if (has_bias_) b.setup(name + ".b", {out_ch, 1, 1, 1});
}

void ConvTranspose2d::init(Rng& rng) {
    init_fan_in_uniform(w.value, in_ch_ * k_ * k_, rng);
    if (has_bias_) b.value.zero();
}

Tensor ConvTranspose2d::forward(const Tensor& x, Ctx* ctx) const {
    if (x.c() != in_ch_)
        throw std::invalid_argument("ConvTranspose2d: channel mismatch");
    if (ctx) ctx->x = x;
    const int oh = (x.h() - 1) * stride_ - 2 * pad_ + k_;
    const int ow = (x.w() - 1) * stride_ - 2 * pad_ + k_;
    // scatter form == conv backward-input with swapped channel roles
    Tensor y(x.n(), out_ch_, oh, ow);
    for (int n = 0; n < x.n(); ++n)
        conv2d_bwd_input_1(x.sample(n), in_ch_, x.h(), x.w(), w.value.data(), out_ch_, k_,
                           stride_, pad_, y.sample(n), oh, ow);
    if (has_bias_) add_channel_bias(y, b.value.data());
    return y;
}

Tensor ConvTranspose2d::backward(const Tensor& gy, const Ctx& ctx) {
    // gw[i][o] correlates the input (as conv "gy") with gy (as conv "x")
    for (int n = 0; n < gy.n(); ++n)
        conv2d_bwd_weight_1(gy.sample(n), out_ch_, gy.h(), gy.w(), ctx.x.sample(n), in_ch_,
                            ctx.x.h(), ctx.x.w(), k_, stride_, pad_, w.grad.data());
    if (has_bias_) channel_bias_grad(gy, b.grad.data());
    // gx = plain convolution of gy with the stored weights
    Tensor gx(ctx.x.shape());
    for (int n = 0; n < gy.n(); ++n)
        conv2d_forward_1(gy.sample(n), out_ch_, gy.h(), gy.w(), w.value.data(), in_ch_, k_,
                         stride_, pad_, gx.sample(n), ctx.x.h(), ctx.x.w());
    return gx;
}

void ConvTranspose2d::collect_params(std::vector<Parameter*>& out) {
    out.push_back(&w);
    if (has_bias_) out.push_back(&b);
}

// ---------------------------------------------------------------------------

Linear::Linear(const std::string& name, int in_features, int out_features, bool bias)
    : in_(in_features), out_(out_features), has_bias_(bias) {
    w.setup(name + ".w", {out_features, in_features, 1, 1});
    if (has_bias_) b.setup(name + ".b", {out_features, 1, 1, 1});
}

void Linear::init(Rng& rng) {
    init_fan_in_uniform(w.value, in_, rng);
    if (has_bias_) b.value.zero();
}

void Linear::init_zero() {
    w.value.zero();
    if (has_bias_) b.value.zero();
}

Tensor Linear::forward(const Tensor& x, Ctx* ctx) const {
    if (x.c() != in_ || x.h() != 1 || x.w() != 1)
        throw std::invalid_argument("Linear: expected (n, " + std::to_string(in_) +
                                    ", 1, 1), got " + x.shape().str());
    if (ctx) ctx->x = x;
    Tensor y(x.n(), out_, 1, 1);
    const float* wp = w.value.data();
    for (int n = 0; n < x.n(); ++n) {
        const float* xp = x.sample(n);
        float* yp = y.sample(n);
        for (int o = 0; o < out_; ++o) {
            float acc = has_bias_ ? b.value.data()[o] : 0.0f;
            const float* wrow = wp + static_cast<size_t>(o) * in_;
            for (int i = 0; i < in_; ++i) acc += wrow[i] * xp[i];
            yp[o] = acc;
        }
    }
    return y;
}

Tensor Linear::backward(const Tensor& gy, const Ctx& ctx) {
    Tensor gx(ctx.x.shape());
    const float* wp = w.value.data();
    float* gwp = w.grad.data();
    for (int n = 0; n < gy.n(); ++n) {
        const float* gp = gy.sample(n);
        const float* xp = ctx.x.sample(n);
        float* gxp = gx.sample(n);
        for (int o = 0; o < out_; ++o) {
            const float g = gp[o];
            if (has_bias_) b.grad.data()[o] += g;
            const float* wrow = wp + static_cast<size_t>(o) * in_;
            float* gwrow = gwp + static_cast<size_t>(o) * in_;
            for (int i = 0; i < in_; ++i) {
                gwrow[i] += g * xp[i];
                gxp[i] += g * wrow[i];
            }
        }
    }
    return gx;
}

void Linear::collect_params(std::vector<Parameter*>& out) {
    out.push_back(&w);
    if (has_bias_) out.push_back(&b);
}

}  // namespace bsrdiff::nn
