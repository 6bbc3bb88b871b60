#include "bsrdiff/nn/blocks.hpp"

#include <cmath>
#include <stdexcept>

namespace bsrdiff::nn {

std::vector<float> sinusoidal_embed(int t, int dim) {
    if (dim < 2 || dim % 2 != 0)
        throw std::invalid_argument("sinusoidal_embed: dim must be even and >= 2");
    if (t < 0) throw std::invalid_argument("sinusoidal_embed: t must be >= 0");
    const int half = dim / 2;
    std::vector<float> out(dim);
    for (int i = 0; i < half; ++i) {
        const double freq =
            half == 1 ? 1.0 : std::exp(-std::log(10000.0) * i / (half - 1));
        const double arg = t * freq;
        out[2 * i] = static_cast<float>(std::sin(arg));
        out[2 * i + 1] = static_cast<float>(std::cos(arg));
    }
    return out;
}

Tensor sinusoidal_embed_batch(const std::vector<int>& ts, int dim) {
    Tensor out(static_cast<int>(ts.size()), dim, 1, 1);
    for (size_t n = 0; n < ts.size(); ++n) {
        const std::vector<float> e = sinusoidal_embed(ts[n], dim);
        std::copy(e.begin(), e.end(), out.sample(static_cast<int>(n)));
    }
    return out;
}

void add_per_sample_bias(Tensor& y, const Tensor& bias) {
    if (bias.n() != y.n() || bias.c() != y.c() || bias.h() != 1 || bias.w() != 1)
        throw std::invalid_argument("add_per_sample_bias: bias shape " +
                                    bias.shape().str() + " vs " + y.shape().str());
    const int hw = y.h() * y.w();
    for (int n = 0; n < y.n(); ++n)
        for (int c = 0; c < y.c(); ++c) {
            float* p = y.plane(n, c);
            const float b = bias.at(n, c, 0, 0);
            for (int i = 0; i < hw; ++i) p[i] += b;
        }
}

Tensor sum_spatial(const Tensor& g) {
    Tensor out(g.n(), g.c(), 1, 1);
    const int hw = g.h() * g.w();
    for (int n = 0; n < g.n(); ++n)
        for (int c = 0; c < g.c(); ++c) {
            const float* p = g.plane(n, c);
            float acc = 0.0f;
            for (int i = 0; i < hw; ++i) acc += p[i];
            out.at(n, c, 0, 0) = acc;
        }
    return out;
}

// ---------------------------------------------------------------------------

DynamicConv2d::DynamicConv2d(const std::string& name, int in_ch, int out_ch, int k,
                             int stride, int pad, int num_kernels, int cond_dim,
                             int attn_hidden, double tau)
    : a1(name + ".attn1", cond_dim, attn_hidden),
      a2(name + ".attn2", attn_hidden, num_kernels),
      in_ch_(in_ch),
      out_ch_(out_ch),
      k_(k),
      stride_(stride),
      pad_(pad),
      K_(num_kernels),
      cond_dim_(cond_dim),
      tau_(tau) {
    if (num_kernels < 1) throw std::invalid_argument("DynamicConv2d: K must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("DynamicConv2d: tau must be > 0");
    w.setup(name + ".w", {K_ * out_ch, in_ch, k, k});
    b.setup(name + ".b", {K_, out_ch, 1, 1});
}

void DynamicConv2d::init(Rng& rng) {
    init_fan_in_uniform(w.value, in_ch_ * k_ * k_, rng);
    b.value.zero();
    a1.init(rng);
    a2.init(rng);
}

Tensor DynamicConv2d::forward(const Tensor& x, const Tensor& cond, Ctx* ctx) const {
    if (x.c() != in_ch_)
        throw std::invalid_argument("DynamicConv2d: input channels " +
                                    std::to_string(x.c()) + " != " +
                                    std::to_string(in_ch_));
    if (cond.n() != x.n() || cond.c() != cond_dim_)
        throw std::invalid_argument("DynamicConv2d: cond shape " + cond.shape().str());

    const Tensor h1 = a1.forward(cond, ctx ? &ctx->a1c : nullptr);
    const Tensor hm = mish_forward(h1);
    const Tensor logits = a2.forward(hm, ctx ? &ctx->a2c : nullptr);

    Tensor attn(x.n(), K_, 1, 1);
    for (int n = 0; n < x.n(); ++n) {
        const float* lp = logits.sample(n);
        float* ap = attn.sample(n);
        float mx = lp[0];
        for (int k = 1; k < K_; ++k) mx = std::max(mx, lp[k]);
        double sum = 0.0;
        for (int k = 0; k < K_; ++k) {
            ap[k] = static_cast<float>(std::exp((lp[k] - mx) / tau_));
            sum += ap[k];
        }
        for (int k = 0; k < K_; ++k) ap[k] = static_cast<float>(ap[k] / sum);
    }

    const int wsz = out_ch_ * in_ch_ * k_ * k_;
    Tensor weff(x.n(), wsz, 1, 1);
    for (int n = 0; n < x.n(); ++n) {
        float* wp = weff.sample(n);
        const float* ap = attn.sample(n);
        for (int k = 0; k < K_; ++k) {
            const float a = ap[k];
            const float* cand = w.value.data() + static_cast<size_t>(k) * wsz;
            if (k == 0)
                for (int i = 0; i < wsz; ++i) wp[i] = a * cand[i];
            else
                for (int i = 0; i < wsz; ++i) wp[i] += a * cand[i];
        }
    }

    const int oh = conv_out_size(x.h(), k_, stride_, pad_);
    const int ow = conv_out_size(x.w(), k_, stride_, pad_);
    Tensor y(x.n(), out_ch_, oh, ow);
    for (int n = 0; n < x.n(); ++n) {
        conv2d_forward_1(x.sample(n), in_ch_, x.h(), x.w(), weff.sample(n), out_ch_, k_,
                         stride_, pad_, y.sample(n), oh, ow);
        // attention-aggregated bias
        const float* ap = attn.sample(n);
        for (int c = 0; c < out_ch_; ++c) {
            float beff = 0.0f;
            for (int k = 0; k < K_; ++k) beff += ap[k] * b.value.at(k, c, 0, 0);
            float* plane = y.plane(n, c);
            for (int i = 0; i < oh * ow; ++i) plane[i] += beff;
        }
    }

    if (ctx) {
        ctx->x = x;
        ctx->h1 = h1;
        ctx->attn = attn;
        ctx->weff = std::move(weff);
    }
    return y;
}

std::pair<Tensor, Tensor> DynamicConv2d::backward(const Tensor& gy, const Ctx& ctx) {
    const Tensor& x = ctx.x;
    const int wsz = out_ch_ * in_ch_ * k_ * k_;

    Tensor gx(x.shape());
    Tensor ga(x.n(), K_, 1, 1);
    std::vector<float> gweff(wsz);
    const Tensor gbeff = sum_spatial(gy);  // (n, out, 1, 1)

    for (int n = 0; n < x.n(); ++n) {
        std::fill(gweff.begin(), gweff.end(), 0.0f);
        conv2d_bwd_weight_1(x.sample(n), in_ch_, x.h(), x.w(), gy.sample(n), out_ch_,
                            gy.h(), gy.w(), k_, stride_, pad_, gweff.data());
        conv2d_bwd_input_1(gy.sample(n), out_ch_, gy.h(), gy.w(), ctx.weff.sample(n),
                           in_ch_, k_, stride_, pad_, gx.sample(n), x.h(), x.w());

        const float* ap = ctx.attn.sample(n);
        float* gap = ga.sample(n);
        for (int k = 0; k < K_; ++k) {
            const float a = ap[k];
            float* gw = w.grad.data() + static_cast<size_t>(k) * wsz;
            const float* cand = w.value.data() + static_cast<size_t>(k) * wsz;
            double dot = 0.0;
            for (int i = 0; i < wsz; ++i) {
                gw[i] += a * gweff[i];
                dot += static_cast<double>(cand[i]) * gweff[i];
            }
            for (int c = 0; c < out_ch_; ++c) {
                const float gb = gbeff.at(n, c, 0, 0);
                b.grad.at(k, c, 0, 0) += a * gb;
                dot += static_cast<double>(b.value.at(k, c, 0, 0)) * gb;
            }
            gap[k] = static_cast<float>(dot);
        }
    }

    // softmax backward, logits scaled by 1/tau
    Tensor glogits(x.n(), K_, 1, 1);
    for (int n = 0; n < x.n(); ++n) {
        const float* ap = ctx.attn.sample(n);
        const float* gap = ga.sample(n);
        double inner = 0.0;
        for (int k = 0; k < K_; ++k) inner += static_cast<double>(ap[k]) * gap[k];
        float* glp = glogits.sample(n);
        for (int k = 0; k < K_; ++k)
            glp[k] = static_cast<float>(ap[k] * (gap[k] - inner) / tau_);
    }

    Tensor ghm = a2.backward(glogits, ctx.a2c);
    Tensor gh1 = mish_backward(ctx.h1, ghm);
    Tensor gcond = a1.backward(gh1, ctx.a1c);
    return {std::move(gx), std::move(gcond)};
}

void DynamicConv2d::collect_params(std::vector<Parameter*>& out) {
    out.push_back(&w);
    out.push_back(&b);
    a1.collect_params(out);
    a2.collect_params(out);
}

// ---------------------------------------------------------------------------

PlainResBlock::PlainResBlock(const std::string& name, int in_ch, int out_ch, int cond_dim)
    : conv1(name + ".conv1", in_ch, out_ch, 3, 1, 1),
      conv2(name + ".conv2", out_ch, out_ch, 3, 1, 1),
      cond_bias(name + ".cond_bias", cond_dim, out_ch),
      in_ch_(in_ch),
      out_ch_(out_ch) {
    if (in_ch != out_ch)
        skip = std::make_unique<Conv2d>(name + ".skip", in_ch, out_ch, 1, 1, 0, false);
}

void PlainResBlock::init(Rng& rng) {
    conv1.init(rng);
    conv2.init(rng);
    cond_bias.init(rng);
    if (skip) skip->init(rng);
}

Tensor PlainResBlock::forward(const Tensor& x, const Tensor& cond, Ctx* ctx) const {
    Tensor h1 = conv1.forward(x, ctx ? &ctx->c1 : nullptr);
    const Tensor bias = cond_bias.forward(cond, ctx ? &ctx->bias : nullptr);
    add_per_sample_bias(h1, bias);
    if (ctx) ctx->h1b = h1;
    const Tensor a1 = mish_forward(h1);
    const Tensor h2 = conv2.forward(a1, ctx ? &ctx->c2 : nullptr);
    if (ctx) ctx->h2 = h2;
    Tensor y = mish_forward(h2);
    if (skip)
        axpy(1.0f, skip->forward(x, ctx ? &ctx->sk : nullptr), y);
    else
        axpy(1.0f, x, y);
    return y;
}

std::pair<Tensor, Tensor> PlainResBlock::backward(const Tensor& gy, const Ctx& ctx) {
    const Tensor gh2 = mish_backward(ctx.h2, gy);
    const Tensor ga1 = conv2.backward(gh2, ctx.c2);
    const Tensor gh1b = mish_backward(ctx.h1b, ga1);
    Tensor gcond = cond_bias.backward(sum_spatial(gh1b), ctx.bias);
    Tensor gx = conv1.backward(gh1b, ctx.c1);
    if (skip)
        axpy(1.0f, skip->backward(gy, ctx.sk), gx);
    else
        axpy(1.0f, gy, gx);
    return {std::move(gx), std::move(gcond)};
}

void PlainResBlock::collect_params(std::vector<Parameter*>& out) {
    conv1.collect_params(out);
    conv2.collect_params(out);
    cond_bias.collect_params(out);
    if (skip) skip->collect_params(out);
}

// ---------------------------------------------------------------------------

DynResBlock::DynResBlock(const std::string& name, int in_ch, int out_ch, int temb_dim,
                         int v_dim, int vproj_dim, int num_kernels, int attn_hidden,
                         double tau)
    : v_proj(name + ".v_proj", v_dim, vproj_dim),
      conv1(name + ".conv1", in_ch, out_ch, 3, 1, 1, num_kernels, temb_dim + vproj_dim,
            attn_hidden, tau),
      conv2(name + ".conv2", out_ch, out_ch, 3, 1, 1, num_kernels, temb_dim + vproj_dim,
            attn_hidden, tau),
      cond_bias(name + ".cond_bias", temb_dim + vproj_dim, out_ch),
      in_ch_(in_ch),
      out_ch_(out_ch),
      temb_dim_(temb_dim),
      vproj_dim_(vproj_dim) {
    if (in_ch != out_ch)
        skip = std::make_unique<Conv2d>(name + ".skip", in_ch, out_ch, 1, 1, 0, false);
}

void DynResBlock::init(Rng& rng) {
    v_proj.init(rng);
    conv1.init(rng);
    conv2.init(rng);
    cond_bias.init(rng);
    if (skip) skip->init(rng);
}

Tensor DynResBlock::forward(const Tensor& x, const Tensor& temb, const Tensor& v,
                            Ctx* ctx) const {
    const Tensor vp = v_proj.forward(v, ctx ? &ctx->vproj : nullptr);
    Tensor cond = concat_channels(temb, vp);
    Tensor h1 = conv1.forward(x, cond, ctx ? &ctx->c1 : nullptr);
    const Tensor bias = cond_bias.forward(cond, ctx ? &ctx->bias : nullptr);
    add_per_sample_bias(h1, bias);
    if (ctx) ctx->h1b = h1;
    const Tensor a1 = mish_forward(h1);
    const Tensor h2 = conv2.forward(a1, cond, ctx ? &ctx->c2 : nullptr);
    if (ctx) {
        ctx->h2 = h2;
        ctx->cond = std::move(cond);
    }
    Tensor y = mish_forward(h2);
    if (skip)
        axpy(1.0f, skip->forward(x, ctx ? &ctx->sk : nullptr), y);
    else
        axpy(1.0f, x, y);
    return y;
}

Tensor DynResBlock::backward(const Tensor& gy, const Ctx& ctx) {
    const Tensor gh2 = mish_backward(ctx.h2, gy);
    auto [ga1, gcond2] = conv2.backward(gh2, ctx.c2);
    const Tensor gh1b = mish_backward(ctx.h1b, ga1);
    Tensor gcond = cond_bias.backward(sum_spatial(gh1b), ctx.bias);
    axpy(1.0f, gcond2, gcond);
    auto [gx, gcond1] = conv1.backward(gh1b, ctx.c1);
    axpy(1.0f, gcond1, gcond);
    if (skip)
        axpy(1.0f, skip->backward(gy, ctx.sk), gx);
    else
        axpy(1.0f, gy, gx);

    // route the v-projection slice of gcond; temb slice has no learnables upstream
    Tensor gtemb(gy.n(), temb_dim_, 1, 1);
    Tensor gvp(gy.n(), vproj_dim_, 1, 1);
    split_channels(gcond, gtemb, gvp);
    v_proj.backward(gvp, ctx.vproj);
    return gx;
}

void DynResBlock::collect_params(std::vector<Parameter*>& out) {
    v_proj.collect_params(out);
    conv1.collect_params(out);
    conv2.collect_params(out);
    cond_bias.collect_params(out);
    if (skip) skip->collect_params(out);
}

}  // namespace bsrdiff::nn
