#pragma once

#include <memory>
#include <utility>

#include "bsrdiff/nn/layers.hpp"

namespace bsrdiff::nn {

/// Timestep encoding: interleaved (sin, cos) pairs with log-spaced
/// frequencies 10000^(-i/(dim/2-1)). dim must be even, t >= 0.
std::vector<float> sinusoidal_embed(int t, int dim);
Tensor sinusoidal_embed_batch(const std::vector<int>& ts, int dim);

/// y[n][c][...] += bias[n][c]
void add_per_sample_bias(Tensor& y, const Tensor& bias);
/// returns (n, c, 1, 1) spatial sums of g
Tensor sum_spatial(const Tensor& g);

/// Attention-over-kernels convolution: K candidate kernels mixed by a
/// softmax over MLP(cond) logits, one effective kernel per sample.
/// Per-candidate biases are aggregated with the same attention weights.
class DynamicConv2d : public Module {
public:
    DynamicConv2d() = default;
    DynamicConv2d(const std::string& name, int in_ch, int out_ch, int k, int stride,
                  int pad, int num_kernels, int cond_dim, int attn_hidden, double tau);

    void init(Rng& rng);

    struct Ctx {
        Tensor x;
        Tensor h1;    // attention MLP hidden pre-activation
        Tensor attn;  // (n, K, 1, 1)
        Tensor weff;  // (n, out*in*k*k, 1, 1) effective kernels
        Linear::Ctx a1c, a2c;
    };

    Tensor forward(const Tensor& x, const Tensor& cond, Ctx* ctx) const;
    /// Returns (grad_x, grad_cond).
    std::pair<Tensor, Tensor> backward(const Tensor& gy, const Ctx& ctx);

    void collect_params(std::vector<Parameter*>& out) override;

    int num_kernels() const { return K_; }

    Parameter w;  // (K*out, in, k, k)
    Parameter b;  // (K, out, 1, 1)
    Linear a1, a2;

private:
    int in_ch_ = 0, out_ch_ = 0, k_ = 0, stride_ = 1, pad_ = 0, K_ = 1, cond_dim_ = 0;
    double tau_ = 1.0;
};

/// Residual block conditioned on the timestep embedding: two convolutions
/// with Mish, an additive per-channel bias projected from the condition,
/// and a residual skip (1x1 conv when channel counts differ).
class PlainResBlock : public Module {
public:
    PlainResBlock() = default;
    PlainResBlock(const std::string& name, int in_ch, int out_ch, int cond_dim);

    void init(Rng& rng);

    struct Ctx {
        Conv2d::Ctx c1, c2, sk;
        Linear::Ctx bias;
        Tensor h1b, h2;
    };

    Tensor forward(const Tensor& x, const Tensor& cond, Ctx* ctx) const;
    std::pair<Tensor, Tensor> backward(const Tensor& gy, const Ctx& ctx);

    void collect_params(std::vector<Parameter*>& out) override;

    Conv2d conv1, conv2;
    Linear cond_bias;
    std::unique_ptr<Conv2d> skip;  // null when in_ch == out_ch

private:
    int in_ch_ = 0, out_ch_ = 0;
};

/// Dynamic residual block: same topology with dynamic convolutions and the
/// conditioning vector concat(t_emb, proj(v)) feeding the attention MLPs
/// and the additive bias.
class DynResBlock : public Module {
public:
    DynResBlock() = default;
    DynResBlock(const std::string& name, int in_ch, int out_ch, int temb_dim, int v_dim,
                int vproj_dim, int num_kernels, int attn_hidden, double tau);

    void init(Rng& rng);

    struct Ctx {
        Linear::Ctx vproj;
        DynamicConv2d::Ctx c1, c2;
        Conv2d::Ctx sk;
        Linear::Ctx bias;
        Tensor h1b, h2;
        Tensor cond;
    };

    Tensor forward(const Tensor& x, const Tensor& temb, const Tensor& v, Ctx* ctx) const;
    /// Returns grad_x; grads w.r.t. temb and v are dropped (nothing learnable
    /// upstream of either during training).
    Tensor backward(const Tensor& gy, const Ctx& ctx);

    void collect_params(std::vector<Parameter*>& out) override;

    Linear v_proj;
    DynamicConv2d conv1, conv2;
    Linear cond_bias;
    std::unique_ptr<Conv2d> skip;

private:
    int in_ch_ = 0, out_ch_ = 0, temb_dim_ = 0, vproj_dim_ = 0;
};

}  // namespace bsrdiff::nn
