#pragma once

#include <string>
#include <vector>

#include "bsrdiff/nn/ops.hpp"
#include "bsrdiff/rng.hpp"
#include "bsrdiff/tensor.hpp"

namespace bsrdiff::nn {

/// Named learnable tensor plus its gradient accumulator.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    void setup(std::string n, Shape4 s) {
        name = std::move(n);
        value = Tensor(s);
        grad = Tensor(s);
    }
    void zero_grad() { grad.zero(); }
};

/// Base for everything that owns parameters. Forward passes are const and
/// reentrant; backward passes accumulate into grads and require exclusive
/// access, which the trainers guarantee.
class Module {
public:
    virtual ~Module() = default;
    virtual void collect_params(std::vector<Parameter*>& out) = 0;

    std::vector<Parameter*> parameters() {
        std::vector<Parameter*> out;
        collect_params(out);
        return out;
    }
    void zero_grad() {
        for (Parameter* p : parameters()) p->zero_grad();
    }
    std::int64_t param_count() {
        std::int64_t n = 0;
        for (Parameter* p : parameters()) n += p->value.numel();
        return n;
    }
};

/// Fan-in scaled uniform: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void init_fan_in_uniform(Tensor& t, int fan_in, Rng& rng);

class Conv2d : public Module {
public:
    Conv2d() = default;
    Conv2d(const std::string& name, int in_ch, int out_ch, int k, int stride = 1,
           int pad = 0, bool bias = true);

    void init(Rng& rng);
    void init_zero();

    struct Ctx {
        Tensor x;
    };

    Tensor forward(const Tensor& x, Ctx* ctx) const;
    /// Accumulates parameter grads, returns grad w.r.t. the input.
    Tensor backward(const Tensor& gy, const Ctx& ctx);

    void collect_params(std::vector<Parameter*>& out) override;

    int in_ch() const { return in_ch_; }
    int out_ch() const { return out_ch_; }

    Parameter w, b;

private:
    int in_ch_ = 0, out_ch_ = 0, k_ = 0, stride_ = 1, pad_ = 0;
    bool has_bias_ = true;
};

/// Transposed convolution, weight layout (in_ch, out_ch, k, k);
/// out = (in - 1) * stride - 2 * pad + k.
class ConvTranspose2d : public Module {
public:
    ConvTranspose2d() = default;
    ConvTranspose2d(const std::string& name, int in_ch, int out_ch, int k, int stride,
                    int pad, bool bias = true);

    void init(Rng& rng);

    struct Ctx {
        Tensor x;
    };

    Tensor forward(const Tensor& x, Ctx* ctx) const;
    Tensor backward(const Tensor& gy, const Ctx& ctx);

    void collect_params(std::vector<Parameter*>& out) override;

    Parameter w, b;

private:
    int in_ch_ = 0, out_ch_ = 0, k_ = 0, stride_ = 1, pad_ = 0;
    bool has_bias_ = true;
};

/// Fully connected layer on (n, features, 1, 1) tensors.
class Linear : public Module {
public:
    Linear() = default;
    Linear(const std::string& name, int in_features, int out_features, bool bias = true);

    void init(Rng& rng);
    void init_zero();

    struct Ctx {
        Tensor x;
    };

    Tensor forward(const Tensor& x, Ctx* ctx) const;
    Tensor backward(const Tensor& gy, const Ctx& ctx);

    void collect_params(std::vector<Parameter*>& out) override;

    int in_features() const { return in_; }
    int out_features() const { return out_; }

    Parameter w, b;

private:
    int in_ = 0, out_ = 0;
    bool has_bias_ = true;
};

}  // namespace bsrdiff::nn
