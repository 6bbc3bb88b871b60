#include "bsrdiff/diffusion.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace bsrdiff {

std::uint64_t DiffusionSchedule::beta_checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int t = 1; t <= T; ++t) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(double));
        std::memcpy(&bits, &betas[t], sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffULL;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

DiffusionSchedule make_schedule(int T, double beta_start, double beta_end,
                                ScheduleShape shape) {
    if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
        throw std::invalid_argument("make_schedule: need 0 < beta_start <= beta_end < 1");
    if (shape != ScheduleShape::Linear)
        throw std::invalid_argument("make_schedule: unknown shape");

    DiffusionSchedule s;
    s.T = T;
    s.beta_start = beta_start;
    s.beta_end = beta_end;
    s.shape = "linear";
    s.betas.assign(T + 1, 0.0);
    s.alphas.assign(T + 1, 0.0);
    s.alpha_bars.assign(T + 1, 0.0);
    s.sigmas.assign(T + 1, 0.0);

    s.alpha_bars[0] = 1.0;
    for (int t = 1; t <= T; ++t) {
        s.betas[t] = (T == 1) ? beta_start
                              : beta_start + (beta_end - beta_start) * (t - 1) / (T - 1);
        s.alphas[t] = 1.0 - s.betas[t];
        s.alpha_bars[t] = s.alpha_bars[t - 1] * s.alphas[t];
        s.sigmas[t] =
            std::sqrt((1.0 - s.alpha_bars[t - 1]) / (1.0 - s.alpha_bars[t]) * s.betas[t]);
    }
    return s;
}

static void check_t(int t, const DiffusionSchedule& sched, const char* what) {
    if (t < 1 || t > sched.T)
        throw std::invalid_argument(std::string(what) + ": t=" + std::to_string(t) +
                                    " outside [1, " + std::to_string(sched.T) + "]");
}

Tensor q_sample(const Tensor& x0, int t, const Tensor& eps, const DiffusionSchedule& sched) {
    check_t(t, sched, "q_sample");
    check_same_shape(x0, eps, "q_sample");
    const float a = static_cast<float>(std::sqrt(sched.alpha_bars[t]));
    const float b = static_cast<float>(std::sqrt(1.0 - sched.alpha_bars[t]));
    Tensor out(x0.shape());
    const float* xp = x0.data();
    const float* ep = eps.data();
    float* op = out.data();
    for (std::int64_t i = 0, n = out.numel(); i < n; ++i) op[i] = a * xp[i] + b * ep[i];
    return out;
}

Tensor posterior_mean(const Tensor& x_t, const Tensor& eps_hat, int t,
                      const DiffusionSchedule& sched) {
    check_t(t, sched, "posterior_mean");
    check_same_shape(x_t, eps_hat, "posterior_mean");
    const float inv_sqrt_alpha = static_cast<float>(1.0 / std::sqrt(sched.alphas[t]));
    const float coef =
        static_cast<float>(sched.betas[t] / std::sqrt(1.0 - sched.alpha_bars[t]));
    Tensor out(x_t.shape());
    const float* xp = x_t.data();
    const float* ep = eps_hat.data();
    float* op = out.data();
    for (std::int64_t i = 0, n = out.numel(); i < n; ++i)
        op[i] = inv_sqrt_alpha * (xp[i] - coef * ep[i]);
    return out;
}

Tensor reverse_step(const Tensor& x_t, const Tensor& eps_hat, int t, const Tensor& z,
                    const DiffusionSchedule& sched) {
    check_t(t, sched, "reverse_step");
    check_same_shape(x_t, z, "reverse_step");
    if (t == 1) {
        const float* zp = z.data();
        for (std::int64_t i = 0, n = z.numel(); i < n; ++i)
            if (zp[i] != 0.0f)
                throw std::invalid_argument("reverse_step: z must be zero at t=1");
    }
    Tensor out = posterior_mean(x_t, eps_hat, t, sched);
    const float sigma = static_cast<float>(sched.sigmas[t]);
    if (sigma != 0.0f) axpy(sigma, z, out);
    return out;
}

double noise_loss(const Tensor& eps_hat, const Tensor& eps) {
    check_same_shape(eps_hat, eps, "noise_loss");
    const float* a = eps_hat.data();
    const float* b = eps.data();
    double acc = 0.0;
    const std::int64_t n = eps_hat.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(n);
}

}  // namespace bsrdiff
