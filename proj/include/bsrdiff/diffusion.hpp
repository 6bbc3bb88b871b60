#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsrdiff/tensor.hpp"

namespace bsrdiff {

/// Precomputed noise schedule shared by both chains. alphas, alpha_bars and
/// sigmas are pure functions of betas; alpha_bar[0] == 1 by convention so
/// sigma[1] == 0 and the final reverse step is deterministic.
struct DiffusionSchedule {
    int T = 0;
    double beta_start = 0.0;
    double beta_end = 0.0;
    std::string shape = "linear";

    // index t in [1, T]; slot 0 unused except alpha_bars[0] = 1
    std::vector<double> betas;       // size T+1, betas[0] = 0
    std::vector<double> alphas;      // 1 - beta_t
    std::vector<double> alpha_bars;  // prod_{s<=t} alpha_s, alpha_bars[0] = 1
    std::vector<double> sigmas;      // sqrt((1-abar_{t-1})/(1-abar_t) * beta_t)

    /// FNV-1a over the byte representation of betas[1..T]; stored in
    /// checkpoints and verified after recomputation on load.
    std::uint64_t beta_checksum() const;
};

enum class ScheduleShape { Linear };

/// Linear beta ramp from beta_start to beta_end inclusive.
DiffusionSchedule make_schedule(int T, double beta_start, double beta_end,
                                ScheduleShape shape = ScheduleShape::Linear);

/// Closed-form forward sample: sqrt(abar_t) x0 + sqrt(1-abar_t) eps.
Tensor q_sample(const Tensor& x0, int t, const Tensor& eps, const DiffusionSchedule& sched);

/// Reverse-process mean mu = (x_t - beta_t / sqrt(1-abar_t) * eps_hat) / sqrt(alpha_t).
Tensor posterior_mean(const Tensor& x_t, const Tensor& eps_hat, int t,
                      const DiffusionSchedule& sched);

/// One reverse transition x_{t-1} = posterior_mean + sigma_t * z.
/// z must be all-zero when t == 1.
Tensor reverse_step(const Tensor& x_t, const Tensor& eps_hat, int t, const Tensor& z,
                    const DiffusionSchedule& sched);

/// Mean squared error over all elements (double accumulation).
double noise_loss(const Tensor& eps_hat, const Tensor& eps);

}  // namespace bsrdiff
