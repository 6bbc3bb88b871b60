#pragma once

#include <array>
#include <vector>

#include "bsrdiff/rng.hpp"

namespace bsrdiff {

/// Eigenstructure parameterization of an anisotropic Gaussian blur:
/// covariance eigenvalues (variances, pixels^2) and a rotation angle.
struct KernelParams {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double theta = 0.0;  // radians, [0, pi)

    static constexpr double kLambdaMin = 0.2;
    static constexpr double kLambdaMax = 4.0;

    void validate() const;
};

/// Rendered blur kernel: size x size non-negative grid summing to 1.
struct Kernel {
    int size = 0;
    std::vector<float> values;  // row-major, size*size

    float at(int r, int c) const { return values[static_cast<size_t>(r) * size + c]; }
    float& at(int r, int c) { return values[static_cast<size_t>(r) * size + c]; }
};

/// 2x2 symmetric matrix; rows/cols index (row-offset, col-offset) axes.
struct Mat2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

    double det() const { return a11 * a22 - a12 * a21; }
};

inline constexpr int kDefaultKernelSize = 24;

/// Sigma = R(theta) diag(lambda1, lambda2) R(theta)^T. lambda1 lies along the
/// row axis at theta = 0.
Mat2 covariance_from_params(const KernelParams& p);

/// Discretized zero-mean Gaussian exp(-1/2 x^T Sigma^-1 x) on a size x size
/// grid centered at ((size-1)/2, (size-1)/2), normalized to sum 1.
Kernel render_kernel(const Mat2& sigma, int size);

/// lambda1, lambda2 ~ U(0.2, 4) independently; theta ~ U(0, pi).
KernelParams sample_params(Rng& rng);

/// Row-major flattening; lossless round trip with vector_to_kernel.
std::vector<float> kernel_to_vector(const Kernel& k);

/// Inverse of kernel_to_vector. Does NOT renormalize: diffusion states are
/// noisy vectors, not valid kernels.
Kernel vector_to_kernel(const std::vector<float>& v);

/// Clamp negatives to zero and renormalize to sum 1. Used to turn a raw
/// diffusion output into a reportable kernel.
Kernel project_to_kernel(const std::vector<float>& v);

/// Max-normalized 8-bit grayscale rendering for visual inspection.
std::vector<std::uint8_t> kernel_to_gray_u8(const Kernel& k);

}  // namespace bsrdiff
