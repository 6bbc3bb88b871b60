#include "bsrdiff/kernelgen.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bsrdiff {

void KernelParams::validate() const {
    if (!std::isfinite(lambda1) || !std::isfinite(lambda2) || !std::isfinite(theta))
        throw std::invalid_argument("KernelParams: non-finite value");
    if (lambda1 < kLambdaMin || lambda1 > kLambdaMax || lambda2 < kLambdaMin ||
        lambda2 > kLambdaMax)
        throw std::invalid_argument("KernelParams: eigenvalue outside [" +
                                    std::to_string(kLambdaMin) + ", " +
                                    std::to_string(kLambdaMax) + "]");
    if (theta < 0.0 || theta >= M_PI)
        throw std::invalid_argument("KernelParams: theta outside [0, pi)");
}

Mat2 covariance_from_params(const KernelParams& p) {
    p.validate();
    const double c = std::cos(p.theta), s = std::sin(p.theta);
    // R diag(l1, l2) R^T with R = [[c, -s], [s, c]]
    Mat2 m;
    m.a11 = c * c * p.lambda1 + s * s * p.lambda2;
    m.a12 = c * s * (p.lambda1 - p.lambda2);
    m.a21 = m.a12;
    m.a22 = s * s * p.lambda1 + c * c * p.lambda2;
    return m;
}

Kernel render_kernel(const Mat2& sigma, int size) {
    if (size < 3) throw std::invalid_argument("render_kernel: size must be >= 3");
    if (!std::isfinite(sigma.a11) || !std::isfinite(sigma.a12) ||
        !std::isfinite(sigma.a21) || !std::isfinite(sigma.a22))
        throw std::invalid_argument("render_kernel: non-finite covariance");
    if (std::abs(sigma.a12 - sigma.a21) > 1e-12)
        throw std::invalid_argument("render_kernel: covariance not symmetric");
    const double det = sigma.det();
    if (!(det > 0.0) || !(sigma.a11 > 0.0))
        throw std::invalid_argument("render_kernel: covariance not positive definite");

    // inverse of the 2x2 covariance
    const double i11 = sigma.a22 / det;
    const double i12 = -sigma.a12 / det;
    const double i22 = sigma.a11 / det;

    const double center = (size - 1) / 2.0;
    std::vector<double> acc(static_cast<size_t>(size) * size);
    double sum = 0.0;
    for (int r = 0; r < size; ++r) {
        const double dr = r - center;
        for (int c = 0; c < size; ++c) {
            const double dc = c - center;
            const double q = i11 * dr * dr + 2.0 * i12 * dr * dc + i22 * dc * dc;
            const double v = std::exp(-0.5 * q);
            acc[static_cast<size_t>(r) * size + c] = v;
            sum += v;
        }
    }

    // mass outside the support is absorbed by this normalization
    Kernel k;
    k.size = size;
    k.values.resize(acc.size());
    for (size_t i = 0; i < acc.size(); ++i)
        k.values[i] = static_cast<float>(acc[i] / sum);
    return k;
}

KernelParams sample_params(Rng& rng) {
    KernelParams p;
    p.lambda1 = rng.uniform(KernelParams::kLambdaMin, KernelParams::kLambdaMax);
    p.lambda2 = rng.uniform(KernelParams::kLambdaMin, KernelParams::kLambdaMax);
    p.theta = rng.uniform(0.0, M_PI);
    return p;
}

std::vector<float> kernel_to_vector(const Kernel& k) {
    if (k.values.size() != static_cast<size_t>(k.size) * k.size)
        throw std::invalid_argument("kernel_to_vector: values/size mismatch");
    return k.values;
}

Kernel vector_to_kernel(const std::vector<float>& v) {
    const int size = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v.size()))));
    if (static_cast<size_t>(size) * size != v.size())
        throw std::invalid_argument("vector_to_kernel: length " +
                                    std::to_string(v.size()) + " is not a perfect square");
    Kernel k;
    k.size = size;
    k.values = v;
    return k;
}

Kernel project_to_kernel(const std::vector<float>& v) {
    Kernel k = vector_to_kernel(v);
    double sum = 0.0;
    for (float& x : k.values) {
        if (x < 0.0f) x = 0.0f;
        sum += x;
    }
    if (sum <= 0.0) {
        // degenerate prediction: fall back to a uniform kernel
        const float u = 1.0f / static_cast<float>(k.values.size());
        for (float& x : k.values) x = u;
        return k;
    }
    for (float& x : k.values) x = static_cast<float>(x / sum);
    return k;
}

std::vector<std::uint8_t> kernel_to_gray_u8(const Kernel& k) {
    float maxv = 0.0f;
    for (float v : k.values) maxv = std::max(maxv, v);
    std::vector<std::uint8_t> out(k.values.size(), 0);
    if (maxv <= 0.0f) return out;
    for (size_t i = 0; i < out.size(); ++i) {
        const float v = std::max(0.0f, k.values[i]) / maxv * 255.0f;
        out[i] = static_cast<std::uint8_t>(v + 0.5f);
    }
    return out;
}

}  // namespace bsrdiff
