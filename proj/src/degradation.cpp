#include "bsrdiff/degradation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bsrdiff {

namespace {

// reflect-101: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = std::abs(i) % period;
    return i < n ? i : period - i;
}

// Catmull-Rom cubic, a = -0.5
inline double cubic_weight(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    return 0.0;
}

}  // namespace

Image convolve2d(const Image& img, const Kernel& k, Boundary) {
    const int h = img.height(), w = img.width(), ks = k.size;
    if (ks > h || ks > w)
        throw std::invalid_argument("convolve2d: kernel " + std::to_string(ks) +
                                    " larger than image " + std::to_string(h) + "x" +
                                    std::to_string(w));
    const int anchor = ks / 2;
    Image out(img.channels(), h, w, img.range);
    for (int c = 0; c < img.channels(); ++c) {
        const float* src = img.t.plane(0, c);
        float* dst = out.t.plane(0, c);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = 0; i < ks; ++i) {
                    const int sy = reflect_index(y + anchor - i, h);
                    const float* row = src + static_cast<size_t>(sy) * w;
                    for (int j = 0; j < ks; ++j) {
                        const int sx = reflect_index(x + anchor - j, w);
                        acc += static_cast<double>(k.at(i, j)) * row[sx];
                    }
                }
                dst[static_cast<size_t>(y) * w + x] = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Image downsample(const Image& img, int s) {
    if (s < 1) throw std::invalid_argument("downsample: scale must be >= 1");
    if (s == 1) return img;
    const int h = img.height(), w = img.width();
    if (h % s != 0 || w % s != 0)
        throw std::invalid_argument("downsample: dimensions " + std::to_string(h) + "x" +
                                    std::to_string(w) + " not divisible by " +
                                    std::to_string(s));
    Image out(img.channels(), h / s, w / s, img.range);
    for (int c = 0; c < img.channels(); ++c) {
        const float* src = img.t.plane(0, c);
        float* dst = out.t.plane(0, c);
        for (int y = 0; y < h / s; ++y)
            for (int x = 0; x < w / s; ++x)
                dst[static_cast<size_t>(y) * (w / s) + x] =
                    src[static_cast<size_t>(y) * s * w + x * s];
    }
    return out;
}

std::pair<Image, Kernel> degrade(const Image& hr, const KernelParams& p, int s,
                                 int kernel_size) {
    Kernel k = render_kernel(covariance_from_params(p), kernel_size);
    Image lr = downsample(convolve2d(hr, k), s);
    return {std::move(lr), std::move(k)};
}

Image bicubic_resize_to(const Image& img, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("bicubic_resize_to: empty target");
    const int h = img.height(), w = img.width(), ch = img.channels();
    const double sy = static_cast<double>(h) / out_h;
    const double sx = static_cast<double>(w) / out_w;

    // horizontal pass into (h, out_w), then vertical pass
    Tensor mid(1, ch, h, out_w);
    for (int c = 0; c < ch; ++c) {
        const float* src = img.t.plane(0, c);
        float* dst = mid.plane(0, c);
        for (int x = 0; x < out_w; ++x) {
            const double center = (x + 0.5) * sx - 0.5;
            const int base = static_cast<int>(std::floor(center)) - 1;
            double wgt[4];
            for (int j = 0; j < 4; ++j) wgt[j] = cubic_weight(center - (base + j));
            for (int y = 0; y < h; ++y) {
                const float* row = src + static_cast<size_t>(y) * w;
                double acc = 0.0;
                for (int j = 0; j < 4; ++j)
                    acc += wgt[j] * row[std::clamp(base + j, 0, w - 1)];
                dst[static_cast<size_t>(y) * out_w + x] = static_cast<float>(acc);
            }
        }
    }

    Image out(ch, out_h, out_w, img.range);
    for (int c = 0; c < ch; ++c) {
        const float* src = mid.plane(0, c);
        float* dst = out.t.plane(0, c);
        for (int y = 0; y < out_h; ++y) {
            const double center = (y + 0.5) * sy - 0.5;
            const int base = static_cast<int>(std::floor(center)) - 1;
            double wgt[4];
            for (int j = 0; j < 4; ++j) wgt[j] = cubic_weight(center - (base + j));
            for (int x = 0; x < out_w; ++x) {
                double acc = 0.0;
                for (int j = 0; j < 4; ++j)
                    acc += wgt[j] *
                           src[static_cast<size_t>(std::clamp(base + j, 0, h - 1)) * out_w + x];
                dst[static_cast<size_t>(y) * out_w + x] = static_cast<float>(acc);
            }
        }
    }
    clamp_to_range(out);
    return out;
}

Image bicubic_resize(const Image& img, double factor) {
    if (!(factor > 0.0)) throw std::invalid_argument("bicubic_resize: factor must be > 0");
    const double th = img.height() * factor;
    const double tw = img.width() * factor;
    const double rh = std::round(th), rw = std::round(tw);
    if (std::abs(th - rh) > 1e-9 || std::abs(tw - rw) > 1e-9)
        throw std::invalid_argument("bicubic_resize: non-integral target size " +
                                    std::to_string(th) + "x" + std::to_string(tw));
    return bicubic_resize_to(img, static_cast<int>(rh), static_cast<int>(rw));
}

double psnr(const Image& a, const Image& b) {
    if (a.channels() != b.channels() || a.height() != b.height() || a.width() != b.width())
        throw std::invalid_argument("psnr: shape mismatch");
    if (a.range != b.range)
        throw std::invalid_argument("psnr: value-range mismatch");
    const Image ua = to_unit(a), ub = to_unit(b);
    const float* pa = ua.t.data();
    const float* pb = ub.t.data();
    double mse = 0.0;
    const std::int64_t n = ua.t.numel();
    for (std::int64_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(n);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

}  // namespace bsrdiff
