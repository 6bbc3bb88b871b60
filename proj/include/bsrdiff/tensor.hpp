#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsrdiff {

/// Shape of a rank-4 tensor: batch x channels x height x width.
struct Shape4 {
    int n = 0, c = 0, h = 0, w = 0;

    std::int64_t numel() const {
        return static_cast<std::int64_t>(n) * c * h * w;
    }
    bool operator==(const Shape4&) const = default;
    std::string str() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
               std::to_string(h) + "," + std::to_string(w) + ")";
    }
};

/// Dense rank-4 float32 tensor, NCHW layout. The universal carrier for
/// images, feature maps, kernels-as-images and diffusion states.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape4 s) : shape_(s), data_(static_cast<size_t>(s.numel()), 0.0f) {
        if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0)
            throw std::invalid_argument("Tensor: negative dimension " + s.str());
    }
    Tensor(int n, int c, int h, int w) : Tensor(Shape4{n, c, h, w}) {}

    static Tensor full(Shape4 s, float v) {
        Tensor t(s);
        std::fill(t.data_.begin(), t.data_.end(), v);
        return t;
    }

    const Shape4& shape() const { return shape_; }
    int n() const { return shape_.n; }
    int c() const { return shape_.c; }
    int h() const { return shape_.h; }
    int w() const { return shape_.w; }
    std::int64_t numel() const { return shape_.numel(); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& at(int n, int c, int h, int w) { return data_[index(n, c, h, w)]; }
    float at(int n, int c, int h, int w) const { return data_[index(n, c, h, w)]; }

    /// Pointer to the start of one (n, c) plane.
    float* plane(int n, int c) { return data_.data() + index(n, c, 0, 0); }
    const float* plane(int n, int c) const { return data_.data() + index(n, c, 0, 0); }

    /// Pointer to the start of one sample.
    float* sample(int n) { return data_.data() + index(n, 0, 0, 0); }
    const float* sample(int n) const { return data_.data() + index(n, 0, 0, 0); }

    void fill(float v) { std::fill(data_.begin(), data_.end(), v); }
    void zero() { fill(0.0f); }

    std::vector<float>& vec() { return data_; }
    const std::vector<float>& vec() const { return data_; }

private:
    size_t index(int n, int c, int h, int w) const {
        return ((static_cast<size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
    }

    Shape4 shape_;
    std::vector<float> data_;
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!(a.shape() == b.shape()))
        throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                    a.shape().str() + " vs " + b.shape().str());
}

/// y += alpha * x
inline void axpy(float alpha, const Tensor& x, Tensor& y) {
    check_same_shape(x, y, "axpy");
    const float* xp = x.data();
    float* yp = y.data();
    const std::int64_t n = x.numel();
    for (std::int64_t i = 0; i < n; ++i) yp[i] += alpha * xp[i];
}

inline bool all_finite(const Tensor& t) {
    const float* p = t.data();
    for (std::int64_t i = 0, n = t.numel(); i < n; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

}  // namespace bsrdiff
