#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "bsrdiff/tensor.hpp"

namespace bsrdiff {

/// Declared value domain of an image. Unit is the file/metric domain [0,1];
/// Signed is the network domain [-1,1].
enum class ValueRange { Unit, Signed };

/// Single image: channels x height x width float values plus a declared
/// range. Stored as a rank-4 tensor with batch dim 1.
struct Image {
    Tensor t;  // shape (1, c, h, w)
    ValueRange range = ValueRange::Unit;

    Image() = default;
    Image(int channels, int height, int width, ValueRange r = ValueRange::Unit)
        : t(1, channels, height, width), range(r) {}
    Image(Tensor tensor, ValueRange r) : t(std::move(tensor)), range(r) {
        if (t.n() != 1)
            throw std::invalid_argument("Image: tensor batch dim must be 1");
    }

    int channels() const { return t.c(); }
    int height() const { return t.h(); }
    int width() const { return t.w(); }

    float& at(int c, int y, int x) { return t.at(0, c, y, x); }
    float at(int c, int y, int x) const { return t.at(0, c, y, x); }
};

inline Image to_signed(const Image& img) {
    if (img.range == ValueRange::Signed) return img;
    Image out(img.channels(), img.height(), img.width(), ValueRange::Signed);
    const float* s = img.t.data();
    float* d = out.t.data();
    for (std::int64_t i = 0, n = img.t.numel(); i < n; ++i) d[i] = s[i] * 2.0f - 1.0f;
    return out;
}

inline Image to_unit(const Image& img) {
    if (img.range == ValueRange::Unit) return img;
    Image out(img.channels(), img.height(), img.width(), ValueRange::Unit);
    const float* s = img.t.data();
    float* d = out.t.data();
    for (std::int64_t i = 0, n = img.t.numel(); i < n; ++i) d[i] = (s[i] + 1.0f) * 0.5f;
    return out;
}

inline void clamp_to_range(Image& img) {
    const float lo = img.range == ValueRange::Unit ? 0.0f : -1.0f;
    float* p = img.t.data();
    for (std::int64_t i = 0, n = img.t.numel(); i < n; ++i)
        p[i] = std::clamp(p[i], lo, 1.0f);
}

/// Quantize a unit-range image to 8 bits (round half away from zero is not
/// needed; values are non-negative, so lround == round half up).
inline std::vector<std::uint8_t> quantize_u8(const Image& img) {
    const Image u = to_unit(img);
    std::vector<std::uint8_t> out(static_cast<size_t>(u.t.numel()));
    const float* p = u.t.data();
    for (size_t i = 0; i < out.size(); ++i) {
        const float v = std::clamp(p[i], 0.0f, 1.0f) * 255.0f;
        out[i] = static_cast<std::uint8_t>(v + 0.5f);
    }
    return out;
}

/// Reverse of quantize_u8 (channel-planar bytes).
inline Image dequantize_u8(const std::vector<std::uint8_t>& bytes, int c, int h, int w) {
    if (bytes.size() != static_cast<size_t>(c) * h * w)
        throw std::invalid_argument("dequantize_u8: byte count does not match shape");
    Image img(c, h, w, ValueRange::Unit);
    float* p = img.t.data();
    for (size_t i = 0; i < bytes.size(); ++i) p[i] = static_cast<float>(bytes[i]) / 255.0f;
    return img;
}

}  // namespace bsrdiff
