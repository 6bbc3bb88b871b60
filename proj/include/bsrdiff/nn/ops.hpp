#pragma once

#include "bsrdiff/tensor.hpp"

namespace bsrdiff::nn {

// ---------------------------------------------------------------------------
// Raw convolution kernels (zero padding, floor output sizing). Weight layout
// (out_ch, in_ch, k, k). Single-sample variants operate on raw planes so the
// dynamic convolution can swap per-sample effective weights.
// ---------------------------------------------------------------------------

inline int conv_out_size(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

/// y (co, oh, ow) = conv(x (ci, h, w), wgt (co, ci, k, k)); y is overwritten.
void conv2d_forward_1(const float* x, int ci, int h, int w, const float* wgt, int co, int k,
                      int stride, int pad, float* y, int oh, int ow);

/// gx (ci, h, w) += transpose-conv(gy, wgt); gx must be zeroed by the caller.
void conv2d_bwd_input_1(const float* gy, int co, int oh, int ow, const float* wgt, int ci,
                        int k, int stride, int pad, float* gx, int h, int w);

/// gw (co, ci, k, k) += correlation(x, gy); accumulates.
void conv2d_bwd_weight_1(const float* x, int ci, int h, int w, const float* gy, int co,
                         int oh, int ow, int k, int stride, int pad, float* gw);

// Batch wrappers.
Tensor conv2d_forward(const Tensor& x, const Tensor& wgt, const float* bias, int stride,
                      int pad);
Tensor conv2d_backward_input(const Tensor& gy, const Tensor& wgt, Shape4 xshape, int stride,
                             int pad);
void conv2d_backward_weight(const Tensor& x, const Tensor& gy, int stride, int pad,
                            Tensor& gw_accum);

/// y[n][c] += bias[c]
void add_channel_bias(Tensor& y, const float* bias);
/// gbias[c] += sum over (n, h, w) of gy[n][c]
void channel_bias_grad(const Tensor& gy, float* gbias_accum);

// ---------------------------------------------------------------------------
// Elementwise activations
// ---------------------------------------------------------------------------

float mish_scalar(float x);
Tensor mish_forward(const Tensor& x);
/// gx = gy * mish'(x)
Tensor mish_backward(const Tensor& x, const Tensor& gy);

Tensor leaky_relu_forward(const Tensor& x, float slope);
Tensor leaky_relu_backward(const Tensor& x, float slope, const Tensor& gy);

// ---------------------------------------------------------------------------
// Shape plumbing
// ---------------------------------------------------------------------------

Tensor concat_channels(const Tensor& a, const Tensor& b);
/// Split a channel-concat gradient back into the two operands' shapes.
void split_channels(const Tensor& g, Tensor& ga, Tensor& gb);

/// (n, c*s*s, h, w) -> (n, c, h*s, w*s)
Tensor pixel_shuffle(const Tensor& x, int s);
Tensor pixel_shuffle_backward(const Tensor& gy, int s);

/// Bilinear interpolation (align-corners false). Forward only; used on
/// conditioning features from the frozen encoder, which need no gradient.
Tensor bilinear_resize(const Tensor& x, int oh, int ow);

}  // namespace bsrdiff::nn
