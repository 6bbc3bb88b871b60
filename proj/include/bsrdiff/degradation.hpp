#pragma once

#include <utility>

#include "bsrdiff/image.hpp"
#include "bsrdiff/kernelgen.hpp"

namespace bsrdiff {

enum class Boundary { Reflect };

/// Per-channel 2-D convolution with reflect-101 padding (edge pixel not
/// repeated). True convolution with the kernel anchored at index size/2,
/// so a delta kernel at that index is the identity.
Image convolve2d(const Image& img, const Kernel& k, Boundary boundary = Boundary::Reflect);

/// s-strided decimation keeping pixels at indices {0, s, 2s, ...}.
/// Dimensions must be divisible by s.
Image downsample(const Image& img, int s);

/// Eq.-style degradation: lr = downsample(convolve2d(hr, render(p)), s).
/// The rendered kernel is returned alongside for supervision.
std::pair<Image, Kernel> degrade(const Image& hr, const KernelParams& p, int s,
                                 int kernel_size = kDefaultKernelSize);

/// Separable bicubic interpolation (Catmull-Rom, a = -0.5) to an explicit
/// target size; output clamped to the image's declared range.
Image bicubic_resize_to(const Image& img, int out_h, int out_w);

/// Factor form; target dimensions must be integral (within 1e-9).
Image bicubic_resize(const Image& img, double factor);

/// 10 log10(R^2 / MSE) with both images mapped to [0,1] first; full frame,
/// all channels, no border crop. Identical images return +infinity.
double psnr(const Image& a, const Image& b);

}  // namespace bsrdiff
