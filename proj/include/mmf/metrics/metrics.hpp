#pragma once

#include "mmf/imgio/image.hpp"

namespace mmf::metrics {

using imgio::ImageTensor;

enum class MaeScale { unit, byte };

// Pixel-error metrics operate on all channels.
double psnr(const ImageTensor& a, const ImageTensor& b);
double mae(const ImageTensor& a, const ImageTensor& b, MaeScale scale = MaeScale::byte);

// Sum over channels and pixels of the forward-difference gradient magnitude
// (differences past the last row/column are zero).
double total_variation(const ImageTensor& img);

// TV(a) / (TV(b) + eps); a is the source, b the output. 1 when both TVs are
// below eps.
double tv_ratio(const ImageTensor& a, const ImageTensor& b);

// Structural metrics convert to grayscale internally.
double ssim(const ImageTensor& a, const ImageTensor& b);
// Per-pixel SSIM index (unclamped), grayscale, same spatial size as inputs.
ImageTensor ssim_index_map(const ImageTensor& a, const ImageTensor& b);

// Number of MS-SSIM scales usable for an image of the given size (<= 5).
int ms_ssim_scales(int height, int width);
double ms_ssim(const ImageTensor& a, const ImageTensor& b);

ImageTensor gms_map(const ImageTensor& a, const ImageTensor& b);
double gmsd(const ImageTensor& a, const ImageTensor& b);

double nlpd(const ImageTensor& a, const ImageTensor& b);

// Reference-first: a is the reference image.
double vif_spatial(const ImageTensor& a, const ImageTensor& b);

// Phase congruency map of a grayscale image (values in [0,1]).
ImageTensor phase_congruency(const ImageTensor& gray);
double fsim(const ImageTensor& a, const ImageTensor& b);

// SDSP saliency (frequency, colour and centre priors) of an RGB image on the
// byte scale, rescaled to [0,1].
ImageTensor sdsp_saliency(const ImageTensor& rgb255);
double vsi(const ImageTensor& a, const ImageTensor& b);

}  // namespace mmf::metrics
