#pragma once

#include "tomo/core.hpp"

namespace tomo {

/// Mean local structural similarity over sliding Gaussian-weighted windows
/// (sigma 1.5, window fully inside the image). dynamic_range sets the
/// stabilizing constants C1 = (0.01 R)^2 and C2 = (0.03 R)^2.
double ssim(const Image& a, const Image& b, int window, double dynamic_range);

/// SSIM restricted to windows fully contained in the region of interest.
double ssim_roi(const Image& a, const Image& b, const RoI& roi, int window, double dynamic_range);

double rmse(const Image& a, const Image& b);

/// Peak signal-to-noise ratio; identical images give +infinity.
double psnr(const Image& a, const Image& b, double peak);

struct Metrics {
    double ssim_global = 0.0;
    double ssim_roi = 0.0;
    double rmse = 0.0;
    double psnr = 0.0;
};

/// Standard evaluation of a reconstruction against ground truth. SSIM uses
/// the truth's dynamic range; psnr uses the truth's max value. roi == nullptr
/// reports ssim_roi = ssim_global.
Metrics evaluate_pair(const Image& truth, const Image& recon, const RoI* roi, int window = 11);

/// Dynamic range (max - min) of a reference image, the conventional choice
/// for the ssim dynamic_range argument.
double dynamic_range(const Image& reference);

} // namespace tomo
