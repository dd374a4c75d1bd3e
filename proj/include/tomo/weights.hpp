#pragma once

#include <vector>

#include "tomo/core.hpp"
#include "tomo/prior.hpp"
#include "tomo/recon.hpp"

namespace tomo {

struct WeightsParams {
    double k = 50.0; // sensitivity of the 1/(1 + k d) mapping
    std::vector<MethodId> methods = {MethodId::FBP, MethodId::CS_DCT};
    SolverParams pilot;       // settings for the iterative pilot engines
    bool median_filter = false; // optional 3x3 smoothing of the combined map

    void validate() const;
};

/// Measurements a template would have produced under the test's geometry.
Sinogram simulate_template_measurements(const Image& tmpl, const Geometry& geom);

/// |pilot - projection of pilot onto the low-quality eigenspace|, pixelwise.
Image difference_map(const Image& test_pilot, const EigenspacePrior& prior_low);

/// Eq-style mapping d -> 1/(1 + k d); d must be non-negative.
WeightsMap weights_from_difference(const Image& d, double k);

/// Replaces each pixel by the median of its 3x3 neighborhood (edge pixels
/// use the in-bounds part).
Image median_filter_3x3(const Image& img);

/// Full multi-method procedure: for every method, pilot-reconstruct the test
/// and all templates from simulated measurements under the identical
/// geometry, build that method's low-quality eigenspace, take the
/// pilot-vs-projection difference, combine with a pixelwise min across
/// methods, and map through 1/(1 + k d). Pilots are intensity-normalized by
/// their 99th percentile before differencing.
WeightsMap compute_weights(const Sinogram& test_sino, const std::vector<Image>& templates,
                           int width, int height, const WeightsParams& params);

/// Same computation with the intermediate products kept for inspection.
struct WeightsDetail {
    std::vector<MethodId> methods;
    std::vector<Image> test_pilots;      // one per method, normalized
    std::vector<Image> per_method_diffs; // |X^j - P^j|
    Image combined_diff;                 // pixelwise min over methods
    WeightsMap map;
};

WeightsDetail compute_weights_detailed(const Sinogram& test_sino,
                                       const std::vector<Image>& templates, int width, int height,
                                       const WeightsParams& params);

} // namespace tomo
