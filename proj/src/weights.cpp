#include "tomo/weights.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tomo/errors.hpp"
#include "tomo/projector.hpp"

namespace tomo {

void WeightsParams::validate() const {
    if (methods.empty()) throw ConfigError("weights need at least one pilot method");
    if (k < 0.0) throw ConfigError("weights sensitivity k must be non-negative");
    pilot.validate();
}

Sinogram simulate_template_measurements(const Image& tmpl, const Geometry& geom) {
    return forward_project(tmpl, geom);
}

Image difference_map(const Image& test_pilot, const EigenspacePrior& prior_low) {
    const Image proj = project_onto(prior_low, test_pilot).second;
    Image d(test_pilot.width, test_pilot.height);
    for (std::size_t i = 0; i < d.data.size(); ++i)
        d.data[i] = std::abs(test_pilot.data[i] - proj.data[i]);
    return d;
}

WeightsMap weights_from_difference(const Image& d, double k) {
    if (k < 0.0) throw ConfigError("weights sensitivity k must be non-negative");
    WeightsMap w(d.width, d.height);
    for (std::size_t i = 0; i < d.data.size(); ++i) {
        if (d.data[i] < 0.0) throw ConfigError("difference map has a negative entry");
        w.data[i] = 1.0 / (1.0 + k * d.data[i]);
    }
    return w;
}

Image median_filter_3x3(const Image& img) {
    Image out(img.width, img.height);
    double window[9];
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (xx >= 0 && xx < img.width && yy >= 0 && yy < img.height)
                        window[n++] = img.at(xx, yy);
                }
            std::sort(window, window + n);
            out.at(x, y) = n % 2 ? window[n / 2] : 0.5 * (window[n / 2 - 1] + window[n / 2]);
        }
    return out;
}

namespace {

// Common-scale normalization before differencing: divide by the pilot's own
// 99th-percentile intensity (nearest-rank); skipped for near-flat images.
void normalize_pilot(Image& img) {
    std::vector<double> sorted = img.data;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t idx =
        std::min(sorted.size() - 1, (std::size_t)std::ceil(0.99 * sorted.size()) - 1);
    const double p99 = sorted[idx];
    if (p99 > 1e-12)
        for (double& v : img.data) v /= p99;
}

WeightsDetail run_weights(const Sinogram& test_sino, const std::vector<Image>& templates,
                          int width, int height, const WeightsParams& params) {
    params.validate();
    if (templates.size() < 2) throw ConfigError("weights need at least 2 templates");
    for (const Image& t : templates)
        if (t.width != width || t.height != height)
            throw ConfigError("template dimensions do not match the reconstruction grid");
    const Geometry& geom = test_sino.geometry;
    geom.validate();
    geom.validate_coverage(width, height);

    WeightsDetail detail;
    detail.methods = params.methods;
    for (MethodId method : params.methods) {
        Image test_pilot(width, height);
        try {
            test_pilot = reconstruct_baseline(method, test_sino, width, height, params.pilot);
        } catch (const SolverError& e) {
            throw SolverError(std::string("pilot method ") + method_name(method) +
                              ", test scan: " + e.what());
        }
        normalize_pilot(test_pilot);

        std::vector<Image> low_templates;
        low_templates.reserve(templates.size());
        for (std::size_t i = 0; i < templates.size(); ++i) {
            try {
                const Sinogram sim = simulate_template_measurements(templates[i], geom);
                Image pilot = reconstruct_baseline(method, sim, width, height, params.pilot);
                normalize_pilot(pilot);
                low_templates.push_back(std::move(pilot));
            } catch (const SolverError& e) {
                throw SolverError(std::string("pilot method ") + method_name(method) +
                                  ", template " + std::to_string(i) + ": " + e.what());
            }
        }
        const EigenspacePrior prior_low = build_eigenspace(low_templates);
        detail.per_method_diffs.push_back(difference_map(test_pilot, prior_low));
        detail.test_pilots.push_back(std::move(test_pilot));
    }

    detail.combined_diff = detail.per_method_diffs[0];
    for (std::size_t j = 1; j < detail.per_method_diffs.size(); ++j)
        for (std::size_t i = 0; i < detail.combined_diff.data.size(); ++i)
            detail.combined_diff.data[i] =
                std::min(detail.combined_diff.data[i], detail.per_method_diffs[j].data[i]);
    if (params.median_filter) detail.combined_diff = median_filter_3x3(detail.combined_diff);

    detail.map = weights_from_difference(detail.combined_diff, params.k);
    return detail;
}

} // namespace

WeightsMap compute_weights(const Sinogram& test_sino, const std::vector<Image>& templates,
                           int width, int height, const WeightsParams& params) {
    return run_weights(test_sino, templates, width, height, params).map;
}

WeightsDetail compute_weights_detailed(const Sinogram& test_sino,
                                       const std::vector<Image>& templates, int width, int height,
                                       const WeightsParams& params) {
    return run_weights(test_sino, templates, width, height, params);
}

} // namespace tomo
