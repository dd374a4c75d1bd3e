#include "tomo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tomo/errors.hpp"

namespace tomo {

namespace {

std::vector<double> gaussian_window(int window) {
    const double sigma = 1.5;
    const double c = 0.5 * (window - 1);
    std::vector<double> w(window * window);
    double sum = 0.0;
    for (int y = 0; y < window; ++y)
        for (int x = 0; x < window; ++x) {
            const double d2 = (x - c) * (x - c) + (y - c) * (y - c);
            w[y * window + x] = std::exp(-d2 / (2.0 * sigma * sigma));
            sum += w[y * window + x];
        }
    for (double& v : w) v /= sum;
    return w;
}

// Mean SSIM over all windows whose footprint stays inside the inclusive
// pixel region [x0, x1] x [y0, y1].
double ssim_region(const Image& a, const Image& b, int x0, int y0, int x1, int y1, int window,
                   double dynamic_range) {
    if (!a.same_shape(b)) throw ConfigError("ssim requires images of identical dimensions");
    if (window < 3 || window % 2 == 0) throw ConfigError("ssim window must be odd and at least 3");
    if (x1 - x0 + 1 < window || y1 - y0 + 1 < window)
        throw ConfigError("ssim window does not fit inside the evaluation region");
    if (dynamic_range <= 0.0) throw ConfigError("ssim dynamic range must be positive");

    const double c1 = std::pow(0.01 * dynamic_range, 2);
    const double c2 = std::pow(0.03 * dynamic_range, 2);
    const std::vector<double> w = gaussian_window(window);

    double total = 0.0;
    std::size_t count = 0;
    for (int ty = y0; ty + window - 1 <= y1; ++ty) {
        for (int tx = x0; tx + window - 1 <= x1; ++tx) {
            double mu_a = 0, mu_b = 0;
            for (int j = 0; j < window; ++j)
                for (int i = 0; i < window; ++i) {
                    const double wij = w[j * window + i];
                    mu_a += wij * a.at(tx + i, ty + j);
                    mu_b += wij * b.at(tx + i, ty + j);
                }
            double var_a = 0, var_b = 0, cov = 0;
            for (int j = 0; j < window; ++j)
                for (int i = 0; i < window; ++i) {
                    const double wij = w[j * window + i];
                    const double da = a.at(tx + i, ty + j) - mu_a;
                    const double db = b.at(tx + i, ty + j) - mu_b;
                    var_a += wij * da * da;
                    var_b += wij * db * db;
                    cov += wij * da * db;
                }
            const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
            ++count;
        }
    }
    return total / (double)count;
}

} // namespace

double ssim(const Image& a, const Image& b, int window, double dynamic_range) {
    return ssim_region(a, b, 0, 0, a.width - 1, a.height - 1, window, dynamic_range);
}

double ssim_roi(const Image& a, const Image& b, const RoI& roi, int window, double dynamic_range) {
    if (!a.same_shape(b)) throw ConfigError("ssim requires images of identical dimensions");
    if (roi.x0 < 0 || roi.y0 < 0 || roi.x1 >= a.width || roi.y1 >= a.height || roi.x1 < roi.x0 ||
        roi.y1 < roi.y0)
        throw BoundsError("region of interest extends outside the image");
    return ssim_region(a, b, roi.x0, roi.y0, roi.x1, roi.y1, window, dynamic_range);
}

double rmse(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw ConfigError("rmse requires images of identical dimensions");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        acc += d * d;
    }
    return std::sqrt(acc / (double)a.data.size());
}

double psnr(const Image& a, const Image& b, double peak) {
    if (peak <= 0.0) throw ConfigError("psnr peak must be positive");
    const double r = rmse(a, b);
    if (r == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(peak / r);
}

double dynamic_range(const Image& reference) {
    const auto [lo, hi] = std::minmax_element(reference.data.begin(), reference.data.end());
    return *hi - *lo;
}

Metrics evaluate_pair(const Image& truth, const Image& recon, const RoI* roi, int window) {
    Metrics m;
    const double range = dynamic_range(truth);
    m.ssim_global = ssim(truth, recon, window, range);
    m.ssim_roi = roi ? ssim_roi(truth, recon, *roi, window, range) : m.ssim_global;
    m.rmse = rmse(truth, recon);
    const double peak = *std::max_element(truth.data.begin(), truth.data.end());
    m.psnr = psnr(truth, recon, peak);
    return m;
}

} // namespace tomo
