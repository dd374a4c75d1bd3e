#pragma once

// Independent re-derivations used to cross-check the library. These are
// deliberately written from the operator definitions (not by calling library
// internals): dense matrix assembly from tent-function weights, explicit
// least-squares solves, and direct formula evaluation.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tomo/core.hpp"

namespace oracle {

// Dense projection matrix A (rows = num_views * num_bins, cols = w * h)
// for the sampled-ray discretization: samples every half pixel along
// p(t) = s (cos a, sin a) + t (-sin a, cos a), bilinear tent weights,
// row entries = sum over samples of tent(x - i) tent(y - j) * step.
inline std::vector<double> dense_forward_matrix(const tomo::Geometry& geom, int width,
                                                int height) {
    const double step = 0.5;
    const double half_span = 0.5 * std::hypot((double)width, (double)height) + 1.0;
    const int num_samples = (int)std::floor(2.0 * half_span / step) + 1;
    const double cx = 0.5 * (width - 1), cy = 0.5 * (height - 1);
    const std::size_t cols = (std::size_t)width * height;
    std::vector<double> a((std::size_t)geom.num_views * geom.num_bins * cols, 0.0);

    auto tent = [](double u) { return std::max(0.0, 1.0 - std::abs(u)); };

    for (int v = 0; v < geom.num_views; ++v) {
        const double ca = std::cos(geom.angles[v]), sa = std::sin(geom.angles[v]);
        for (int b = 0; b < geom.num_bins; ++b) {
            const double s = geom.bin_center(b);
            double* row = &a[((std::size_t)v * geom.num_bins + b) * cols];
            for (int m = 0; m < num_samples; ++m) {
                const double t = m * step - half_span;
                const double x = s * ca - t * sa + cx;
                const double y = s * sa + t * ca + cy;
                for (int j = 0; j < height; ++j)
                    for (int i = 0; i < width; ++i) {
                        const double w = tent(x - i) * tent(y - j);
                        if (w != 0.0) row[(std::size_t)j * width + i] += w * step;
                    }
            }
        }
    }
    return a;
}

inline std::vector<double> apply_dense(const std::vector<double>& a, std::size_t rows,
                                       std::size_t cols, const std::vector<double>& x) {
    std::vector<double> y(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) y[r] += a[r * cols + c] * x[c];
    return y;
}

inline std::vector<double> apply_dense_transpose(const std::vector<double>& a, std::size_t rows,
                                                 std::size_t cols, const std::vector<double>& y) {
    std::vector<double> x(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) x[c] += a[r * cols + c] * y[r];
    return x;
}

inline tomo::Image random_image(int w, int h, std::uint64_t seed, double lo = 0.0,
                                double hi = 1.0) {
    tomo::Image img(w, h);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (double& v : img.data) v = dist(rng);
    return img;
}

// Analytic chord length of a centered disk seen at detector offset s.
inline double disk_chord(double radius, double s) {
    const double d2 = radius * radius - s * s;
    return d2 > 0.0 ? 2.0 * std::sqrt(d2) : 0.0;
}

} // namespace oracle
