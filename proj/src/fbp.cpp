#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "tomo/errors.hpp"
#include "tomo/parallel.hpp"
#include "tomo/recon.hpp"

namespace tomo {

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Ramp response taken as the DFT of the band-limited spatial kernel
// (1/(4d^2) at 0, -1/(pi n d)^2 at odd n) instead of raw |f| samples; the
// kernel form avoids the DC bias of interperiod interference. Apodization
// windows multiply on top.
std::vector<double> build_filter(std::size_t m, double bin_spacing, FilterKind kind) {
    std::vector<double> kernel(m, 0.0);
    const double inv_d2 = 1.0 / (bin_spacing * bin_spacing);
    kernel[0] = 0.25 * inv_d2;
    for (std::size_t n = 1; n <= m / 2; n += 2) {
        const double v = -inv_d2 / (M_PI * M_PI * (double)n * (double)n);
        kernel[n] = v;
        kernel[m - n] = v;
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> ramp;
    fft.fwd(ramp, kernel);

    std::vector<double> h(m);
    const double nyquist = 0.5 / bin_spacing;
    for (std::size_t k = 0; k < m; ++k) {
        const double cycles = (double)std::min(k, m - k) / ((double)m * bin_spacing);
        double w = 1.0;
        if (kind == FilterKind::SheppLogan) {
            const double u = 0.5 * M_PI * cycles / nyquist;
            w = u > 1e-12 ? std::sin(u) / u : 1.0;
        } else if (kind == FilterKind::Hann) {
            w = 0.5 * (1.0 + std::cos(M_PI * cycles / nyquist));
        }
        // bin_spacing converts the circular convolution into the integral over s
        h[k] = ramp[k].real() * bin_spacing * w;
    }
    return h;
}

} // namespace

Image fbp(const Sinogram& sino, int width, int height, FilterKind filter) {
    const Geometry& geom = sino.geometry;
    geom.validate();
    Image out(width, height);
    geom.validate_coverage(width, height);

    const int nb = geom.num_bins;
    const std::size_t m = next_pow2(2 * (std::size_t)nb);
    const std::vector<double> h = build_filter(m, geom.bin_spacing, filter);

    // Ramp-filter every view profile in the frequency domain.
    std::vector<double> filtered((std::size_t)geom.num_views * nb);
    const std::size_t view_chunks = std::min<std::size_t>(geom.num_views, 16);
    parallel_for_chunked(geom.num_views, view_chunks, [&](std::size_t lo, std::size_t hi) {
        Eigen::FFT<double> fft;
        std::vector<double> padded(m);
        std::vector<std::complex<double>> freq;
        std::vector<double> back;
        for (std::size_t v = lo; v < hi; ++v) {
            std::fill(padded.begin(), padded.end(), 0.0);
            for (int b = 0; b < nb; ++b) padded[b] = sino.at((int)v, b);
            fft.fwd(freq, padded);
            for (std::size_t k = 0; k < m; ++k) freq[k] *= h[k];
            fft.inv(back, freq);
            for (int b = 0; b < nb; ++b) filtered[v * nb + b] = back[b];
        }
    });

    // Pixel-driven backprojection of the filtered profiles.
    std::vector<double> cosines(geom.num_views), sines(geom.num_views);
    for (int v = 0; v < geom.num_views; ++v) {
        cosines[v] = std::cos(geom.angles[v]);
        sines[v] = std::sin(geom.angles[v]);
    }
    const double cx = 0.5 * (width - 1), cy = 0.5 * (height - 1);
    const double scale = M_PI / geom.num_views;
    parallel_for((std::size_t)height, [&](std::size_t y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int v = 0; v < geom.num_views; ++v) {
                const double s = (x - cx) * cosines[v] + (y - cy) * sines[v];
                const double b = s / geom.bin_spacing + 0.5 * (nb - 1);
                if (b < 0.0 || b > nb - 1) continue;
                if (nb == 1) {
                    acc += filtered[v];
                    continue;
                }
                const int b0 = std::min((int)b, nb - 2);
                const double f = b - b0;
                acc += (1.0 - f) * filtered[(std::size_t)v * nb + b0] +
                       f * filtered[(std::size_t)v * nb + b0 + 1];
            }
            out.at(x, (int)y) = acc * scale;
        }
    });
    return out;
}

} // namespace tomo
