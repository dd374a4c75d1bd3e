#include "tomo/transforms.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <string>

namespace tomo {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Orthonormal DCT-II matrix: D(k,n) = s_k * cos(pi*(2n+1)*k / (2N)).
const RowMatrix& dct_matrix(int n) {
    thread_local std::map<int, RowMatrix> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    RowMatrix d(n, n);
    const double pi = std::acos(-1.0);
    double s0 = std::sqrt(1.0 / n);
    double sk = std::sqrt(2.0 / n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            d(k, j) = (k == 0 ? s0 : sk) * std::cos(pi * (2 * j + 1) * k / (2.0 * n));
    return cache.emplace(n, std::move(d)).first->second;
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

// In-place full-depth orthonormal 2D Haar analysis on an n x n buffer.
void haar_forward(std::vector<double>& buf, int n) {
    std::vector<double> tmp(n);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int size = n; size > 1; size /= 2) {
        int half = size / 2;
        for (int y = 0; y < size; ++y) { // rows
            double* row = &buf[static_cast<std::size_t>(y) * n];
            for (int i = 0; i < half; ++i) {
                tmp[i] = (row[2 * i] + row[2 * i + 1]) * inv_sqrt2;
                tmp[half + i] = (row[2 * i] - row[2 * i + 1]) * inv_sqrt2;
            }
            for (int i = 0; i < size; ++i) row[i] = tmp[i];
        }
        for (int x = 0; x < size; ++x) { // columns
            for (int i = 0; i < half; ++i) {
                double a = buf[static_cast<std::size_t>(2 * i) * n + x];
                double b = buf[static_cast<std::size_t>(2 * i + 1) * n + x];
                tmp[i] = (a + b) * inv_sqrt2;
                tmp[half + i] = (a - b) * inv_sqrt2;
            }
            for (int i = 0; i < size; ++i) buf[static_cast<std::size_t>(i) * n + x] = tmp[i];
        }
    }
}

void haar_inverse(std::vector<double>& buf, int n) {
    std::vector<double> tmp(n);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int size = 2; size <= n; size *= 2) {
        int half = size / 2;
        for (int x = 0; x < size; ++x) { // columns first (reverse of forward)
            for (int i = 0; i < half; ++i) {
                double a = buf[static_cast<std::size_t>(i) * n + x];
                double d = buf[static_cast<std::size_t>(half + i) * n + x];
                tmp[2 * i] = (a + d) * inv_sqrt2;
                tmp[2 * i + 1] = (a - d) * inv_sqrt2;
            }
            for (int i = 0; i < size; ++i) buf[static_cast<std::size_t>(i) * n + x] = tmp[i];
        }
        for (int y = 0; y < size; ++y) { // rows
            double* row = &buf[static_cast<std::size_t>(y) * n];
            for (int i = 0; i < half; ++i) {
                double a = row[i];
                double d = row[half + i];
                tmp[2 * i] = (a + d) * inv_sqrt2;
                tmp[2 * i + 1] = (a - d) * inv_sqrt2;
            }
            for (int i = 0; i < size; ++i) row[i] = tmp[i];
        }
    }
}

} // namespace

std::pair<int, int> coeff_dims(BasisKind basis, int width, int height) {
    if (basis == BasisKind::DCT2) return {width, height};
    int p = next_pow2(std::max(width, height));
    return {p, p};
}

CoeffVector analyze(const Image& img, BasisKind basis) {
    CoeffVector out;
    out.basis = basis;
    auto [cw, ch] = coeff_dims(basis, img.width, img.height);
    out.coeff_width = cw;
    out.coeff_height = ch;

    if (basis == BasisKind::DCT2) {
        Eigen::Map<const RowMatrix> x(img.data.data(), img.height, img.width);
        RowMatrix theta = dct_matrix(img.height) * x * dct_matrix(img.width).transpose();
        out.data.assign(theta.data(), theta.data() + theta.size());
        return out;
    }

    out.data.assign(static_cast<std::size_t>(cw) * ch, 0.0);
    int ox = (cw - img.width) / 2;
    int oy = (ch - img.height) / 2;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.data[static_cast<std::size_t>(y + oy) * cw + (x + ox)] = img.at(x, y);
    haar_forward(out.data, cw);
    return out;
}

Image synthesize(const CoeffVector& coeffs, int width, int height) {
    auto [cw, ch] = coeff_dims(coeffs.basis, width, height);
    if (coeffs.coeff_width != cw || coeffs.coeff_height != ch ||
        coeffs.data.size() != static_cast<std::size_t>(cw) * ch)
        throw ConfigError("coefficient dimensions " + std::to_string(coeffs.coeff_width) + "x" +
                          std::to_string(coeffs.coeff_height) + " incompatible with image " +
                          std::to_string(width) + "x" + std::to_string(height));

    if (coeffs.basis == BasisKind::DCT2) {
        Eigen::Map<const RowMatrix> theta(coeffs.data.data(), height, width);
        RowMatrix x = dct_matrix(height).transpose() * theta * dct_matrix(width);
        Image img(width, height);
        std::copy(x.data(), x.data() + x.size(), img.data.begin());
        return img;
    }

    std::vector<double> buf = coeffs.data;
    haar_inverse(buf, cw);
    Image img(width, height);
    int ox = (cw - width) / 2;
    int oy = (ch - height) / 2;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            img.at(x, y) = buf[static_cast<std::size_t>(y + oy) * cw + (x + ox)];
    return img;
}

const char* basis_name(BasisKind basis) {
    return basis == BasisKind::DCT2 ? "dct" : "haar";
}

} // namespace tomo
