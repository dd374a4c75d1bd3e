#pragma once

#include <utility>
#include <vector>

#include "tomo/core.hpp"

namespace tomo {

/// Orthonormal sparsifying bases for the compressed-sensing term.
enum class BasisKind { DCT2, HAAR2 };

/// Coefficients theta of an image in a given basis. For HAAR2 the coefficient
/// domain is the image symmetrically zero-padded to the next power-of-two
/// square; the padding is part of the operator, so analyze/synthesize stay an
/// exact orthonormal pair on that domain.
struct CoeffVector {
    BasisKind basis = BasisKind::DCT2;
    int coeff_width = 0;
    int coeff_height = 0;
    std::vector<double> data;

    std::size_t size() const { return data.size(); }
};

/// Coefficient-domain dimensions for an image of the given size.
std::pair<int, int> coeff_dims(BasisKind basis, int width, int height);

/// theta = Psi^T x. Norm-preserving: ||theta||_2 == ||x||_2.
CoeffVector analyze(const Image& img, BasisKind basis);

/// x = Psi theta. Exact inverse of analyze on its range.
/// Throws ConfigError when the coefficient dimensions do not match the target.
Image synthesize(const CoeffVector& coeffs, int width, int height);

const char* basis_name(BasisKind basis);

} // namespace tomo
