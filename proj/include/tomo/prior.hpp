#pragma once

#include <utility>
#include <vector>

#include "tomo/core.hpp"
#include "tomo/recon.hpp"
#include "tomo/transforms.hpp"

namespace tomo {

/// Affine eigenspace spanned by the templates: mean image plus up to L-1
/// orthonormal principal directions of the centered template set, built from
/// the L x L Gram matrix. Directions with eigenvalue below 1e-12 x the
/// largest are dropped.
struct EigenspacePrior {
    Image mean;
    std::vector<Image> eigvecs;  // pairwise orthonormal, unit L2 norm
    std::vector<double> eigvals; // non-increasing, eigenvalues of the Gram matrix

    int count() const { return (int)eigvecs.size(); }
};

struct EigenCoeffs {
    std::vector<double> alpha;
};

struct PriorParams {
    double lambda1 = 1.0;
    double lambda2 = 0.5;
    int outer_iters = 5;
    SolverParams inner; // proximal-gradient settings for the theta step

    PriorParams() { inner.max_iters = 100; }
    void validate() const;
};

EigenspacePrior build_eigenspace(const std::vector<Image>& templates);

/// alpha_k = <V_k, img - mean>; second return is the nearest point of the
/// affine subspace, mean + sum_k V_k alpha_k.
std::pair<EigenCoeffs, Image> project_onto(const EigenspacePrior& prior, const Image& img);

/// Minimizer of ||W (img - mean - V alpha)||_2 over alpha: solves the weighted
/// normal equations (V^T W^2 V) alpha = V^T W^2 (img - mean) with a 1e-10
/// Tikhonov floor. With W == 1 this reduces to project_onto's coefficients.
EigenCoeffs weighted_coeffs(const EigenspacePrior& prior, const Image& img,
                            const WeightsMap& weights);

/// Alternating minimization of
///   ||Phi Psi theta - y||^2 + lambda1 ||theta||_1
///   + lambda2 ||Psi theta - (mean + V alpha)||^2
/// theta step by proximal gradient, alpha step by the closed form
/// alpha = V^T (Psi theta - mean). Initialized from an FBP pilot. The
/// objective after each alternation is non-increasing; trace records it.
Image reconstruct_unweighted(const Sinogram& sino, const EigenspacePrior& prior, BasisKind basis,
                             const PriorParams& params, SolveTrace* trace = nullptr);

/// Same alternation with the prior term ||W (Psi theta - (mean + V alpha))||^2;
/// the alpha step solves the weighted normal equations
/// (V^T W^2 V) alpha = V^T W^2 (Psi theta - mean) with a 1e-10 Tikhonov floor.
Image reconstruct_weighted(const Sinogram& sino, const EigenspacePrior& prior, BasisKind basis,
                           const WeightsMap& weights, const PriorParams& params,
                           SolveTrace* trace = nullptr);

} // namespace tomo
