#pragma once

#include "tomo/core.hpp"
#include "tomo/recon.hpp"
#include "tomo/transforms.hpp"

namespace tomo {

/// Shared proximal-gradient engine for
///   min_theta ||Phi Psi theta - y||^2 + lambda1 ||theta||_1
///             + lambda2 ||W (Psi theta - prior_mean)||^2
/// prior_mean == nullptr drops the quadratic prior term; weights == nullptr
/// means W = identity. Returns x = Psi theta.
struct IstaProblem {
    const Sinogram* sino = nullptr;
    int width = 0;
    int height = 0;
    BasisKind basis = BasisKind::DCT2;
    double lambda2 = 0.0;
    const Image* prior_mean = nullptr;
    const Image* weights = nullptr;
};

Image ista_solve(const IstaProblem& problem, const SolverParams& params, SolveTrace* trace,
                 const Image* init);

} // namespace tomo
