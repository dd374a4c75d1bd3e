#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tomo/core.hpp"
#include "tomo/transforms.hpp"

namespace tomo {

enum class MethodId { FBP, CS_DCT, CS_HAAR, ART, SART, SIRT };

const char* method_name(MethodId id);
MethodId parse_method(const std::string& name);

enum class FilterKind { RamLak, SheppLogan, Hann };

enum class StepRule { Fixed, Backtracking };

struct SolverParams {
    int max_iters = 300;      // CS default; algebraic solvers use 100 sweeps
    double tol = 1e-5;        // relative image change
    double relax = 1.0;       // ART/SART/SIRT relaxation, in (0, 2)
    double lambda1 = 1.0;     // L1 weight
    StepRule step_rule = StepRule::Backtracking;
    bool accelerate = false;  // FISTA momentum for the proximal solver

    void validate() const;
};

/// Per-iteration objective values, recorded by the iterative solvers.
struct SolveTrace {
    std::vector<double> objective;
    int iterations = 0;
};

/// Frequency-domain ramp-filtered backprojection, scaled by pi/num_views.
Image fbp(const Sinogram& sino, int width, int height, FilterKind filter = FilterKind::RamLak);

/// Kaczmarz row-action updates over a seeded pseudo-random ray permutation
/// (fixed across sweeps). Initial estimate is the zero image.
Image art(const Sinogram& sino, int width, int height, const SolverParams& params,
          SolveTrace* trace = nullptr);

/// View-batched simultaneous updates with row/column-sum normalization.
Image sart(const Sinogram& sino, int width, int height, const SolverParams& params,
           SolveTrace* trace = nullptr);

/// Fully simultaneous updates over all rays per iteration.
Image sirt(const Sinogram& sino, int width, int height, const SolverParams& params,
           SolveTrace* trace = nullptr);

/// Proximal-gradient (ISTA) minimization of ||Phi Psi theta - y||^2 +
/// lambda1 ||theta||_1 with step 1/L from lipschitz_estimate; backtracking
/// keeps the objective non-increasing. Returns x = Psi theta.
/// init, when given, seeds theta = Psi^T init instead of zero.
Image cs_reconstruct(const Sinogram& sino, int width, int height, BasisKind basis,
                     const SolverParams& params, SolveTrace* trace = nullptr,
                     const Image* init = nullptr);

/// Largest eigenvalue of Psi^T Phi^T Phi Psi via seeded power iteration
/// (at least 50 rounds). Cached per (geometry, basis, dims).
double lipschitz_estimate(const Geometry& geom, BasisKind basis, int width, int height);

/// Dispatch by MethodId with that method's conventional defaults; the pilot
/// engine of the weights module.
Image reconstruct_baseline(MethodId id, const Sinogram& sino, int width, int height,
                           const SolverParams& params);

} // namespace tomo
