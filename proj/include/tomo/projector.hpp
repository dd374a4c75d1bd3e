#pragma once

#include <vector>

#include "tomo/core.hpp"

namespace tomo {

/// Discrete 2D parallel-beam projection operator.
///
/// Rays are sampled at equispaced points (step = half a pixel) and the image
/// is bilinearly interpolated at each sample; a sinogram entry is the sample
/// sum times the step. back_project applies the exact transpose of that
/// discretization, so <Ax, y> == <x, A^T y> up to floating-point rounding.
/// Pixels outside the inscribed circle are projected like any others, which
/// keeps the operator exactly linear.

/// Line-integral measurements of img under geom. Throws ConfigError if the
/// detector does not cover the image diagonal.
Sinogram forward_project(const Image& img, const Geometry& geom);

/// Adjoint of forward_project onto a width x height grid.
Image back_project(const Sinogram& sino, int width, int height);

/// Single-view slices of the operator, used by the view-batched solvers.
void forward_project_view(const Image& img, const Geometry& geom, int view,
                          double* out_bins);
void back_project_view(const double* view_bins, const Geometry& geom, int view,
                       Image& accum);

/// One operator row (a single ray) as per-pixel weights.
///
/// Writes the weights into the dense scratch buffer (size width*height, caller
/// keeps it zeroed between calls via the returned touched list) and appends
/// each touched pixel index exactly once.
void extract_ray_weights(const Geometry& geom, int view, int bin, int width, int height,
                         std::vector<double>& scratch, std::vector<int>& touched);

/// Sampling step along rays, in pixel units.
inline constexpr double kRayStep = 0.5;

} // namespace tomo
