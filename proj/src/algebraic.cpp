#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "tomo/errors.hpp"
#include "tomo/projector.hpp"
#include "tomo/recon.hpp"

namespace tomo {

namespace {

constexpr double kDivergenceFactor = 1e6;
constexpr std::uint64_t kSweepSeed = 0x5eed0a11;

double relative_change(const Image& next, const Image& prev) {
    double dn = 0.0, pn = 0.0;
    for (std::size_t i = 0; i < next.data.size(); ++i) {
        const double d = next.data[i] - prev.data[i];
        dn += d * d;
        pn += prev.data[i] * prev.data[i];
    }
    return std::sqrt(dn) / std::max(std::sqrt(pn), 1e-12);
}

void check_divergence(const Image& x, double data_norm) {
    double n = 0.0;
    for (double v : x.data) n += v * v;
    if (std::sqrt(n) > kDivergenceFactor * std::max(data_norm, 1e-300))
        throw SolverError("algebraic solver diverged");
}

double residual_norm(const Image& x, const Sinogram& sino) {
    const Sinogram fwd = forward_project(x, sino.geometry);
    double acc = 0.0;
    for (std::size_t i = 0; i < fwd.data.size(); ++i) {
        const double d = fwd.data[i] - sino.data[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

struct AlgebraicSetup {
    const Geometry& geom;
    double data_norm;
};

AlgebraicSetup prepare(const Sinogram& sino, int width, int height, const SolverParams& params) {
    params.validate();
    sino.geometry.validate();
    sino.geometry.validate_coverage(width, height);
    double n = 0.0;
    for (double v : sino.data) n += v * v;
    return {sino.geometry, std::sqrt(n)};
}

} // namespace

Image art(const Sinogram& sino, int width, int height, const SolverParams& params,
          SolveTrace* trace) {
    const AlgebraicSetup setup = prepare(sino, width, height, params);
    const Geometry& geom = setup.geom;
    Image x(width, height);
    Image prev(width, height);

    // One seeded permutation, reused every sweep: mixes ray directions while
    // keeping each sweep the same linear update.
    const std::size_t num_rays = (std::size_t)geom.num_views * geom.num_bins;
    std::vector<std::size_t> order(num_rays);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(kSweepSeed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<double> scratch((std::size_t)width * height, 0.0);
    std::vector<int> touched;

    for (int sweep = 0; sweep < params.max_iters; ++sweep) {
        prev = x;
        for (std::size_t r : order) {
            const int view = (int)(r / geom.num_bins);
            const int bin = (int)(r % geom.num_bins);
            extract_ray_weights(geom, view, bin, width, height, scratch, touched);
            double dot = 0.0, norm2 = 0.0;
            for (int idx : touched) {
                dot += scratch[idx] * x.data[idx];
                norm2 += scratch[idx] * scratch[idx];
            }
            if (norm2 > 0.0) {
                const double step = params.relax * (sino.at(view, bin) - dot) / norm2;
                for (int idx : touched) x.data[idx] += step * scratch[idx];
            }
            for (int idx : touched) scratch[idx] = 0.0;
            touched.clear();
        }
        check_divergence(x, setup.data_norm);
        if (trace) {
            trace->objective.push_back(residual_norm(x, sino));
            trace->iterations = sweep + 1;
        }
        if (relative_change(x, prev) < params.tol) break;
    }
    return x;
}

Image sart(const Sinogram& sino, int width, int height, const SolverParams& params,
           SolveTrace* trace) {
    const AlgebraicSetup setup = prepare(sino, width, height, params);
    const Geometry& geom = setup.geom;
    Image x(width, height);
    Image prev(width, height);

    // Row sums = projection of an all-ones image; per-view column sums =
    // backprojection of all-ones bins restricted to that view.
    Image ones(width, height);
    std::fill(ones.data.begin(), ones.data.end(), 1.0);
    const Sinogram row_sums = forward_project(ones, geom);
    std::vector<Image> col_sums;
    col_sums.reserve(geom.num_views);
    std::vector<double> one_bins(geom.num_bins, 1.0);
    for (int v = 0; v < geom.num_views; ++v) {
        Image c(width, height);
        back_project_view(one_bins.data(), geom, v, c);
        col_sums.push_back(std::move(c));
    }

    std::vector<double> view_fwd(geom.num_bins);
    for (int sweep = 0; sweep < params.max_iters; ++sweep) {
        prev = x;
        for (int v = 0; v < geom.num_views; ++v) {
            forward_project_view(x, geom, v, view_fwd.data());
            for (int b = 0; b < geom.num_bins; ++b) {
                const double rs = row_sums.at(v, b);
                view_fwd[b] = rs > 0.0 ? (sino.at(v, b) - view_fwd[b]) / rs : 0.0;
            }
            Image update(width, height);
            back_project_view(view_fwd.data(), geom, v, update);
            const Image& cs = col_sums[v];
            for (std::size_t i = 0; i < x.data.size(); ++i)
                if (cs.data[i] > 0.0) x.data[i] += params.relax * update.data[i] / cs.data[i];
        }
        check_divergence(x, setup.data_norm);
        if (trace) {
            trace->objective.push_back(residual_norm(x, sino));
            trace->iterations = sweep + 1;
        }
        if (relative_change(x, prev) < params.tol) break;
    }
    return x;
}

Image sirt(const Sinogram& sino, int width, int height, const SolverParams& params,
           SolveTrace* trace) {
    const AlgebraicSetup setup = prepare(sino, width, height, params);
    const Geometry& geom = setup.geom;
    Image x(width, height);
    Image prev(width, height);

    Image ones(width, height);
    std::fill(ones.data.begin(), ones.data.end(), 1.0);
    const Sinogram row_sums = forward_project(ones, geom);
    Sinogram one_sino(geom);
    std::fill(one_sino.data.begin(), one_sino.data.end(), 1.0);
    const Image col_sums = back_project(one_sino, width, height);

    for (int sweep = 0; sweep < params.max_iters; ++sweep) {
        prev = x;
        Sinogram residual = forward_project(x, geom);
        for (std::size_t i = 0; i < residual.data.size(); ++i) {
            const double rs = row_sums.data[i];
            residual.data[i] = rs > 0.0 ? (sino.data[i] - residual.data[i]) / rs : 0.0;
        }
        const Image update = back_project(residual, width, height);
        for (std::size_t i = 0; i < x.data.size(); ++i)
            if (col_sums.data[i] > 0.0)
                x.data[i] += params.relax * update.data[i] / col_sums.data[i];
        check_divergence(x, setup.data_norm);
        if (trace) {
            trace->objective.push_back(residual_norm(x, sino));
            trace->iterations = sweep + 1;
        }
        if (relative_change(x, prev) < params.tol) break;
    }
    return x;
}

} // namespace tomo
