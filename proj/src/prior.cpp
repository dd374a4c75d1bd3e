#include "tomo/prior.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "ista.hpp"
#include "tomo/errors.hpp"
#include "tomo/projector.hpp"

namespace tomo {

void PriorParams::validate() const {
    if (lambda1 < 0.0) throw ConfigError("lambda1 must be non-negative");
    if (lambda2 < 0.0) throw ConfigError("lambda2 must be non-negative");
    if (outer_iters < 1) throw ConfigError("outer_iters must be at least 1");
    inner.validate();
}

EigenspacePrior build_eigenspace(const std::vector<Image>& templates) {
    const int L = (int)templates.size();
    if (L < 2) throw ConfigError("eigenspace needs at least 2 templates");
    for (const Image& t : templates)
        if (!t.same_shape(templates[0]))
            throw ConfigError("templates must share identical dimensions");

    const std::size_t n = templates[0].data.size();
    EigenspacePrior prior;
    prior.mean = Image(templates[0].width, templates[0].height);
    for (const Image& t : templates)
        for (std::size_t i = 0; i < n; ++i) prior.mean.data[i] += t.data[i];
    for (double& v : prior.mean.data) v /= L;

    // Centered templates as columns; PCA through the L x L Gram matrix.
    Eigen::MatrixXd centered(n, L);
    for (int j = 0; j < L; ++j)
        for (std::size_t i = 0; i < n; ++i)
            centered((Eigen::Index)i, j) = templates[j].data[i] - prior.mean.data[i];
    const Eigen::MatrixXd gram = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw SolverError("Gram eigendecomposition failed");

    const Eigen::VectorXd evals = solver.eigenvalues(); // ascending
    const double lambda_max = std::max(0.0, evals(L - 1));
    // Absolute floor guards the all-identical case, where every eigenvalue is
    // mean-subtraction rounding noise (~eps^2 * energy) and the largest one
    // would pass a purely relative cutoff.
    double energy = 0.0;
    for (const Image& t : templates) energy += dot(t.data, t.data);
    const double cutoff = std::max(1e-12 * lambda_max, 1e-24 * std::max(1.0, energy));
    for (int j = L - 1; j >= 0; --j) {
        const double s = evals(j);
        if (!(s > cutoff) || s <= 0.0) break;
        Eigen::VectorXd dir = centered * solver.eigenvectors().col(j) / std::sqrt(s);
        dir /= dir.norm();
        Image v(templates[0].width, templates[0].height);
        for (std::size_t i = 0; i < n; ++i) v.data[i] = dir((Eigen::Index)i);
        prior.eigvecs.push_back(std::move(v));
        prior.eigvals.push_back(s);
        if ((int)prior.eigvecs.size() == L - 1) break; // centering caps the rank
    }
    return prior;
}

std::pair<EigenCoeffs, Image> project_onto(const EigenspacePrior& prior, const Image& img) {
    if (!img.same_shape(prior.mean))
        throw ConfigError("image dimensions do not match the eigenspace");
    EigenCoeffs coeffs;
    coeffs.alpha.resize(prior.eigvecs.size());
    Image proj = prior.mean;
    for (std::size_t k = 0; k < prior.eigvecs.size(); ++k) {
        double a = 0.0;
        const Image& v = prior.eigvecs[k];
        for (std::size_t i = 0; i < img.data.size(); ++i)
            a += v.data[i] * (img.data[i] - prior.mean.data[i]);
        coeffs.alpha[k] = a;
        for (std::size_t i = 0; i < proj.data.size(); ++i) proj.data[i] += a * v.data[i];
    }
    return {std::move(coeffs), std::move(proj)};
}

namespace {

// alpha minimizing ||W (x - mean - V alpha)||^2; W == nullptr is the
// unweighted closed form V^T (x - mean).
std::vector<double> alpha_step(const EigenspacePrior& prior, const Image& x,
                               const WeightsMap* weights) {
    const std::size_t K = prior.eigvecs.size();
    std::vector<double> alpha(K, 0.0);
    if (K == 0) return alpha;
    if (!weights) {
        for (std::size_t k = 0; k < K; ++k) {
            double a = 0.0;
            const Image& v = prior.eigvecs[k];
            for (std::size_t i = 0; i < x.data.size(); ++i)
                a += v.data[i] * (x.data[i] - prior.mean.data[i]);
            alpha[k] = a;
        }
        return alpha;
    }
    Eigen::MatrixXd m((Eigen::Index)K, (Eigen::Index)K);
    Eigen::VectorXd b((Eigen::Index)K);
    for (std::size_t k = 0; k < K; ++k) {
        const Image& vk = prior.eigvecs[k];
        double bk = 0.0;
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            const double w2 = weights->data[i] * weights->data[i];
            bk += vk.data[i] * w2 * (x.data[i] - prior.mean.data[i]);
        }
        b((Eigen::Index)k) = bk;
        for (std::size_t l = k; l < K; ++l) {
            const Image& vl = prior.eigvecs[l];
            double mkl = 0.0;
            for (std::size_t i = 0; i < x.data.size(); ++i)
                mkl += vk.data[i] * weights->data[i] * weights->data[i] * vl.data[i];
            m((Eigen::Index)k, (Eigen::Index)l) = mkl;
            m((Eigen::Index)l, (Eigen::Index)k) = mkl;
        }
    }
    m.diagonal().array() += 1e-10;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("weighted alpha system is singular beyond the Tikhonov floor");
    const Eigen::VectorXd a = ldlt.solve(b);
    for (std::size_t k = 0; k < K; ++k) alpha[k] = a((Eigen::Index)k);
    return alpha;
}

Image subspace_point(const EigenspacePrior& prior, const std::vector<double>& alpha) {
    Image p = prior.mean;
    for (std::size_t k = 0; k < alpha.size(); ++k)
        for (std::size_t i = 0; i < p.data.size(); ++i)
            p.data[i] += alpha[k] * prior.eigvecs[k].data[i];
    return p;
}

double full_objective(const Image& x, const Sinogram& sino, const Image& p,
                      const WeightsMap* weights, BasisKind basis, double lambda1,
                      double lambda2) {
    const Sinogram fwd = forward_project(x, sino.geometry);
    double j = 0.0;
    for (std::size_t i = 0; i < fwd.data.size(); ++i) {
        const double d = fwd.data[i] - sino.data[i];
        j += d * d;
    }
    const CoeffVector theta = analyze(x, basis);
    for (double t : theta.data) j += lambda1 * std::abs(t);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        double d = x.data[i] - p.data[i];
        if (weights) d *= weights->data[i];
        j += lambda2 * d * d;
    }
    return j;
}

Image alternate(const Sinogram& sino, const EigenspacePrior& prior, BasisKind basis,
                const WeightsMap* weights, const PriorParams& params, SolveTrace* trace) {
    params.validate();
    const int width = prior.mean.width, height = prior.mean.height;
    sino.geometry.validate();
    sino.geometry.validate_coverage(width, height);
    if (weights) {
        if (weights->width != width || weights->height != height)
            throw ConfigError("weights dimensions do not match the eigenspace");
        weights->validate();
    }

    Image x = fbp(sino, width, height, FilterKind::RamLak);
    std::vector<double> alpha = project_onto(prior, x).first.alpha;

    if (trace) {
        trace->objective.clear();
        trace->objective.push_back(full_objective(x, sino, subspace_point(prior, alpha), weights,
                                                  basis, params.lambda1, params.lambda2));
        trace->iterations = 0;
    }

    IstaProblem problem;
    problem.sino = &sino;
    problem.width = width;
    problem.height = height;
    problem.basis = basis;
    problem.lambda2 = params.lambda2;
    problem.weights = nullptr;

    Image w_img;
    if (weights) {
        w_img = Image(width, height);
        std::copy(weights->data.begin(), weights->data.end(), w_img.data.begin());
        problem.weights = &w_img;
    }

    SolverParams inner = params.inner;
    inner.lambda1 = params.lambda1;

    for (int outer = 0; outer < params.outer_iters; ++outer) {
        const Image p = subspace_point(prior, alpha);
        problem.prior_mean = params.lambda2 > 0.0 ? &p : nullptr;
        x = ista_solve(problem, inner, nullptr, &x);
        alpha = alpha_step(prior, x, weights);
        if (trace) {
            trace->objective.push_back(full_objective(x, sino, subspace_point(prior, alpha),
                                                      weights, basis, params.lambda1,
                                                      params.lambda2));
            trace->iterations = outer + 1;
        }
    }
    return x;
}

} // namespace

EigenCoeffs weighted_coeffs(const EigenspacePrior& prior, const Image& img,
                            const WeightsMap& weights) {
    if (!img.same_shape(prior.mean))
        throw ConfigError("image dimensions do not match the eigenspace");
    if (weights.width != img.width || weights.height != img.height)
        throw ConfigError("weights dimensions do not match the image");
    weights.validate();
    EigenCoeffs coeffs;
    coeffs.alpha = alpha_step(prior, img, &weights);
    return coeffs;
}

Image reconstruct_unweighted(const Sinogram& sino, const EigenspacePrior& prior, BasisKind basis,
                             const PriorParams& params, SolveTrace* trace) {
    return alternate(sino, prior, basis, nullptr, params, trace);
}

Image reconstruct_weighted(const Sinogram& sino, const EigenspacePrior& prior, BasisKind basis,
                           const WeightsMap& weights, const PriorParams& params,
                           SolveTrace* trace) {
    return alternate(sino, prior, basis, &weights, params, trace);
}

} // namespace tomo
