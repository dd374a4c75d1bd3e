#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "ista.hpp"
#include "tomo/errors.hpp"
#include "tomo/projector.hpp"
#include "tomo/recon.hpp"

namespace tomo {

namespace {

constexpr std::uint64_t kPowerSeed = 0x9e3779b97f4a7c15ull;
constexpr int kPowerMinIters = 50;
constexpr int kPowerMaxIters = 2000;

std::string lipschitz_key(const Geometry& geom, BasisKind basis, int width, int height) {
    std::string key;
    key.reserve(32 + geom.angles.size() * 8);
    auto put = [&key](const void* p, std::size_t n) { key.append((const char*)p, n); };
    const int b = (int)basis;
    put(&b, sizeof b);
    put(&width, sizeof width);
    put(&height, sizeof height);
    put(&geom.num_bins, sizeof geom.num_bins);
    put(&geom.bin_spacing, sizeof geom.bin_spacing);
    put(geom.angles.data(), geom.angles.size() * sizeof(double));
    return key;
}

std::map<std::string, double>& lipschitz_cache() {
    static std::map<std::string, double> cache;
    return cache;
}

std::mutex& lipschitz_mutex() {
    static std::mutex m;
    return m;
}

double vec_norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

// theta -> Psi^T Phi^T Phi Psi theta
CoeffVector normal_op(const CoeffVector& theta, const Geometry& geom, int width, int height) {
    const Image x = synthesize(theta, width, height);
    const Sinogram fwd = forward_project(x, geom);
    const Image back = back_project(fwd, width, height);
    return analyze(back, theta.basis);
}

} // namespace

double lipschitz_estimate(const Geometry& geom, BasisKind basis, int width, int height) {
    geom.validate();
    geom.validate_coverage(width, height);
    const std::string key = lipschitz_key(geom, basis, width, height);
    {
        std::lock_guard<std::mutex> lock(lipschitz_mutex());
        auto it = lipschitz_cache().find(key);
        if (it != lipschitz_cache().end()) return it->second;
    }

    const auto [cw, ch] = coeff_dims(basis, width, height);
    CoeffVector v;
    v.basis = basis;
    v.coeff_width = cw;
    v.coeff_height = ch;
    v.data.resize((std::size_t)cw * ch);
    std::mt19937_64 rng(kPowerSeed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& e : v.data) e = gauss(rng);
    double norm = vec_norm(v.data);
    for (double& e : v.data) e /= norm;

    double lambda = 0.0;
    for (int it = 0; it < kPowerMaxIters; ++it) {
        CoeffVector u = normal_op(v, geom, width, height);
        const double next = vec_norm(u.data);
        if (next < 1e-300) throw SolverError("power iteration hit a zero operator");
        for (double& e : u.data) e /= next;
        v = std::move(u);
        if (it + 1 >= kPowerMinIters && std::abs(next - lambda) <= 1e-6 * next) {
            lambda = next;
            std::lock_guard<std::mutex> lock(lipschitz_mutex());
            lipschitz_cache().emplace(key, lambda);
            return lambda;
        }
        lambda = next;
    }
    throw SolverError("power iteration did not converge");
}

namespace {

double soft(double z, double tau) {
    if (z > tau) return z - tau;
    if (z < -tau) return z + tau;
    return 0.0;
}

struct Smooth {
    double value = 0.0;
    Sinogram fwd;
    Image x;
};

// f(theta) = ||Phi x - y||^2 + lambda2 ||W (x - m)||^2 with x = Psi theta.
Smooth eval_smooth(const CoeffVector& theta, const IstaProblem& p) {
    Smooth s{0.0, Sinogram(p.sino->geometry), Image(p.width, p.height)};
    s.x = synthesize(theta, p.width, p.height);
    s.fwd = forward_project(s.x, p.sino->geometry);
    for (std::size_t i = 0; i < s.fwd.data.size(); ++i) {
        const double d = s.fwd.data[i] - p.sino->data[i];
        s.value += d * d;
    }
    if (p.prior_mean) {
        for (std::size_t i = 0; i < s.x.data.size(); ++i) {
            double d = s.x.data[i] - p.prior_mean->data[i];
            if (p.weights) d *= p.weights->data[i];
            s.value += p.lambda2 * d * d;
        }
    }
    return s;
}

CoeffVector smooth_gradient(const Smooth& s, const IstaProblem& p) {
    Sinogram residual = s.fwd;
    for (std::size_t i = 0; i < residual.data.size(); ++i) residual.data[i] -= p.sino->data[i];
    Image grad_img = back_project(residual, p.width, p.height);
    for (double& v : grad_img.data) v *= 2.0;
    if (p.prior_mean) {
        for (std::size_t i = 0; i < grad_img.data.size(); ++i) {
            double d = s.x.data[i] - p.prior_mean->data[i];
            if (p.weights) d *= p.weights->data[i] * p.weights->data[i];
            grad_img.data[i] += 2.0 * p.lambda2 * d;
        }
    }
    return analyze(grad_img, p.basis);
}

double l1_norm(const CoeffVector& theta) {
    double acc = 0.0;
    for (double v : theta.data) acc += std::abs(v);
    return acc;
}

} // namespace

Image ista_solve(const IstaProblem& p, const SolverParams& params, SolveTrace* trace,
                 const Image* init) {
    params.validate();
    p.sino->geometry.validate();
    p.sino->geometry.validate_coverage(p.width, p.height);
    if (p.prior_mean && (p.prior_mean->width != p.width || p.prior_mean->height != p.height))
        throw ConfigError("prior mean dimensions do not match the reconstruction grid");
    if (p.weights && (p.weights->width != p.width || p.weights->height != p.height))
        throw ConfigError("weights dimensions do not match the reconstruction grid");
    if (p.lambda2 < 0.0) throw ConfigError("lambda2 must be non-negative");

    // Gradient Lipschitz constant: 2 (lambda_max(Psi^T Phi^T Phi Psi)
    // + lambda2 max W^2); Psi orthonormal.
    double lip = lipschitz_estimate(p.sino->geometry, p.basis, p.width, p.height);
    if (p.prior_mean) {
        double wmax = 1.0;
        if (p.weights) {
            wmax = 0.0;
            for (double w : p.weights->data) wmax = std::max(wmax, std::abs(w));
        }
        lip += p.lambda2 * wmax * wmax;
    }
    if (lip <= 0.0) throw SolverError("degenerate operator: zero Lipschitz estimate");

    CoeffVector theta = init ? analyze(*init, p.basis)
                             : [&] {
                                   const auto [cw, ch] = coeff_dims(p.basis, p.width, p.height);
                                   CoeffVector t;
                                   t.basis = p.basis;
                                   t.coeff_width = cw;
                                   t.coeff_height = ch;
                                   t.data.assign((std::size_t)cw * ch, 0.0);
                                   return t;
                               }();
    CoeffVector theta_prev = theta;

    Smooth cur = eval_smooth(theta, p);
    double objective = cur.value + params.lambda1 * l1_norm(theta);
    double step = 0.5 / lip;
    double momentum = 1.0;

    if (trace) {
        trace->objective.clear();
        trace->objective.push_back(objective);
        trace->iterations = 0;
    }

    for (int it = 0; it < params.max_iters; ++it) {
        // Momentum extrapolation (FISTA); restarted whenever it would
        // break monotonicity.
        CoeffVector base = theta;
        Smooth base_eval = cur;
        bool used_momentum = false;
        if (params.accelerate && it > 0) {
            const double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
            const double beta = (momentum - 1.0) / m_next;
            momentum = m_next;
            if (beta > 0.0) {
                used_momentum = true;
                base.data.resize(theta.data.size());
                for (std::size_t i = 0; i < theta.data.size(); ++i)
                    base.data[i] = theta.data[i] + beta * (theta.data[i] - theta_prev.data[i]);
                base_eval = eval_smooth(base, p);
            }
        }

        const CoeffVector grad = smooth_gradient(base_eval, p);

        CoeffVector next = base;
        Smooth next_eval;
        bool accepted = false;
        for (int halvings = 0; halvings < 60; ++halvings) {
            for (std::size_t i = 0; i < base.data.size(); ++i)
                next.data[i] = soft(base.data[i] - step * grad.data[i], step * params.lambda1);
            next_eval = eval_smooth(next, p);
            if (params.step_rule == StepRule::Fixed) {
                accepted = true;
                break;
            }
            double lin = 0.0, quad = 0.0;
            for (std::size_t i = 0; i < base.data.size(); ++i) {
                const double d = next.data[i] - base.data[i];
                lin += grad.data[i] * d;
                quad += d * d;
            }
            if (next_eval.value <= base_eval.value + lin + quad / (2.0 * step) + 1e-12) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) throw SolverError("backtracking line search failed");

        double next_objective = next_eval.value + params.lambda1 * l1_norm(next);
        if (used_momentum && next_objective > objective) {
            // Momentum overshot; fall back to a plain step from theta.
            momentum = 1.0;
            const CoeffVector g = smooth_gradient(cur, p);
            for (int halvings = 0; halvings < 60; ++halvings) {
                for (std::size_t i = 0; i < theta.data.size(); ++i)
                    next.data[i] = soft(theta.data[i] - step * g.data[i], step * params.lambda1);
                next_eval = eval_smooth(next, p);
                double lin = 0.0, quad = 0.0;
                for (std::size_t i = 0; i < theta.data.size(); ++i) {
                    const double d = next.data[i] - theta.data[i];
                    lin += g.data[i] * d;
                    quad += d * d;
                }
                if (params.step_rule == StepRule::Fixed ||
                    next_eval.value <= cur.value + lin + quad / (2.0 * step) + 1e-12)
                    break;
                step *= 0.5;
            }
            next_objective = next_eval.value + params.lambda1 * l1_norm(next);
        }

        double dn = 0.0, tn = 0.0;
        for (std::size_t i = 0; i < theta.data.size(); ++i) {
            const double d = next.data[i] - theta.data[i];
            dn += d * d;
            tn += theta.data[i] * theta.data[i];
        }
        theta_prev = std::move(theta);
        theta = std::move(next);
        cur = std::move(next_eval);
        objective = next_objective;
        if (trace) {
            trace->objective.push_back(objective);
            trace->iterations = it + 1;
        }
        if (std::sqrt(dn) / std::max(std::sqrt(tn), 1e-12) < params.tol) break;
    }
    return cur.x;
}

Image cs_reconstruct(const Sinogram& sino, int width, int height, BasisKind basis,
                     const SolverParams& params, SolveTrace* trace, const Image* init) {
    IstaProblem p;
    p.sino = &sino;
    p.width = width;
    p.height = height;
    p.basis = basis;
    return ista_solve(p, params, trace, init);
}

} // namespace tomo
