#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "tomo/core.hpp"
#include "tomo/metrics.hpp"
#include "tomo/phantoms.hpp"
#include "tomo/prior.hpp"
#include "tomo/projector.hpp"
#include "tomo/recon.hpp"

using namespace tomo;

namespace {

std::vector<Image> random_templates(int count, int w, int h, std::uint64_t seed) {
    std::vector<Image> out;
    for (int i = 0; i < count; ++i) out.push_back(oracle::random_image(w, h, seed + i, 0.0, 1.0));
    return out;
}

double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

// templates drawn from an evolving scenario, similar but not identical
std::vector<Image> scenario_templates(int size, int scans, std::uint64_t seed) {
    PhantomScenario sc = make_defect_scenario(size, scans, seed);
    return generate_longitudinal(sc);
}

} // namespace

TEST_CASE("build_eigenspace validation") {
    CHECK_THROWS_AS(build_eigenspace({}), ConfigError);
    CHECK_THROWS_AS(build_eigenspace({Image(8, 8, 1.0)}), ConfigError);
    CHECK_THROWS_AS(build_eigenspace({Image(8, 8, 1.0), Image(8, 9, 1.0)}), ConfigError);
}

TEST_CASE("identical templates give a zero-variance eigenspace") {
    Image t = oracle::random_image(8, 8, 1);
    EigenspacePrior prior = build_eigenspace({t, t, t});
    CHECK(prior.count() == 0);
    CHECK(max_abs_diff(prior.mean, t) <= 1e-12);
}

TEST_CASE("two templates give one direction along their difference") {
    Image t1 = oracle::random_image(8, 8, 2);
    Image t2 = oracle::random_image(8, 8, 3);
    EigenspacePrior prior = build_eigenspace({t1, t2});
    REQUIRE(prior.count() == 1);

    Image diff(8, 8);
    for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] = t1.data[i] - t2.data[i];
    const double dn = norm2(diff.data);
    double align = 0.0;
    for (std::size_t i = 0; i < diff.data.size(); ++i)
        align += prior.eigvecs[0].data[i] * diff.data[i] / dn;
    CHECK(std::abs(std::abs(align) - 1.0) <= 1e-12);

    for (std::size_t i = 0; i < diff.data.size(); ++i)
        CHECK(prior.mean.data[i] == doctest::Approx(0.5 * (t1.data[i] + t2.data[i])).epsilon(1e-14));
}

TEST_CASE("eigvecs are orthonormal and eigvals non-increasing") {
    auto templates = random_templates(6, 16, 16, 40);
    EigenspacePrior prior = build_eigenspace(templates);
    REQUIRE(prior.count() == 5);
    for (int i = 0; i < prior.count(); ++i)
        for (int j = 0; j < prior.count(); ++j) {
            double d = dot(prior.eigvecs[i].data, prior.eigvecs[j].data);
            CHECK(std::abs(d - (i == j ? 1.0 : 0.0)) <= 1e-8);
        }
    for (int i = 1; i < prior.count(); ++i) CHECK(prior.eigvals[i] <= prior.eigvals[i - 1]);
    for (double s : prior.eigvals) CHECK(s >= 0.0);
}

TEST_CASE("span property: every template is reproduced by its projection") {
    auto templates = random_templates(4, 8, 8, 50);
    EigenspacePrior prior = build_eigenspace(templates);
    REQUIRE(prior.count() == 3);
    for (const Image& t : templates) {
        auto [coeffs, proj] = project_onto(prior, t);
        CHECK(max_abs_diff(proj, t) <= 1e-8);
    }
}

TEST_CASE("project_onto fixed points") {
    auto templates = random_templates(4, 8, 8, 60);
    EigenspacePrior prior = build_eigenspace(templates);

    auto [c0, p0] = project_onto(prior, prior.mean);
    for (double a : c0.alpha) CHECK(std::abs(a) <= 1e-10);
    CHECK(max_abs_diff(p0, prior.mean) <= 1e-10);

    Image shifted = prior.mean;
    for (std::size_t i = 0; i < shifted.data.size(); ++i)
        shifted.data[i] += 3.0 * prior.eigvecs[0].data[i];
    auto [c1, p1] = project_onto(prior, shifted);
    CHECK(c1.alpha[0] == doctest::Approx(3.0).epsilon(1e-10));
    for (std::size_t k = 1; k < c1.alpha.size(); ++k) CHECK(std::abs(c1.alpha[k]) <= 1e-10);
    CHECK(max_abs_diff(p1, shifted) <= 1e-10);

    CHECK_THROWS_AS(project_onto(prior, Image(9, 8, 0.0)), ConfigError);
}

TEST_CASE("orthogonal residual projects back to the mean") {
    auto templates = random_templates(3, 8, 8, 70);
    EigenspacePrior prior = build_eigenspace(templates);
    REQUIRE(prior.count() == 2);

    // Gram-Schmidt a random direction against the eigvecs.
    Image r = oracle::random_image(8, 8, 71, -1.0, 1.0);
    for (const Image& v : prior.eigvecs) {
        const double a = dot(v.data, r.data);
        for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] -= a * v.data[i];
    }
    Image probe = prior.mean;
    for (std::size_t i = 0; i < probe.data.size(); ++i) probe.data[i] += r.data[i];

    auto [coeffs, proj] = project_onto(prior, probe);
    for (double a : coeffs.alpha) CHECK(std::abs(a) <= 1e-10);
    CHECK(max_abs_diff(proj, prior.mean) <= 1e-10);
}

TEST_CASE("projection matches a dense least-squares solve") {
    auto templates = random_templates(4, 6, 6, 80);
    EigenspacePrior prior = build_eigenspace(templates);
    const int K = prior.count();
    REQUIRE(K == 3);
    const std::size_t n = prior.mean.data.size();

    Image img = oracle::random_image(6, 6, 81, -1.0, 1.0);
    auto [coeffs, proj] = project_onto(prior, img);

    Eigen::MatrixXd v((Eigen::Index)n, K);
    Eigen::VectorXd r((Eigen::Index)n);
    for (std::size_t i = 0; i < n; ++i) {
        r((Eigen::Index)i) = img.data[i] - prior.mean.data[i];
        for (int k = 0; k < K; ++k) v((Eigen::Index)i, k) = prior.eigvecs[k].data[i];
    }
    Eigen::VectorXd alpha = v.colPivHouseholderQr().solve(r);
    for (int k = 0; k < K; ++k) CHECK(std::abs(coeffs.alpha[k] - alpha(k)) <= 1e-9);
    Eigen::VectorXd dense_proj = v * alpha;
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(proj.data[i] - (prior.mean.data[i] + dense_proj((Eigen::Index)i))) <= 1e-9);
}

TEST_CASE("weighted coefficients match dense weighted normal equations") {
    auto templates = random_templates(4, 6, 6, 90);
    EigenspacePrior prior = build_eigenspace(templates);
    const int K = prior.count();
    const std::size_t n = prior.mean.data.size();

    Image img = oracle::random_image(6, 6, 91, -1.0, 1.0);
    WeightsMap w(6, 6);
    std::mt19937_64 rng(92);
    std::uniform_real_distribution<double> dist(0.3, 1.0);
    for (double& v : w.data) v = dist(rng);

    EigenCoeffs coeffs = weighted_coeffs(prior, img, w);

    Eigen::MatrixXd v((Eigen::Index)n, K);
    Eigen::VectorXd r((Eigen::Index)n), w2((Eigen::Index)n);
    for (std::size_t i = 0; i < n; ++i) {
        r((Eigen::Index)i) = img.data[i] - prior.mean.data[i];
        w2((Eigen::Index)i) = w.data[i] * w.data[i];
        for (int k = 0; k < K; ++k) v((Eigen::Index)i, k) = prior.eigvecs[k].data[i];
    }
    Eigen::MatrixXd m = v.transpose() * w2.asDiagonal() * v;
    Eigen::VectorXd b = v.transpose() * (w2.asDiagonal() * r);
    Eigen::VectorXd alpha = m.ldlt().solve(b);
    for (int k = 0; k < K; ++k) CHECK(std::abs(coeffs.alpha[k] - alpha(k)) <= 1e-8);
}

TEST_CASE("alpha step is optimal: prior-term gradient vanishes") {
    auto templates = random_templates(5, 8, 8, 100);
    EigenspacePrior prior = build_eigenspace(templates);
    Image x = oracle::random_image(8, 8, 101, -1.0, 1.0);

    auto [coeffs, proj] = project_onto(prior, x);
    for (std::size_t k = 0; k < coeffs.alpha.size(); ++k) {
        double g = 0.0;
        for (std::size_t i = 0; i < x.data.size(); ++i)
            g += prior.eigvecs[k].data[i] * (x.data[i] - proj.data[i]);
        CHECK(std::abs(2.0 * g) <= 1e-8);
    }

    WeightsMap w(8, 8);
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> dist(0.2, 1.0);
    for (double& v : w.data) v = dist(rng);
    EigenCoeffs wc = weighted_coeffs(prior, x, w);
    for (std::size_t k = 0; k < wc.alpha.size(); ++k) {
        double g = 0.0;
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            double resid = x.data[i] - prior.mean.data[i];
            for (std::size_t l = 0; l < wc.alpha.size(); ++l)
                resid -= wc.alpha[l] * prior.eigvecs[l].data[i];
            g += prior.eigvecs[k].data[i] * w.data[i] * w.data[i] * resid;
        }
        CHECK(std::abs(2.0 * g) <= 1e-8);
    }
}

TEST_CASE("lambda2 = 0 reduces to plain cs") {
    auto scans = scenario_templates(32, 4, 7);
    std::vector<Image> templates(scans.begin(), scans.end() - 1);
    EigenspacePrior prior = build_eigenspace(templates);

    Geometry g = Geometry::equispaced(12, 49, 1.0);
    Sinogram y = forward_project(scans.back(), g);

    PriorParams pp;
    pp.lambda1 = 1.0;
    pp.lambda2 = 0.0;
    pp.outer_iters = 5;
    pp.inner.max_iters = 60;
    pp.inner.tol = 1e-14;
    Image with_prior = reconstruct_unweighted(y, prior, BasisKind::DCT2, pp);

    SolverParams sp;
    sp.lambda1 = 1.0;
    sp.max_iters = 300;
    sp.tol = 1e-14;
    Image pilot = fbp(y, 32, 32, FilterKind::RamLak);
    Image plain = cs_reconstruct(y, 32, 32, BasisKind::DCT2, sp, nullptr, &pilot);

    CHECK(max_abs_diff(with_prior, plain) <= 1e-8);
}

TEST_CASE("weights of one reduce to the unweighted prior") {
    auto scans = scenario_templates(32, 4, 8);
    std::vector<Image> templates(scans.begin(), scans.end() - 1);
    EigenspacePrior prior = build_eigenspace(templates);

    Geometry g = Geometry::equispaced(12, 49, 1.0);
    Sinogram y = forward_project(scans.back(), g);

    PriorParams pp;
    pp.inner.max_iters = 60;
    pp.inner.tol = 1e-12;
    Image unweighted = reconstruct_unweighted(y, prior, BasisKind::DCT2, pp);
    Image weighted = reconstruct_weighted(y, prior, BasisKind::DCT2, WeightsMap(32, 32, 1.0), pp);
    CHECK(max_abs_diff(weighted, unweighted) <= 1e-8);
}

TEST_CASE("near-zero weights reduce to plain cs") {
    auto scans = scenario_templates(32, 4, 9);
    std::vector<Image> templates(scans.begin(), scans.end() - 1);
    EigenspacePrior prior = build_eigenspace(templates);

    Geometry g = Geometry::equispaced(12, 49, 1.0);
    Sinogram y = forward_project(scans.back(), g);

    PriorParams pp;
    pp.outer_iters = 5;
    pp.inner.max_iters = 60;
    pp.inner.tol = 1e-14;
    Image weighted = reconstruct_weighted(y, prior, BasisKind::DCT2, WeightsMap(32, 32, 1e-6), pp);

    SolverParams sp;
    sp.lambda1 = pp.lambda1;
    sp.max_iters = 300;
    sp.tol = 1e-14;
    Image pilot = fbp(y, 32, 32, FilterKind::RamLak);
    Image plain = cs_reconstruct(y, 32, 32, BasisKind::DCT2, sp, nullptr, &pilot);

    double dist = 0.0;
    for (std::size_t i = 0; i < weighted.data.size(); ++i) {
        const double d = weighted.data[i] - plain.data[i];
        dist += d * d;
    }
    CHECK(std::sqrt(dist) <= 1e-3 * norm2(plain.data));
}

TEST_CASE("huge lambda2 pins the solution to the subspace") {
    auto scans = scenario_templates(32, 4, 10);
    std::vector<Image> templates(scans.begin(), scans.end() - 1);
    EigenspacePrior prior = build_eigenspace(templates);

    Geometry g = Geometry::equispaced(12, 49, 1.0);
    Sinogram y = forward_project(scans.back(), g);

    PriorParams pp;
    pp.lambda1 = 0.0;
    pp.lambda2 = 1e6;
    pp.outer_iters = 3;
    pp.inner.max_iters = 150;
    pp.inner.tol = 1e-14;
    Image x = reconstruct_unweighted(y, prior, BasisKind::DCT2, pp);

    Image nearest = project_onto(prior, x).second;
    double dist = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double d = x.data[i] - nearest.data[i];
        dist += d * d;
    }
    CHECK(std::sqrt(dist) <= 1e-3 * norm2(x.data));
}

TEST_CASE("outer-loop objectives are non-increasing") {
    auto scans = scenario_templates(32, 5, 11);
    std::vector<Image> templates(scans.begin(), scans.end() - 1);
    EigenspacePrior prior = build_eigenspace(templates);

    Geometry g = Geometry::equispaced(10, 49, 1.0);
    Sinogram y = forward_project(scans.back(), g);

    PriorParams pp;
    pp.outer_iters = 5;
    pp.inner.max_iters = 40;

    SolveTrace t1;
    reconstruct_unweighted(y, prior, BasisKind::DCT2, pp, &t1);
    REQUIRE(t1.objective.size() == 6);
    for (std::size_t i = 1; i < t1.objective.size(); ++i)
        CHECK(t1.objective[i] <= t1.objective[i - 1] + 1e-9);

    WeightsMap w(32, 32, 1.0);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> dist(0.2, 1.0);
    for (double& v : w.data) v = dist(rng);
    SolveTrace t3;
    reconstruct_weighted(y, prior, BasisKind::DCT2, w, pp, &t3);
    for (std::size_t i = 1; i < t3.objective.size(); ++i)
        CHECK(t3.objective[i] <= t3.objective[i - 1] + 1e-9);
}

TEST_CASE("prior beats plain cs when the test is a template") {
    auto scans = scenario_templates(64, 6, 13);
    std::vector<Image> templates(scans.begin(), scans.end() - 1);
    EigenspacePrior prior = build_eigenspace(templates);

    const Image& truth = templates[2];
    Geometry g = Geometry::equispaced(15, 95, 1.0);
    Sinogram y = forward_project(truth, g);

    PriorParams pp;
    pp.inner.max_iters = 100;
    Image with_prior = reconstruct_unweighted(y, prior, BasisKind::DCT2, pp);

    SolverParams sp;
    sp.lambda1 = 1.0;
    sp.max_iters = 300;
    sp.accelerate = true;
    Image plain = cs_reconstruct(y, 64, 64, BasisKind::DCT2, sp);

    const double r = dynamic_range(truth);
    CHECK(ssim(with_prior, truth, 11, r) > ssim(plain, truth, 11, r));
}

TEST_CASE("weights dimension mismatch is rejected") {
    auto templates = random_templates(3, 8, 8, 120);
    EigenspacePrior prior = build_eigenspace(templates);
    Geometry g = Geometry::equispaced(6, 13, 1.0);
    Sinogram y(g);
    PriorParams pp;
    pp.inner.max_iters = 2;
    CHECK_THROWS_AS(reconstruct_weighted(y, prior, BasisKind::DCT2, WeightsMap(7, 8, 1.0), pp),
                    ConfigError);
}
