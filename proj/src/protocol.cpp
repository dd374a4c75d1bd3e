#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "tomo/errors.hpp"
#include "tomo/pipeline.hpp"
#include "tomo/projector.hpp"

namespace tomo {

namespace {

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string join(const std::string& dir, const std::string& name) { return dir + "/" + name; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError(path + ": cannot open for writing");
    f << text;
    f.flush();
    if (!f) throw FormatError(path + ": write failed");
}

// Mean weight inside and outside the region of interest.
std::pair<double, double> weight_split(const WeightsMap& w, const RoI& roi) {
    double in = 0, out = 0;
    std::size_t nin = 0, nout = 0;
    for (int y = 0; y < w.height; ++y)
        for (int x = 0; x < w.width; ++x) {
            if (roi.contains(x, y)) {
                in += w.at(x, y);
                ++nin;
            } else {
                out += w.at(x, y);
                ++nout;
            }
        }
    return {nin ? in / nin : -1.0, nout ? out / nout : -1.0};
}

// Single-template pools get a degenerate prior (mean = the template, no
// eigenvectors); build_eigenspace itself requires two.
EigenspacePrior make_pool_prior(const std::vector<Image>& pool) {
    if (pool.size() >= 2) return build_eigenspace(pool);
    if (pool.empty()) throw ConfigError("template pool is empty");
    EigenspacePrior p;
    p.mean = pool.front();
    return p;
}

struct StageGuard {
    RunReport& report;
    std::string stage;

    template <typename Fn>
    bool run(Fn&& fn) {
        try {
            fn();
            return true;
        } catch (const ConfigError& e) {
            fail(e.what(), 2);
        } catch (const SolverError& e) {
            fail(e.what(), 3);
        } catch (const FormatError& e) {
            fail(e.what(), 4);
        }
        return false;
    }

    void fail(const std::string& what, int exit_code) {
        report.failed_stage = stage;
        report.error = what;
        report.error_exit = exit_code;
        report.completed = false;
    }
};

void emit_image(const Image& img, const RunConfig& cfg, const std::string& name,
                std::string* path_out = nullptr) {
    const std::string path = join(cfg.out_dir, name + ".tpri");
    save_image(img, path);
    if (cfg.emit_pgm) save_pgm(img, join(cfg.out_dir, name + ".pgm"));
    if (path_out) *path_out = path;
}

void emit_weights(const WeightsMap& w, const RunConfig& cfg, const std::string& name) {
    save_weights(w, join(cfg.out_dir, name + ".tpri"));
    if (cfg.emit_pgm) {
        Image as_img(w.width, w.height);
        as_img.data = w.data;
        save_pgm(as_img, join(cfg.out_dir, name + ".pgm"), 1.0);
    }
}

void finalize(RunReport& report, const RunConfig& cfg,
              std::chrono::steady_clock::time_point t0) {
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_text(join(cfg.out_dir, "report.csv"), report.csv());
    write_text(join(cfg.out_dir, "summary.txt"), report.summary());
}

std::string k_tag(double k) { return "k" + fmt_double(k); }

} // namespace

std::string RunReport::csv() const {
    std::string out = "stage,views,ssim_global,ssim_roi,rmse,psnr,mean_w_in,mean_w_out,image\n";
    for (const StageRow& r : rows) {
        out += r.stage + "," + std::to_string(r.views) + "," + fmt_double(r.metrics.ssim_global) +
               "," + fmt_double(r.metrics.ssim_roi) + "," + fmt_double(r.metrics.rmse) + "," +
               fmt_double(r.metrics.psnr) + ",";
        out += (r.mean_w_in >= 0 ? fmt_double(r.mean_w_in) : "") + std::string(",");
        out += (r.mean_w_out >= 0 ? fmt_double(r.mean_w_out) : "") + std::string(",");
        out += r.image_path + "\n";
    }
    if (!failed_stage.empty()) out += "# failed_stage=" + failed_stage + " error=" + error + "\n";
    return out;
}

std::string RunReport::summary() const {
    std::string out;
    out += completed ? "run completed\n" : "run INCOMPLETE\n";
    if (!failed_stage.empty()) out += "failed stage: " + failed_stage + "\n  " + error + "\n";
    for (const StageRow& r : rows) {
        out += r.stage + " (" + std::to_string(r.views) + " views): ssim " +
               fmt_double(r.metrics.ssim_global) + ", roi ssim " + fmt_double(r.metrics.ssim_roi) +
               ", rmse " + fmt_double(r.metrics.rmse);
        if (r.mean_w_in >= 0)
            out += ", mean W in/out roi " + fmt_double(r.mean_w_in) + "/" +
                   fmt_double(r.mean_w_out);
        out += "\n";
    }
    if (ssim_spread > 0) out += "roi ssim spread: " + fmt_double(ssim_spread) + "\n";
    if (best_k >= 0) out += "calibrated k: " + fmt_double(best_k) + "\n";
    out += "elapsed: " + fmt_double(elapsed_seconds) + " s\n";
    return out;
}

RunReport run_protocol(const RunConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    RunReport report;
    StageGuard guard{report, "generate-scans"};
    std::vector<Image> scans;
    if (!guard.run([&] { scans = generate_longitudinal(cfg.scenario); })) {
        finalize(report, cfg, t0);
        return report;
    }

    const int size = cfg.scenario.size;
    const int last = (int)scans.size() - 1;
    std::vector<Image> pool;

    for (int t = 0; t < (int)scans.size(); ++t) {
        const bool weighted_stage = t == last && t > 0 && cfg.final_weighted && pool.size() >= 2;
        std::string stage;
        if (t == 0) stage = "scan0-dense-cs";
        else if (weighted_stage) stage = "scan" + std::to_string(t) + "-weighted-prior";
        else stage = "scan" + std::to_string(t) + "-prior";
        guard.stage = stage;

        StageRow row;
        row.stage = stage;
        row.views = cfg.views[(std::size_t)t];
        const bool ok = guard.run([&] {
            const Geometry geom = cfg.geometry_for(t);
            const Sinogram sino = forward_project(scans[t], geom);
            emit_image(scans[t], cfg, "truth_" + std::to_string(t));
            save_sinogram(sino, join(cfg.out_dir, "sino_" + std::to_string(t) + ".tpri"));

            Image recon;
            if (t == 0) {
                recon = cs_reconstruct(sino, size, size, cfg.basis, cfg.dense);
            } else if (weighted_stage) {
                const WeightsMap wmap =
                    compute_weights(sino, pool, size, size, cfg.weights);
                emit_weights(wmap, cfg, "weights_" + std::to_string(t));
                const EigenspacePrior prior = make_pool_prior(pool);
                recon = reconstruct_weighted(sino, prior, cfg.basis, wmap, cfg.prior);
                std::tie(row.mean_w_in, row.mean_w_out) = weight_split(wmap, cfg.roi);
            } else {
                const EigenspacePrior prior = make_pool_prior(pool);
                recon = reconstruct_unweighted(sino, prior, cfg.basis, cfg.prior);
            }
            emit_image(recon, cfg, "recon_" + std::to_string(t), &row.image_path);
            row.metrics = evaluate_pair(scans[t], recon, &cfg.roi, cfg.ssim_window);
            pool.push_back(std::move(recon));
        });
        if (!ok) {
            finalize(report, cfg, t0);
            return report;
        }
        report.rows.push_back(std::move(row));
    }

    report.completed = true;
    finalize(report, cfg, t0);
    return report;
}

RunReport run_ksweep(const RunConfig& cfg, const std::vector<double>& k_values) {
    cfg.validate();
    if (k_values.empty()) throw ConfigError("k sweep needs at least one k value");
    for (double k : k_values)
        if (k < 0.0) throw ConfigError("k values must be non-negative");
    std::filesystem::create_directories(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    RunReport report;
    StageGuard guard{report, "setup"};
    std::vector<Image> scans;
    Sinogram sino;
    EigenspacePrior prior;
    Image combined;
    const int size = cfg.scenario.size;
    const bool ok = guard.run([&] {
        scans = generate_longitudinal(cfg.scenario);
        if (scans.size() < 3)
            throw ConfigError("k sweep needs at least 2 templates plus a test scan");
        const std::vector<Image> templates(scans.begin(), scans.end() - 1);
        const Image& test = scans.back();
        const Geometry geom = cfg.geometry_for((int)scans.size() - 1);
        sino = forward_project(test, geom);
        emit_image(test, cfg, "truth_test");
        save_sinogram(sino, join(cfg.out_dir, "sino_test.tpri"));
        // The difference map does not depend on k; compute it once.
        WeightsDetail detail = compute_weights_detailed(sino, templates, size, size, cfg.weights);
        combined = std::move(detail.combined_diff);
        prior = build_eigenspace(templates);
    });
    if (!ok) {
        finalize(report, cfg, t0);
        return report;
    }

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double k : k_values) {
        guard.stage = k_tag(k);
        StageRow row;
        row.stage = k_tag(k);
        row.views = cfg.views.back();
        const bool step_ok = guard.run([&] {
            const WeightsMap wmap = weights_from_difference(combined, k);
            emit_weights(wmap, cfg, "weights_" + k_tag(k));
            const Image recon =
                reconstruct_weighted(sino, prior, cfg.basis, wmap, cfg.prior);
            emit_image(recon, cfg, "recon_" + k_tag(k), &row.image_path);
            row.metrics = evaluate_pair(scans.back(), recon, &cfg.roi, cfg.ssim_window);
            std::tie(row.mean_w_in, row.mean_w_out) = weight_split(wmap, cfg.roi);
        });
        if (!step_ok) {
            finalize(report, cfg, t0);
            return report;
        }
        lo = std::min(lo, row.metrics.ssim_roi);
        hi = std::max(hi, row.metrics.ssim_roi);
        report.rows.push_back(std::move(row));
    }

    report.ssim_spread = hi - lo;
    report.completed = true;
    finalize(report, cfg, t0);
    return report;
}

RunReport calibrate_k(const RunConfig& cfg, const std::vector<double>& candidates) {
    cfg.validate();
    if (candidates.size() < 2) throw ConfigError("k calibration needs at least 2 candidates");
    for (double k : candidates)
        if (k < 0.0) throw ConfigError("k values must be non-negative");
    std::filesystem::create_directories(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    RunReport report;
    StageGuard guard{report, "setup"};
    std::vector<Image> scans;
    Sinogram sino;
    EigenspacePrior prior;
    Image combined;
    const int size = cfg.scenario.size;
    const bool ok = guard.run([&] {
        scans = generate_longitudinal(cfg.scenario);
        // The last template plays the test; truth is known, so SSIM is exact.
        if (scans.size() < 4)
            throw ConfigError("k calibration needs at least 3 templates plus a test scan");
        const std::vector<Image> pool(scans.begin(), scans.end() - 2);
        const Image& pseudo_test = scans[scans.size() - 2];
        const Geometry geom = cfg.geometry_for((int)scans.size() - 1);
        sino = forward_project(pseudo_test, geom);
        WeightsDetail detail = compute_weights_detailed(sino, pool, size, size, cfg.weights);
        combined = std::move(detail.combined_diff);
        prior = build_eigenspace(pool);
    });
    if (!ok) {
        finalize(report, cfg, t0);
        return report;
    }

    double best_ssim = -2.0;
    for (double k : candidates) {
        guard.stage = k_tag(k);
        StageRow row;
        row.stage = k_tag(k);
        row.views = cfg.views.back();
        const bool step_ok = guard.run([&] {
            const WeightsMap wmap = weights_from_difference(combined, k);
            const Image recon =
                reconstruct_weighted(sino, prior, cfg.basis, wmap, cfg.prior);
            emit_image(recon, cfg, "calibrate_" + k_tag(k), &row.image_path);
            row.metrics =
                evaluate_pair(scans[scans.size() - 2], recon, &cfg.roi, cfg.ssim_window);
            std::tie(row.mean_w_in, row.mean_w_out) = weight_split(wmap, cfg.roi);
        });
        if (!step_ok) {
            finalize(report, cfg, t0);
            return report;
        }
        if (row.metrics.ssim_global > best_ssim) {
            best_ssim = row.metrics.ssim_global;
            report.best_k = k;
        }
        report.rows.push_back(std::move(row));
    }

    report.completed = true;
    finalize(report, cfg, t0);
    return report;
}

} // namespace tomo
