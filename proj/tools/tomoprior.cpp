// Command-line front end: simulate phantoms, project, reconstruct, compute
// weights maps, evaluate, and run the protocol / k-sweep studies.
//
// Exit codes: 0 success, 2 configuration error, 3 solver error, 4 file
// format error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tomo/errors.hpp"
#include "tomo/parallel.hpp"
#include "tomo/pipeline.hpp"
#include "tomo/projector.hpp"

namespace {

struct GlobalOpts {
    std::string config_path;
    long long seed = -1;
    std::string out;
    int threads = 0;
};

tomo::ConfigMap load_config(const GlobalOpts& g) {
    tomo::ConfigMap cfg;
    if (!g.config_path.empty()) cfg = tomo::ConfigMap::from_file(g.config_path);
    return cfg;
}

tomo::RunConfig resolve_run_config(const GlobalOpts& g) {
    tomo::ConfigMap cfg = load_config(g);
    tomo::RunConfig rc = tomo::make_run_config(cfg, g.seed);
    if (!g.out.empty()) rc.out_dir = g.out;
    return rc;
}

tomo::SolverParams solver_from_config(const tomo::ConfigMap& cfg) {
    tomo::SolverParams p;
    p.max_iters = (int)cfg.get_int("solver.max_iters", 300);
    p.tol = cfg.get_double("solver.tol", 1e-5);
    p.relax = cfg.get_double("solver.relax", 1.0);
    p.lambda1 = cfg.get_double("solver.lambda1", 1.0);
    p.accelerate = cfg.get_bool("solver.accelerate", false);
    p.step_rule = cfg.get_bool("solver.backtracking", true) ? tomo::StepRule::Backtracking
                                                            : tomo::StepRule::Fixed;
    return p;
}

tomo::RoI parse_roi(const std::vector<int>& v) {
    if (v.size() != 4) throw tomo::ConfigError("--roi needs x0,y0,x1,y1");
    return tomo::RoI{v[0], v[1], v[2], v[3]};
}

void print_report(const tomo::RunReport& report) {
    std::cout << report.summary();
    if (!report.completed) std::cout << "report written before abort\n";
}

int exit_code_for(const tomo::RunReport& report) { return report.error_exit; }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"longitudinal few-view tomography with eigenspace priors"};
    app.require_subcommand(1);
    app.fallthrough(); // accept the global options after the subcommand too

    GlobalOpts g;
    app.add_option("--config", g.config_path, "key = value config file");
    app.add_option("--seed", g.seed, "override the scenario seed");
    app.add_option("--out", g.out, "output directory or file");
    app.add_option("--threads", g.threads, "worker thread cap (default: all cores)");

    auto* sim = app.add_subcommand("simulate", "generate the longitudinal phantom scans");

    auto* proj = app.add_subcommand("project", "forward-project an image file");
    std::string proj_input;
    int proj_views = 30;
    int proj_bins = 0;
    double proj_spacing = 1.0;
    proj->add_option("--input", proj_input, "image (.tpri)")->required();
    proj->add_option("--views", proj_views, "number of equispaced views");
    proj->add_option("--bins", proj_bins, "detector bins (0 = auto)");
    proj->add_option("--spacing", proj_spacing, "detector pitch");

    auto* rec = app.add_subcommand("reconstruct", "reconstruct an image from a sinogram");
    std::string rec_input, rec_method = "fbp", rec_weights_path;
    std::vector<std::string> rec_templates;
    int rec_width = 0, rec_height = 0;
    rec->add_option("--input", rec_input, "sinogram (.tpri)")->required();
    rec->add_option("--method", rec_method,
                    "fbp|art|sart|sirt|cs-dct|cs-haar|prior|wprior");
    rec->add_option("--width", rec_width, "output width")->required();
    rec->add_option("--height", rec_height, "output height")->required();
    rec->add_option("--templates", rec_templates, "template images for prior/wprior");
    rec->add_option("--weights", rec_weights_path, "weights map for wprior (else computed)");

    auto* wts = app.add_subcommand("weights", "compute a change-detection weights map");
    std::string wts_input;
    std::vector<std::string> wts_templates;
    int wts_width = 0, wts_height = 0;
    wts->add_option("--input", wts_input, "test sinogram (.tpri)")->required();
    wts->add_option("--templates", wts_templates, "template images")->required();
    wts->add_option("--width", wts_width, "grid width")->required();
    wts->add_option("--height", wts_height, "grid height")->required();

    auto* eval = app.add_subcommand("evaluate", "compare a reconstruction against truth");
    std::string eval_recon, eval_truth;
    std::vector<int> eval_roi;
    int eval_window = 11;
    eval->add_option("--recon", eval_recon, "reconstruction (.tpri)")->required();
    eval->add_option("--truth", eval_truth, "ground truth (.tpri)")->required();
    eval->add_option("--roi", eval_roi, "x0,y0,x1,y1")->delimiter(',');
    eval->add_option("--window", eval_window, "ssim window (odd)");

    auto* proto = app.add_subcommand("protocol", "run the view-escalation protocol");
    auto* sweep = app.add_subcommand("ksweep", "weighted reconstructions across k values");
    auto* calib = app.add_subcommand("calibrate-k", "pick k by replaying a template as test");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (g.threads > 0) tomo::set_max_threads(g.threads);

        if (sim->parsed()) {
            tomo::RunConfig rc = resolve_run_config(g);
            std::filesystem::create_directories(rc.out_dir);
            const std::vector<tomo::Image> scans = tomo::generate_longitudinal(rc.scenario);
            for (std::size_t t = 0; t < scans.size(); ++t) {
                const std::string base = rc.out_dir + "/truth_" + std::to_string(t);
                tomo::save_image(scans[t], base + ".tpri");
                if (rc.emit_pgm) tomo::save_pgm(scans[t], base + ".pgm");
            }
            std::cout << "wrote " << scans.size() << " scans to " << rc.out_dir << "\n";
        } else if (proj->parsed()) {
            const tomo::Image img = tomo::load_image(proj_input);
            int bins = proj_bins;
            if (bins == 0) {
                bins = (int)std::ceil(tomo::image_diagonal(img.width, img.height) /
                                      proj_spacing) +
                       3;
                if (bins % 2 == 0) ++bins;
            }
            const tomo::Geometry geom = tomo::Geometry::equispaced(proj_views, bins, proj_spacing);
            const tomo::Sinogram sino = tomo::forward_project(img, geom);
            const std::string out = g.out.empty() ? "sinogram.tpri" : g.out;
            tomo::save_sinogram(sino, out);
            std::cout << "wrote " << out << "\n";
        } else if (rec->parsed()) {
            tomo::ConfigMap cfg = load_config(g);
            const tomo::Sinogram sino = tomo::load_sinogram(rec_input);
            tomo::Image out_img;
            if (rec_method == "prior" || rec_method == "wprior") {
                if (rec_templates.empty())
                    throw tomo::ConfigError("--templates required for prior methods");
                std::vector<tomo::Image> templates;
                for (const std::string& p : rec_templates)
                    templates.push_back(tomo::load_image(p));
                tomo::PriorParams pp;
                pp.lambda1 = cfg.get_double("prior.lambda1", 1.0);
                pp.lambda2 = cfg.get_double("prior.lambda2", 0.5);
                pp.outer_iters = (int)cfg.get_int("prior.outer_iters", 5);
                pp.inner.max_iters = (int)cfg.get_int("prior.inner_iters", 100);
                pp.inner.tol = cfg.get_double("prior.inner_tol", 1e-5);
                const tomo::BasisKind basis =
                    cfg.get_string("basis", "dct") == "haar" ? tomo::BasisKind::HAAR2
                                                             : tomo::BasisKind::DCT2;
                tomo::EigenspacePrior prior =
                    templates.size() >= 2
                        ? tomo::build_eigenspace(templates)
                        : [&] {
                              tomo::EigenspacePrior p;
                              p.mean = templates.front();
                              return p;
                          }();
                if (rec_method == "prior") {
                    out_img = tomo::reconstruct_unweighted(sino, prior, basis, pp);
                } else {
                    tomo::WeightsMap wmap;
                    if (!rec_weights_path.empty()) {
                        wmap = tomo::load_weights(rec_weights_path);
                    } else {
                        tomo::WeightsParams wp;
                        wp.k = cfg.get_double("weights.k", 50.0);
                        wp.pilot.max_iters = (int)cfg.get_int("weights.pilot_iters", 60);
                        wmap = tomo::compute_weights(sino, templates, rec_width, rec_height, wp);
                    }
                    out_img = tomo::reconstruct_weighted(sino, prior, basis, wmap, pp);
                }
            } else {
                const tomo::MethodId id = tomo::parse_method(rec_method);
                out_img = tomo::reconstruct_baseline(id, sino, rec_width, rec_height,
                                                     solver_from_config(cfg));
            }
            const std::string out = g.out.empty() ? "recon.tpri" : g.out;
            tomo::save_image(out_img, out);
            // Display copy: clamp negatives, keep the numeric file untouched.
            std::string pgm = out;
            const std::size_t dot = pgm.rfind(".tpri");
            if (dot != std::string::npos) pgm.erase(dot);
            tomo::save_pgm(out_img, pgm + ".pgm");
            std::cout << "wrote " << out << "\n";
        } else if (wts->parsed()) {
            tomo::ConfigMap cfg = load_config(g);
            const tomo::Sinogram sino = tomo::load_sinogram(wts_input);
            std::vector<tomo::Image> templates;
            for (const std::string& p : wts_templates) templates.push_back(tomo::load_image(p));
            tomo::WeightsParams wp;
            wp.k = cfg.get_double("weights.k", 50.0);
            wp.median_filter = cfg.get_bool("weights.median_filter", false);
            wp.pilot.max_iters = (int)cfg.get_int("weights.pilot_iters", 60);
            if (cfg.has("weights.methods")) {
                wp.methods.clear();
                for (const std::string& m : cfg.get_list("weights.methods"))
                    wp.methods.push_back(tomo::parse_method(m));
            }
            const tomo::WeightsMap wmap =
                tomo::compute_weights(sino, templates, wts_width, wts_height, wp);
            const std::string out = g.out.empty() ? "weights.tpri" : g.out;
            tomo::save_weights(wmap, out);
            std::cout << "wrote " << out << "\n";
        } else if (eval->parsed()) {
            const tomo::Image recon = tomo::load_image(eval_recon);
            const tomo::Image truth = tomo::load_image(eval_truth);
            tomo::Metrics m;
            if (eval_roi.empty()) {
                m = tomo::evaluate_pair(truth, recon, nullptr, eval_window);
            } else {
                const tomo::RoI roi = parse_roi(eval_roi);
                m = tomo::evaluate_pair(truth, recon, &roi, eval_window);
            }
            std::printf("ssim_global,ssim_roi,rmse,psnr\n%.12g,%.12g,%.12g,%.12g\n",
                        m.ssim_global, m.ssim_roi, m.rmse, m.psnr);
        } else if (proto->parsed()) {
            const tomo::RunConfig rc = resolve_run_config(g);
            const tomo::RunReport report = tomo::run_protocol(rc);
            print_report(report);
            return exit_code_for(report);
        } else if (sweep->parsed()) {
            tomo::RunConfig rc = resolve_run_config(g);
            if (rc.ksweep_values.empty())
                throw tomo::ConfigError("ksweep.values must list the k values to sweep");
            const tomo::RunReport report = tomo::run_ksweep(rc, rc.ksweep_values);
            print_report(report);
            return exit_code_for(report);
        } else if (calib->parsed()) {
            tomo::RunConfig rc = resolve_run_config(g);
            if (rc.ksweep_values.empty())
                throw tomo::ConfigError("ksweep.values must list the candidate k values");
            const tomo::RunReport report = tomo::calibrate_k(rc, rc.ksweep_values);
            print_report(report);
            if (report.completed) std::cout << "best k: " << report.best_k << "\n";
            return exit_code_for(report);
        }
    } catch (const tomo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const tomo::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const tomo::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
