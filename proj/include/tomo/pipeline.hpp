#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tomo/core.hpp"
#include "tomo/metrics.hpp"
#include "tomo/phantoms.hpp"
#include "tomo/prior.hpp"
#include "tomo/recon.hpp"
#include "tomo/weights.hpp"

namespace tomo {

// Binary persistence: little-endian, magic "TPRI", u32 version, u32 kind
// (1 = image, 2 = sinogram, 3 = weights), dimension block, f64 payload.
// Sinograms carry their geometry (num_views, num_bins, bin_spacing, angles).
// Round trips are bitwise exact. Failures throw FormatError with the byte
// offset where parsing stopped.

void save_image(const Image& img, const std::string& path);
Image load_image(const std::string& path);
void save_sinogram(const Sinogram& sino, const std::string& path);
Sinogram load_sinogram(const std::string& path);
void save_weights(const WeightsMap& weights, const std::string& path);
WeightsMap load_weights(const std::string& path);

/// 8-bit binary PGM preview; values clamped to [0, scale] then quantized.
void save_pgm(const Image& img, const std::string& path, double scale = 1.2);

/// Line-oriented config: `section.key = value`, '#' comments, lists are
/// comma-separated. Getters record which keys were consumed so unknown keys
/// can be rejected afterwards.
class ConfigMap {
  public:
    static ConfigMap from_file(const std::string& path);
    static ConfigMap from_text(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<long long> get_int_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);

    /// Throws ConfigError naming any key that no getter ever consumed.
    void reject_unknown() const;

  private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> touched_;
};

/// Everything a protocol / sweep run needs, resolved from a ConfigMap.
struct RunConfig {
    PhantomScenario scenario;
    RoI roi;
    std::vector<int> views;   // one entry per scan
    int num_bins = 0;         // 0 = smallest detector covering the diagonal
    double bin_spacing = 1.0;
    BasisKind basis = BasisKind::DCT2;
    PriorParams prior;
    SolverParams dense;       // scan-0 compressed-sensing stage
    WeightsParams weights;
    std::vector<double> ksweep_values;
    int ssim_window = 11;
    bool final_weighted = true; // protocol's last stage; false reruns it unweighted
    std::string out_dir = "out";
    bool emit_pgm = true;

    void validate() const;
    Geometry geometry_for(int scan) const;
};

/// Builds a RunConfig from parsed keys (see README for the key list) and
/// rejects unknown keys. `seed_override` < 0 keeps the configured seed.
RunConfig make_run_config(const ConfigMap& cfg, long long seed_override = -1);

struct StageRow {
    std::string stage;
    int views = 0;
    Metrics metrics;
    double mean_w_in = -1.0;  // weights summaries, -1 when not applicable
    double mean_w_out = -1.0;
    std::string image_path;
};

struct RunReport {
    std::vector<StageRow> rows;
    bool completed = false;
    std::string failed_stage; // set when a stage aborted the run
    std::string error;
    int error_exit = 0;       // exit code matching the failure, 0 if none
    double elapsed_seconds = 0.0;
    double ssim_spread = 0.0; // k-sweep: max - min RoI SSIM
    double best_k = -1.0;     // calibrate-k result

    /// Machine-readable table; deterministic (timing excluded).
    std::string csv() const;
    /// Human-readable summary including timing.
    std::string summary() const;
};

/// View-escalation protocol: scan 0 densely with CS, middle scans with the
/// unweighted prior (template pool grows by each reconstruction), final scan
/// with the weighted prior. All artifacts land in cfg.out_dir. Stage errors
/// abort with a partial report naming the stage.
RunReport run_protocol(const RunConfig& cfg);

/// Weighted reconstruction of the final scan for each k; the difference map
/// is computed once and remapped per k.
RunReport run_ksweep(const RunConfig& cfg, const std::vector<double>& k_values);

/// Treats the last template as a pseudo-test with known truth and picks the
/// candidate k with the best global SSIM (report.best_k).
RunReport calibrate_k(const RunConfig& cfg, const std::vector<double>& candidates);

} // namespace tomo
