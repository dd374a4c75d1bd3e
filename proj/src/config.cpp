#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "tomo/errors.hpp"
#include "tomo/pipeline.hpp"

namespace tomo {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return (char)std::tolower(c); });
    return s;
}

} // namespace

ConfigMap ConfigMap::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_text(ss.str());
}

ConfigMap ConfigMap::from_text(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected `key = value`, got \"" + line + "\"");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

bool ConfigMap::has(const std::string& key) const {
    touched_.insert(key);
    return values_.count(key) > 0;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    touched_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

std::string ConfigMap::require_string(const std::string& key) const {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing required config key " + key);
    return it->second;
}

long long ConfigMap::get_int(const std::string& key, long long fallback) const {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected integer, got \"" + it->second + "\"");
    }
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": expected number, got \"" + it->second + "\"");
    }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    touched_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string v = lower(it->second);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + ": expected boolean, got \"" + it->second + "\"");
}

std::vector<std::string> ConfigMap::get_list(const std::string& key) const {
    touched_.insert(key);
    auto it = values_.find(key);
    std::vector<std::string> out;
    if (it == values_.end()) return out;
    std::string item;
    std::istringstream in(it->second);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> ConfigMap::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& s : get_list(key)) {
        try {
            out.push_back(std::stod(s));
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": expected number list, got \"" + s + "\"");
        }
    }
    return out;
}

std::vector<long long> ConfigMap::get_int_list(const std::string& key) const {
    std::vector<long long> out;
    for (const std::string& s : get_list(key)) {
        try {
            out.push_back(std::stoll(s));
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": expected integer list, got \"" + s + "\"");
        }
    }
    return out;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
    values_[lower(trim(key))] = trim(value);
}

void ConfigMap::reject_unknown() const {
    for (const auto& [key, value] : values_)
        if (!touched_.count(key)) throw ConfigError("unknown config key " + key);
}

namespace {

Edit parse_edit(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    std::string kind;
    in >> kind;
    std::vector<double> nums;
    double v;
    while (in >> v) nums.push_back(v);
    if (!in.eof())
        throw ConfigError("config key " + key + ": malformed edit \"" + text + "\"");
    if (kind == "add-disk" && nums.size() == 4)
        return Edit::add_disk(nums[0], nums[1], nums[2], nums[3]);
    if (kind == "remove-disk" && nums.size() == 3)
        return Edit::remove_disk(nums[0], nums[1], nums[2]);
    if (kind == "add-needle" && nums.size() == 4)
        return Edit::add_needle(nums[0], nums[1], nums[2], nums[3]);
    if (kind == "add-needle" && nums.size() == 5)
        return Edit::add_needle(nums[0], nums[1], nums[2], nums[3], nums[4]);
    throw ConfigError("config key " + key + ": expected `add-disk cx cy r value`, " +
                      "`remove-disk cx cy r` or `add-needle x0 y0 x1 y1 [value]`, got \"" + text +
                      "\"");
}

BasisKind parse_basis(const std::string& name) {
    if (name == "dct") return BasisKind::DCT2;
    if (name == "haar") return BasisKind::HAAR2;
    throw ConfigError("basis must be `dct` or `haar`, got \"" + name + "\"");
}

} // namespace

void RunConfig::validate() const {
    if (scenario.size < 8) throw ConfigError("scenario size must be at least 8");
    const std::size_t scans = scenario.evolution.size() + 1;
    if (views.size() != scans)
        throw ConfigError("geometry.views needs one entry per scan (" + std::to_string(scans) +
                          "), got " + std::to_string(views.size()));
    for (int v : views)
        if (v < 1) throw ConfigError("per-scan view counts must be positive");
    if (roi.x0 < 0 || roi.y0 < 0 || roi.x1 >= scenario.size || roi.y1 >= scenario.size ||
        roi.x1 < roi.x0 || roi.y1 < roi.y0)
        throw ConfigError("roi does not fit the scenario size");
    if (ssim_window < 3 || ssim_window % 2 == 0)
        throw ConfigError("ssim window must be odd and at least 3");
    if (!(bin_spacing > 0.0)) throw ConfigError("bin_spacing must be positive");
    if (num_bins < 0) throw ConfigError("geometry.bins must be non-negative");
    prior.validate();
    dense.validate();
    weights.validate();
}

Geometry RunConfig::geometry_for(int scan) const {
    if (scan < 0 || scan >= (int)views.size())
        throw ConfigError("scan index " + std::to_string(scan) + " outside the protocol");
    int bins = num_bins;
    if (bins == 0) {
        bins = (int)std::ceil(image_diagonal(scenario.size, scenario.size) / bin_spacing) + 3;
        if (bins % 2 == 0) ++bins; // center a bin on the rotation axis
    }
    return Geometry::equispaced(views[(std::size_t)scan], bins, bin_spacing);
}

RunConfig make_run_config(const ConfigMap& cfg, long long seed_override) {
    RunConfig rc;

    const int size = (int)cfg.get_int("scenario.size", 128);
    const std::uint64_t seed = seed_override >= 0 ? (std::uint64_t)seed_override
                                                  : (std::uint64_t)cfg.get_int("scenario.seed", 0);
    const std::string kind = lower(cfg.get_string("scenario.kind", "custom"));
    if (kind == "needle") {
        rc.scenario = make_needle_scenario(size, (int)cfg.get_int("scenario.scans", 8), seed);
    } else if (kind == "defect") {
        const int scans = (int)cfg.get_int("scenario.scans", 7);
        if (scans < 3) throw ConfigError("defect scenario needs at least 3 scans");
        rc.scenario = make_defect_scenario(size, scans - 1, seed);
    } else if (kind == "custom") {
        rc.scenario.size = size;
        rc.scenario.seed = seed;
        const std::string family = lower(cfg.get_string("scenario.family", "shepp-logan"));
        if (family == "shepp-logan") rc.scenario.base = PhantomFamily::SheppLogan;
        else if (family == "disk-pack") rc.scenario.base = PhantomFamily::DiskPack;
        else throw ConfigError("scenario.family must be `shepp-logan` or `disk-pack`");
        for (int i = 1;; ++i) {
            const std::string key = "scenario.edit." + std::to_string(i);
            if (!cfg.has(key)) break;
            rc.scenario.evolution.push_back(parse_edit(key, cfg.require_string(key)));
        }
    } else {
        throw ConfigError("scenario.kind must be `needle`, `defect` or `custom`");
    }

    const int margin = (int)cfg.get_int("roi.margin", 6);
    if (cfg.has("roi.x0") || cfg.has("roi.y0") || cfg.has("roi.x1") || cfg.has("roi.y1")) {
        rc.roi.x0 = (int)cfg.get_int("roi.x0", 0);
        rc.roi.y0 = (int)cfg.get_int("roi.y0", 0);
        rc.roi.x1 = (int)cfg.get_int("roi.x1", size - 1);
        rc.roi.y1 = (int)cfg.get_int("roi.y1", size - 1);
    } else if (!rc.scenario.evolution.empty()) {
        rc.roi = last_change_roi(rc.scenario, margin);
    } else {
        rc.roi = RoI{0, 0, size - 1, size - 1};
    }

    const std::size_t scans = rc.scenario.evolution.size() + 1;
    std::vector<long long> views = cfg.get_int_list("geometry.views");
    if (views.empty()) views = {180};
    if (views.size() == 1) views.assign(scans, views[0]);
    rc.views.assign(views.begin(), views.end());

    rc.num_bins = (int)cfg.get_int("geometry.bins", 0);
    rc.bin_spacing = cfg.get_double("geometry.bin_spacing", 1.0);
    rc.basis = parse_basis(lower(cfg.get_string("basis", "dct")));

    rc.prior.lambda1 = cfg.get_double("prior.lambda1", 1.0);
    rc.prior.lambda2 = cfg.get_double("prior.lambda2", 0.5);
    rc.prior.outer_iters = (int)cfg.get_int("prior.outer_iters", 5);
    rc.prior.inner.max_iters = (int)cfg.get_int("prior.inner_iters", 100);
    rc.prior.inner.tol = cfg.get_double("prior.inner_tol", 1e-5);
    rc.prior.inner.accelerate = cfg.get_bool("prior.accelerate", false);

    rc.dense.max_iters = (int)cfg.get_int("solver.max_iters", 120);
    rc.dense.tol = cfg.get_double("solver.tol", 1e-5);
    rc.dense.lambda1 = cfg.get_double("solver.lambda1", rc.prior.lambda1);
    rc.dense.accelerate = cfg.get_bool("solver.accelerate", false);

    rc.weights.k = cfg.get_double("weights.k", 50.0);
    rc.weights.median_filter = cfg.get_bool("weights.median_filter", false);
    rc.weights.pilot.max_iters = (int)cfg.get_int("weights.pilot_iters", 60);
    rc.weights.pilot.tol = cfg.get_double("weights.pilot_tol", 1e-5);
    rc.weights.pilot.lambda1 = cfg.get_double("weights.pilot_lambda1", rc.prior.lambda1);
    if (cfg.has("weights.methods")) {
        rc.weights.methods.clear();
        for (const std::string& m : cfg.get_list("weights.methods"))
            rc.weights.methods.push_back(parse_method(lower(m)));
        if (rc.weights.methods.empty())
            throw ConfigError("weights.methods must name at least one method");
    }

    rc.ksweep_values = cfg.get_double_list("ksweep.values");
    rc.ssim_window = (int)cfg.get_int("ssim.window", 11);

    const std::string final_stage = lower(cfg.get_string("protocol.final", "weighted"));
    if (final_stage == "weighted") rc.final_weighted = true;
    else if (final_stage == "unweighted") rc.final_weighted = false;
    else throw ConfigError("protocol.final must be `weighted` or `unweighted`");

    rc.out_dir = cfg.get_string("output.dir", "out");
    rc.emit_pgm = cfg.get_bool("output.pgm", true);

    cfg.reject_unknown();
    rc.validate();
    return rc;
}

} // namespace tomo
