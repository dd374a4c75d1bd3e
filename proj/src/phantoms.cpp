#include "tomo/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tomo/errors.hpp"

namespace tomo {

Edit Edit::add_disk(double cx, double cy, double radius, double value) {
    Edit e;
    e.kind = Kind::AddDisk;
    e.cx = cx;
    e.cy = cy;
    e.radius = radius;
    e.value = value;
    return e;
}

Edit Edit::remove_disk(double cx, double cy, double radius) {
    Edit e = add_disk(cx, cy, radius, 0.0);
    e.kind = Kind::RemoveDisk;
    return e;
}

Edit Edit::add_needle(double x0, double y0, double x1, double y1, double value) {
    Edit e;
    e.kind = Kind::AddNeedle;
    e.x0 = x0;
    e.y0 = y0;
    e.x1 = x1;
    e.y1 = y1;
    e.value = value;
    return e;
}

namespace {

constexpr double kNeedleHalfWidth = 1.0; // 2-pixel-wide segment
constexpr double kValueCap = 1.2;

struct EllipseSpec {
    double value, a, b, cx, cy, phi_deg;
};

// Toft's modified Shepp-Logan table; values stay within [0, 1].
constexpr EllipseSpec kSheppLogan[] = {
    {1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
    {-0.80, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
    {-0.20, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
    {-0.20, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
    {0.10, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
    {0.10, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
    {0.10, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
    {0.10, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
    {0.10, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
    {0.10, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
};

void check_inside(const Image& img, double x, double y, double slack, const char* what) {
    if (x - slack < -0.5 || x + slack > img.width - 0.5 || y - slack < -0.5 ||
        y + slack > img.height - 0.5)
        throw ConfigError(std::string(what) + " falls outside the image");
}

double dist_to_segment(double px, double py, const Edit& e) {
    const double dx = e.x1 - e.x0, dy = e.y1 - e.y0;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((px - e.x0) * dx + (py - e.y0) * dy) / len2, 0.0, 1.0);
    const double qx = e.x0 + t * dx, qy = e.y0 + t * dy;
    return std::hypot(px - qx, py - qy);
}

void apply_edit(Image& img, const Edit& e) {
    if (e.kind == Edit::Kind::AddNeedle) {
        check_inside(img, e.x0, e.y0, kNeedleHalfWidth, "needle endpoint");
        check_inside(img, e.x1, e.y1, kNeedleHalfWidth, "needle endpoint");
        const int lox = std::max(0, (int)std::floor(std::min(e.x0, e.x1) - kNeedleHalfWidth));
        const int hix = std::min(img.width - 1, (int)std::ceil(std::max(e.x0, e.x1) + kNeedleHalfWidth));
        const int loy = std::max(0, (int)std::floor(std::min(e.y0, e.y1) - kNeedleHalfWidth));
        const int hiy = std::min(img.height - 1, (int)std::ceil(std::max(e.y0, e.y1) + kNeedleHalfWidth));
        for (int y = loy; y <= hiy; ++y)
            for (int x = lox; x <= hix; ++x)
                if (dist_to_segment(x, y, e) <= kNeedleHalfWidth) img.at(x, y) = e.value;
        return;
    }
    if (e.radius <= 0.0) throw ConfigError("disk edit requires a positive radius");
    check_inside(img, e.cx, e.cy, e.radius, "disk edit");
    const double value = e.kind == Edit::Kind::RemoveDisk ? 0.0 : e.value;
    const int lox = std::max(0, (int)std::floor(e.cx - e.radius));
    const int hix = std::min(img.width - 1, (int)std::ceil(e.cx + e.radius));
    const int loy = std::max(0, (int)std::floor(e.cy - e.radius));
    const int hiy = std::min(img.height - 1, (int)std::ceil(e.cy + e.radius));
    const double r2 = e.radius * e.radius;
    for (int y = loy; y <= hiy; ++y)
        for (int x = lox; x <= hix; ++x) {
            const double dx = x - e.cx, dy = y - e.cy;
            if (dx * dx + dy * dy <= r2) img.at(x, y) = value;
        }
}

void clamp_values(Image& img) {
    for (double& v : img.data) v = std::clamp(v, 0.0, kValueCap);
}

} // namespace

Image shepp_logan(int size) {
    Image img(size, size);
    const double c = 0.5 * (size - 1);
    const double scale = 2.0 / size;
    for (int y = 0; y < size; ++y) {
        const double v = (c - y) * scale;
        for (int x = 0; x < size; ++x) {
            const double u = (x - c) * scale;
            double sum = 0.0;
            for (const auto& el : kSheppLogan) {
                const double phi = el.phi_deg * M_PI / 180.0;
                const double du = u - el.cx, dv = v - el.cy;
                const double ur = du * std::cos(phi) + dv * std::sin(phi);
                const double vr = -du * std::sin(phi) + dv * std::cos(phi);
                if ((ur * ur) / (el.a * el.a) + (vr * vr) / (el.b * el.b) <= 1.0) sum += el.value;
            }
            img.at(x, y) = std::max(0.0, sum);
        }
    }
    return img;
}

Image disk_pack(int size, std::uint64_t seed) {
    Image img(size, size);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> upos(0.18 * size, 0.82 * size);
    std::uniform_real_distribution<double> urad(0.04 * size, 0.10 * size);
    std::uniform_real_distribution<double> uval(0.3, 1.0);

    struct Disk {
        double cx, cy, r, value;
    };
    std::vector<Disk> disks;
    const int target = 9;
    for (int attempt = 0; attempt < 400 && (int)disks.size() < target; ++attempt) {
        Disk d{upos(rng), upos(rng), urad(rng), uval(rng)};
        bool ok = true;
        for (const auto& other : disks)
            if (std::hypot(d.cx - other.cx, d.cy - other.cy) < d.r + other.r + 1.5) {
                ok = false;
                break;
            }
        if (ok) disks.push_back(d);
    }
    for (const auto& d : disks) apply_edit(img, Edit::add_disk(d.cx, d.cy, d.r, d.value));
    return img;
}

std::vector<Image> generate_longitudinal(const PhantomScenario& scenario) {
    if (scenario.size < 8) throw ConfigError("phantom size must be at least 8");
    Image current = scenario.base == PhantomFamily::SheppLogan
                        ? shepp_logan(scenario.size)
                        : disk_pack(scenario.size, scenario.seed);
    clamp_values(current);
    std::vector<Image> scans;
    scans.reserve(scenario.evolution.size() + 1);
    scans.push_back(current);
    for (const Edit& e : scenario.evolution) {
        apply_edit(current, e);
        clamp_values(current);
        scans.push_back(current);
    }
    return scans;
}

PhantomScenario make_needle_scenario(int size, int num_scans, std::uint64_t seed) {
    if (num_scans < 2) throw ConfigError("needle scenario needs at least 2 scans");
    PhantomScenario sc;
    sc.base = PhantomFamily::SheppLogan;
    sc.size = size;
    sc.seed = seed;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    const double sx = (0.88 + jitter(rng)) * size, sy = (0.30 + jitter(rng)) * size;
    const double tx = 0.54 * size, ty = 0.48 * size;

    // All but the last follow-up lengthen the needle; the last adds a small
    // cavity at the tip.
    const int needle_steps = std::max(1, num_scans - 2);
    double tipx = sx, tipy = sy;
    for (int t = 1; t <= needle_steps; ++t) {
        const double f = (double)t / (needle_steps + 1);
        tipx = sx + f * (tx - sx);
        tipy = sy + f * (ty - sy);
        sc.evolution.push_back(Edit::add_needle(sx, sy, tipx, tipy));
    }
    if (num_scans > 2) sc.evolution.push_back(Edit::add_disk(tipx, tipy, 0.04 * size, 0.05));
    return sc;
}

PhantomScenario make_defect_scenario(int size, int num_templates, std::uint64_t seed) {
    if (num_templates < 2) throw ConfigError("defect scenario needs at least 2 templates");
    PhantomScenario sc;
    sc.base = PhantomFamily::SheppLogan;
    sc.size = size;
    sc.seed = seed;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> upos(-0.18, 0.18);
    std::uniform_real_distribution<double> urad(0.015, 0.03);
    std::uniform_real_distribution<double> uval(0.15, 0.35);
    // Small interior perturbations between consecutive templates.
    for (int t = 1; t < num_templates; ++t) {
        const double cx = (0.5 + upos(rng)) * size;
        const double cy = (0.45 + upos(rng)) * size;
        sc.evolution.push_back(Edit::add_disk(cx, cy, urad(rng) * size, uval(rng)));
    }
    // The test scan carries a bright defect no template has seen.
    const double dx = (0.36 + 0.5 * upos(rng)) * size;
    const double dy = (0.60 + 0.5 * upos(rng)) * size;
    sc.evolution.push_back(Edit::add_disk(dx, dy, 0.05 * size, 1.1));
    return sc;
}

RoI last_change_roi(const PhantomScenario& scenario, int margin) {
    if (scenario.evolution.empty()) throw ConfigError("scenario has no edits");
    const Edit& e = scenario.evolution.back();
    double lox, hix, loy, hiy;
    if (e.kind == Edit::Kind::AddNeedle) {
        lox = std::min(e.x0, e.x1) - kNeedleHalfWidth;
        hix = std::max(e.x0, e.x1) + kNeedleHalfWidth;
        loy = std::min(e.y0, e.y1) - kNeedleHalfWidth;
        hiy = std::max(e.y0, e.y1) + kNeedleHalfWidth;
    } else {
        lox = e.cx - e.radius;
        hix = e.cx + e.radius;
        loy = e.cy - e.radius;
        hiy = e.cy + e.radius;
    }
    RoI roi;
    roi.x0 = std::max(0, (int)std::floor(lox) - margin);
    roi.y0 = std::max(0, (int)std::floor(loy) - margin);
    roi.x1 = std::min(scenario.size - 1, (int)std::ceil(hix) + margin);
    roi.y1 = std::min(scenario.size - 1, (int)std::ceil(hiy) + margin);
    return roi;
}

} // namespace tomo
