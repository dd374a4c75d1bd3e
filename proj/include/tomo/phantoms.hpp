#pragma once

#include <cstdint>
#include <vector>

#include "tomo/core.hpp"

namespace tomo {

enum class PhantomFamily { SheppLogan, DiskPack };

/// One structural change between consecutive scans of a longitudinal series.
///
/// AddDisk paints a disk footprint with a fixed value (value 0 carves a hole),
/// RemoveDisk carves the footprint to zero, AddNeedle paints a 2-pixel-wide
/// high-attenuation segment (the approaching-probe analog).
struct Edit {
    enum class Kind { AddDisk, RemoveDisk, AddNeedle };
    Kind kind = Kind::AddDisk;
    // disk parameters
    double cx = 0, cy = 0, radius = 0;
    double value = 0.0;
    // needle segment endpoints
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    static Edit add_disk(double cx, double cy, double radius, double value);
    static Edit remove_disk(double cx, double cy, double radius);
    static Edit add_needle(double x0, double y0, double x1, double y1, double value = 1.2);
};

/// A longitudinal acquisition plan: a base phantom plus one edit per follow-up
/// scan. Generation is deterministic in (family, size, evolution, seed).
struct PhantomScenario {
    PhantomFamily base = PhantomFamily::SheppLogan;
    int size = 128;
    std::vector<Edit> evolution;
    std::uint64_t seed = 0;
};

/// Scan list: scan 0 is the base phantom, scan t applies evolution[t-1] to
/// scan t-1. All values are clamped to [0, 1.2]. Throws ConfigError when an
/// edit falls outside the image.
std::vector<Image> generate_longitudinal(const PhantomScenario& scenario);

/// Classic head phantom, attenuation values in [0, 1].
Image shepp_logan(int size);

/// Seeded arrangement of non-overlapping disks on an empty background.
Image disk_pack(int size, std::uint64_t seed);

// Canned scenarios used by the experiment pipeline.

/// num_scans scans in which a needle grows toward the image center; the final
/// scan additionally gains a low-attenuation ablation disk near the needle tip.
PhantomScenario make_needle_scenario(int size, int num_scans, std::uint64_t seed);

/// Templates with small seeded perturbations plus a test carrying a defect
/// absent from every earlier scan.
PhantomScenario make_defect_scenario(int size, int num_templates, std::uint64_t seed);

/// Region covering the structural change introduced by the last edit.
RoI last_change_roi(const PhantomScenario& scenario, int margin);

} // namespace tomo
