#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "tomo/errors.hpp"

namespace tomo {

/// 2D grid of attenuation values, row-major. Values are nominally in [0, 1.2]
/// for phantoms but may go negative during iterative reconstruction.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, double fill = 0.0);

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Image& other) const {
        return width == other.width && height == other.height;
    }
};

/// Rectangular region of interest, inclusive pixel bounds.
struct RoI {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
    bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// Parallel-beam acquisition geometry: view angles plus a linear detector.
struct Geometry {
    int num_views = 0;
    std::vector<double> angles; // radians, strictly increasing in [0, pi)
    int num_bins = 0;
    double bin_spacing = 1.0; // detector pitch in pixel units

    /// Equispaced angles k*pi/num_views, the default acquisition pattern.
    static Geometry equispaced(int num_views, int num_bins, double bin_spacing = 1.0);

    /// Throws ConfigError if the angle list or detector description is invalid.
    void validate() const;

    /// Throws ConfigError unless num_bins * bin_spacing covers the image diagonal.
    void validate_coverage(int width, int height) const;

    /// Detector coordinate of bin b, centered on the detector midline.
    double bin_center(int b) const { return (b - 0.5 * (num_bins - 1)) * bin_spacing; }
};

/// Projection measurements indexed (view, bin), row-major over views.
struct Sinogram {
    Geometry geometry;
    std::vector<double> data;

    Sinogram() = default;
    explicit Sinogram(Geometry geom)
        : geometry(std::move(geom)),
          data(static_cast<std::size_t>(geometry.num_views) * geometry.num_bins, 0.0) {}

    double& at(int view, int bin) {
        return data[static_cast<std::size_t>(view) * geometry.num_bins + bin];
    }
    double at(int view, int bin) const {
        return data[static_cast<std::size_t>(view) * geometry.num_bins + bin];
    }
};

/// Per-pixel prior weights, values in (0, 1]; 1 means "no new change here".
struct WeightsMap {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    WeightsMap() = default;
    WeightsMap(int w, int h, double fill = 1.0);

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    bool matches(const Image& img) const {
        return width == img.width && height == img.height;
    }

    /// Throws ConfigError unless every value lies in (0, 1].
    void validate() const;
};

/// Copies the rectangle [roi.x0..x1] x [roi.y0..y1] out of img.
/// Throws BoundsError if the region is not inside the image.
Image roi_extract(const Image& img, const RoI& roi);

// Dense-vector helpers shared by the solvers.
double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

inline double image_diagonal(int width, int height) {
    return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

} // namespace tomo
