#include "tomo/core.hpp"

#include <cmath>
#include <string>

namespace tomo {

Image::Image(int w, int h, double fill) : width(w), height(h) {
    if (w < 1 || h < 1)
        throw ConfigError("image dimensions must be at least 1x1, got " + std::to_string(w) +
                          "x" + std::to_string(h));
    data.assign(static_cast<std::size_t>(w) * h, fill);
}

Geometry Geometry::equispaced(int num_views, int num_bins, double bin_spacing) {
    Geometry g;
    g.num_views = num_views;
    g.num_bins = num_bins;
    g.bin_spacing = bin_spacing;
    g.angles.resize(num_views > 0 ? num_views : 0);
    const double pi = std::acos(-1.0);
    for (int v = 0; v < num_views; ++v) g.angles[v] = v * pi / num_views;
    g.validate();
    return g;
}

void Geometry::validate() const {
    const double pi = std::acos(-1.0);
    if (num_views < 1) throw ConfigError("geometry needs at least one view");
    if (static_cast<int>(angles.size()) != num_views)
        throw ConfigError("angle list length " + std::to_string(angles.size()) +
                          " does not match num_views " + std::to_string(num_views));
    if (num_bins < 1) throw ConfigError("geometry needs at least one detector bin");
    if (!(bin_spacing > 0.0)) throw ConfigError("bin_spacing must be positive");
    for (int v = 0; v < num_views; ++v) {
        if (angles[v] < 0.0 || angles[v] >= pi)
            throw ConfigError("view angle " + std::to_string(angles[v]) +
                              " outside [0, pi)");
        if (v > 0 && !(angles[v] > angles[v - 1]))
            throw ConfigError("view angles must be strictly increasing");
    }
}

void Geometry::validate_coverage(int width, int height) const {
    validate();
    double span = num_bins * bin_spacing;
    if (span + 1e-9 < image_diagonal(width, height))
        throw ConfigError("detector span " + std::to_string(span) +
                          " does not cover image diagonal " +
                          std::to_string(image_diagonal(width, height)));
}

WeightsMap::WeightsMap(int w, int h, double fill) : width(w), height(h) {
    if (w < 1 || h < 1)
        throw ConfigError("weights dimensions must be at least 1x1, got " + std::to_string(w) +
                          "x" + std::to_string(h));
    data.assign(static_cast<std::size_t>(w) * h, fill);
}

void WeightsMap::validate() const {
    if (static_cast<std::size_t>(width) * height != data.size())
        throw ConfigError("weights data length does not match its dimensions");
    for (double v : data)
        if (!(v > 0.0 && v <= 1.0))
            throw ConfigError("weight value " + std::to_string(v) + " outside (0, 1]");
}

Image roi_extract(const Image& img, const RoI& roi) {
    if (roi.x0 < 0 || roi.y0 < 0 || roi.x0 > roi.x1 || roi.y0 > roi.y1 ||
        roi.x1 >= img.width || roi.y1 >= img.height)
        throw BoundsError("roi (" + std::to_string(roi.x0) + "," + std::to_string(roi.y0) +
                          ")-(" + std::to_string(roi.x1) + "," + std::to_string(roi.y1) +
                          ") outside image " + std::to_string(img.width) + "x" +
                          std::to_string(img.height));
    Image out(roi.width(), roi.height());
    for (int y = roi.y0; y <= roi.y1; ++y)
        for (int x = roi.x0; x <= roi.x1; ++x)
            out.at(x - roi.x0, y - roi.y0) = img.at(x, y);
    return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

} // namespace tomo
