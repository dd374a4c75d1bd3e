#include "tomo/projector.hpp"

#include <cmath>

#include "tomo/parallel.hpp"

namespace tomo {

namespace {

struct RayPath {
    double x0, y0;   // first sample, image coordinates
    double dx, dy;   // per-sample increment
    int num_samples;
};

// Sample count depends only on the image size, so every ray of a geometry
// shares one sampling schedule.
int sample_count(int width, int height) {
    double half_span = 0.5 * image_diagonal(width, height) + 1.0;
    return static_cast<int>(std::floor(2.0 * half_span / kRayStep)) + 1;
}

RayPath make_ray(double cos_a, double sin_a, double s, int width, int height) {
    double half_span = 0.5 * image_diagonal(width, height) + 1.0;
    double cx = 0.5 * (width - 1);
    double cy = 0.5 * (height - 1);
    RayPath r;
    r.num_samples = sample_count(width, height);
    // p(t) = s*(cos a, sin a) + t*(-sin a, cos a), t from -half_span upward
    r.x0 = s * cos_a + half_span * sin_a + cx;
    r.y0 = s * sin_a - half_span * cos_a + cy;
    r.dx = -kRayStep * sin_a;
    r.dy = kRayStep * cos_a;
    return r;
}

double integrate_ray(const Image& img, const RayPath& ray) {
    const int w = img.width;
    const int h = img.height;
    const double* px = img.data.data();
    double x = ray.x0;
    double y = ray.y0;
    double acc = 0.0;
    for (int k = 0; k < ray.num_samples; ++k, x += ray.dx, y += ray.dy) {
        int ix = static_cast<int>(std::floor(x));
        int iy = static_cast<int>(std::floor(y));
        if (ix < -1 || ix >= w || iy < -1 || iy >= h) continue;
        double fx = x - ix;
        double fy = y - iy;
        if (ix >= 0 && ix + 1 < w && iy >= 0 && iy + 1 < h) {
            const double* row = px + static_cast<std::size_t>(iy) * w + ix;
            acc += (1.0 - fy) * ((1.0 - fx) * row[0] + fx * row[1]) +
                   fy * ((1.0 - fx) * row[w] + fx * row[w + 1]);
        } else {
            // border: neighbors outside the grid contribute zero
            double v = 0.0;
            if (iy >= 0) {
                if (ix >= 0) v += (1.0 - fx) * (1.0 - fy) * px[static_cast<std::size_t>(iy) * w + ix];
                if (ix + 1 < w) v += fx * (1.0 - fy) * px[static_cast<std::size_t>(iy) * w + ix + 1];
            }
            if (iy + 1 < h) {
                if (ix >= 0) v += (1.0 - fx) * fy * px[static_cast<std::size_t>(iy + 1) * w + ix];
                if (ix + 1 < w) v += fx * fy * px[static_cast<std::size_t>(iy + 1) * w + ix + 1];
            }
            acc += v;
        }
    }
    return acc * kRayStep;
}

void scatter_ray(Image& img, const RayPath& ray, double value) {
    const int w = img.width;
    const int h = img.height;
    double* px = img.data.data();
    const double weighted = value * kRayStep;
    double x = ray.x0;
    double y = ray.y0;
    for (int k = 0; k < ray.num_samples; ++k, x += ray.dx, y += ray.dy) {
        int ix = static_cast<int>(std::floor(x));
        int iy = static_cast<int>(std::floor(y));
        if (ix < -1 || ix >= w || iy < -1 || iy >= h) continue;
        double fx = x - ix;
        double fy = y - iy;
        if (ix >= 0 && ix + 1 < w && iy >= 0 && iy + 1 < h) {
            double* row = px + static_cast<std::size_t>(iy) * w + ix;
            row[0] += (1.0 - fx) * (1.0 - fy) * weighted;
            row[1] += fx * (1.0 - fy) * weighted;
            row[w] += (1.0 - fx) * fy * weighted;
            row[w + 1] += fx * fy * weighted;
        } else {
            if (iy >= 0) {
                if (ix >= 0) px[static_cast<std::size_t>(iy) * w + ix] += (1.0 - fx) * (1.0 - fy) * weighted;
                if (ix + 1 < w) px[static_cast<std::size_t>(iy) * w + ix + 1] += fx * (1.0 - fy) * weighted;
            }
            if (iy + 1 < h) {
                if (ix >= 0) px[static_cast<std::size_t>(iy + 1) * w + ix] += (1.0 - fx) * fy * weighted;
                if (ix + 1 < w) px[static_cast<std::size_t>(iy + 1) * w + ix + 1] += fx * fy * weighted;
            }
        }
    }
}

} // namespace

Sinogram forward_project(const Image& img, const Geometry& geom) {
    geom.validate_coverage(img.width, img.height);
    Sinogram sino(geom);
    parallel_for(static_cast<std::size_t>(geom.num_views), [&](std::size_t v) {
        double cos_a = std::cos(geom.angles[v]);
        double sin_a = std::sin(geom.angles[v]);
        for (int b = 0; b < geom.num_bins; ++b) {
            RayPath ray = make_ray(cos_a, sin_a, geom.bin_center(b), img.width, img.height);
            sino.at(static_cast<int>(v), b) = integrate_ray(img, ray);
        }
    });
    return sino;
}

void forward_project_view(const Image& img, const Geometry& geom, int view, double* out_bins) {
    double cos_a = std::cos(geom.angles[view]);
    double sin_a = std::sin(geom.angles[view]);
    for (int b = 0; b < geom.num_bins; ++b) {
        RayPath ray = make_ray(cos_a, sin_a, geom.bin_center(b), img.width, img.height);
        out_bins[b] = integrate_ray(img, ray);
    }
}

void back_project_view(const double* view_bins, const Geometry& geom, int view, Image& accum) {
    double cos_a = std::cos(geom.angles[view]);
    double sin_a = std::sin(geom.angles[view]);
    for (int b = 0; b < geom.num_bins; ++b) {
        RayPath ray = make_ray(cos_a, sin_a, geom.bin_center(b), accum.width, accum.height);
        scatter_ray(accum, ray, view_bins[b]);
    }
}

Image back_project(const Sinogram& sino, int width, int height) {
    const Geometry& geom = sino.geometry;
    geom.validate_coverage(width, height);
    if (sino.data.size() != static_cast<std::size_t>(geom.num_views) * geom.num_bins)
        throw ConfigError("sinogram payload does not match its geometry");

    // Fixed chunking over views; partials are reduced in chunk order so the
    // result is independent of the worker count.
    const std::size_t nv = static_cast<std::size_t>(geom.num_views);
    const std::size_t num_chunks = std::min<std::size_t>(16, nv);
    std::vector<Image> partials(num_chunks, Image(width, height));
    parallel_for_chunked(nv, num_chunks, [&](std::size_t lo, std::size_t hi) {
        // recover the chunk id from its fixed lower bound
        std::size_t c = lo * num_chunks / nv;
        while ((c + 1) * nv / num_chunks <= lo) ++c;
        Image& part = partials[c];
        for (std::size_t v = lo; v < hi; ++v)
            back_project_view(&sino.data[v * geom.num_bins], geom, static_cast<int>(v), part);
    });

    Image out(width, height);
    for (const Image& part : partials)
        for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += part.data[i];
    return out;
}

void extract_ray_weights(const Geometry& geom, int view, int bin, int width, int height,
                         std::vector<double>& scratch, std::vector<int>& touched) {
    scratch.resize(static_cast<std::size_t>(width) * height);
    touched.clear();
    double cos_a = std::cos(geom.angles[view]);
    double sin_a = std::sin(geom.angles[view]);
    RayPath ray = make_ray(cos_a, sin_a, geom.bin_center(bin), width, height);

    auto add = [&](int ix, int iy, double w) {
        if (w == 0.0) return; // weights are non-negative, so nonzero marks membership
        int idx = iy * width + ix;
        if (scratch[idx] == 0.0) touched.push_back(idx);
        scratch[idx] += w;
    };

    double x = ray.x0;
    double y = ray.y0;
    for (int k = 0; k < ray.num_samples; ++k, x += ray.dx, y += ray.dy) {
        int ix = static_cast<int>(std::floor(x));
        int iy = static_cast<int>(std::floor(y));
        if (ix < -1 || ix >= width || iy < -1 || iy >= height) continue;
        double fx = x - ix;
        double fy = y - iy;
        if (iy >= 0) {
            if (ix >= 0) add(ix, iy, (1.0 - fx) * (1.0 - fy) * kRayStep);
            if (ix + 1 < width) add(ix + 1, iy, fx * (1.0 - fy) * kRayStep);
        }
        if (iy + 1 < height) {
            if (ix >= 0) add(ix, iy + 1, (1.0 - fx) * fy * kRayStep);
            if (ix + 1 < width) add(ix + 1, iy + 1, fx * fy * kRayStep);
        }
    }
}

} // namespace tomo
