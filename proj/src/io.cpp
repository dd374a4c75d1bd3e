#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "tomo/errors.hpp"
#include "tomo/pipeline.hpp"

namespace tomo {

namespace {

constexpr char kMagic[4] = {'T', 'P', 'R', 'I'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kKindImage = 1;
constexpr std::uint32_t kKindSinogram = 2;
constexpr std::uint32_t kKindWeights = 3;
constexpr std::uint64_t kMaxElements = 1ull << 30; // reject implausible headers

struct Reader {
    std::ifstream f;
    std::string path;
    std::uint64_t offset = 0;

    explicit Reader(const std::string& p) : f(p, std::ios::binary), path(p) {
        if (!f) throw FormatError(path + ": cannot open for reading");
    }

    void read(void* dst, std::size_t n, const char* what) {
        f.read(static_cast<char*>(dst), (std::streamsize)n);
        const std::size_t got = (std::size_t)f.gcount();
        if (got != n)
            throw FormatError(path + ": truncated " + what + " at byte " +
                              std::to_string(offset) + " (expected " + std::to_string(n) +
                              " bytes, got " + std::to_string(got) + ")");
        offset += n;
    }

    std::uint32_t read_u32(const char* what) {
        std::uint32_t v;
        read(&v, sizeof v, what);
        return v;
    }

    double read_f64(const char* what) {
        double v;
        read(&v, sizeof v, what);
        return v;
    }

    void read_payload(std::vector<double>& out, std::uint64_t count) {
        if (count > kMaxElements)
            throw FormatError(path + ": implausible element count " + std::to_string(count) +
                              " at byte " + std::to_string(offset));
        out.resize(count);
        read(out.data(), count * sizeof(double), "payload");
        f.peek();
        if (!f.eof())
            throw FormatError(path + ": trailing bytes after payload at byte " +
                              std::to_string(offset));
    }
};

struct Writer {
    std::ofstream f;
    std::string path;

    explicit Writer(const std::string& p) : f(p, std::ios::binary | std::ios::trunc), path(p) {
        if (!f) throw FormatError(path + ": cannot open for writing");
    }

    void write(const void* src, std::size_t n) { f.write(static_cast<const char*>(src), (std::streamsize)n); }
    void write_u32(std::uint32_t v) { write(&v, sizeof v); }
    void write_f64(double v) { write(&v, sizeof v); }

    void finish() {
        f.flush();
        if (!f) throw FormatError(path + ": write failed");
    }
};

std::uint32_t read_header(Reader& r, std::uint32_t expected_kind) {
    char magic[4];
    r.read(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError(r.path + ": bad magic at byte 0 (not a TPRI file)");
    const std::uint32_t version = r.read_u32("version");
    if (version != kVersion)
        throw FormatError(r.path + ": unsupported version " + std::to_string(version) +
                          " at byte 4 (expected " + std::to_string(kVersion) + ")");
    const std::uint32_t kind = r.read_u32("kind");
    if (kind != expected_kind)
        throw FormatError(r.path + ": kind " + std::to_string(kind) + " at byte 8 (expected " +
                          std::to_string(expected_kind) + ")");
    return kind;
}

void write_header(Writer& w, std::uint32_t kind) {
    w.write(kMagic, 4);
    w.write_u32(kVersion);
    w.write_u32(kind);
}

void save_grid(const std::vector<double>& data, int width, int height, std::uint32_t kind,
               const std::string& path) {
    Writer w(path);
    write_header(w, kind);
    w.write_u32((std::uint32_t)width);
    w.write_u32((std::uint32_t)height);
    w.write(data.data(), data.size() * sizeof(double));
    w.finish();
}

void load_grid(std::vector<double>& data, int& width, int& height, std::uint32_t kind,
               const std::string& path) {
    Reader r(path);
    read_header(r, kind);
    const std::uint32_t w = r.read_u32("width");
    const std::uint32_t h = r.read_u32("height");
    if (w == 0 || h == 0 || (std::uint64_t)w * h > kMaxElements)
        throw FormatError(path + ": implausible dimensions " + std::to_string(w) + "x" +
                          std::to_string(h) + " at byte 12");
    r.read_payload(data, (std::uint64_t)w * h);
    width = (int)w;
    height = (int)h;
}

} // namespace

void save_image(const Image& img, const std::string& path) {
    save_grid(img.data, img.width, img.height, kKindImage, path);
}

Image load_image(const std::string& path) {
    Image img;
    load_grid(img.data, img.width, img.height, kKindImage, path);
    return img;
}

void save_weights(const WeightsMap& weights, const std::string& path) {
    save_grid(weights.data, weights.width, weights.height, kKindWeights, path);
}

WeightsMap load_weights(const std::string& path) {
    WeightsMap w;
    load_grid(w.data, w.width, w.height, kKindWeights, path);
    for (double v : w.data)
        if (!(v > 0.0 && v <= 1.0))
            throw FormatError(path + ": weight value " + std::to_string(v) + " outside (0, 1]");
    return w;
}

void save_sinogram(const Sinogram& sino, const std::string& path) {
    Writer w(path);
    write_header(w, kKindSinogram);
    w.write_u32((std::uint32_t)sino.geometry.num_views);
    w.write_u32((std::uint32_t)sino.geometry.num_bins);
    w.write_f64(sino.geometry.bin_spacing);
    for (double a : sino.geometry.angles) w.write_f64(a);
    w.write(sino.data.data(), sino.data.size() * sizeof(double));
    w.finish();
}

Sinogram load_sinogram(const std::string& path) {
    Reader r(path);
    read_header(r, kKindSinogram);
    Geometry geom;
    const std::uint32_t views = r.read_u32("num_views");
    const std::uint32_t bins = r.read_u32("num_bins");
    if (views == 0 || bins == 0 || (std::uint64_t)views * bins > kMaxElements)
        throw FormatError(path + ": implausible geometry " + std::to_string(views) + " views x " +
                          std::to_string(bins) + " bins at byte 12");
    geom.num_views = (int)views;
    geom.num_bins = (int)bins;
    geom.bin_spacing = r.read_f64("bin_spacing");
    geom.angles.resize(views);
    for (std::uint32_t v = 0; v < views; ++v) geom.angles[v] = r.read_f64("angle");
    try {
        geom.validate();
    } catch (const ConfigError& e) {
        throw FormatError(path + ": invalid geometry block: " + e.what());
    }
    Sinogram sino(geom);
    r.read_payload(sino.data, (std::uint64_t)views * bins);
    return sino;
}

void save_pgm(const Image& img, const std::string& path, double scale) {
    if (!(scale > 0.0)) throw ConfigError("pgm scale must be positive");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError(path + ": cannot open for writing");
    f << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> row((std::size_t)img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double v = std::clamp(img.at(x, y), 0.0, scale) / scale;
            row[(std::size_t)x] = (unsigned char)std::lround(v * 255.0);
        }
        f.write(reinterpret_cast<const char*>(row.data()), img.width);
    }
    f.flush();
    if (!f) throw FormatError(path + ": write failed");
}

} // namespace tomo
