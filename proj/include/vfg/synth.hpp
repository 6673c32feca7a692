// Procedural vertebra-column image generator with controllable center-body
// compression, a pixel-level height-reduction oracle, and labeled dataset
// generation with a CSV manifest.
#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vfg/common.hpp"
#include "vfg/image.hpp"

namespace vfg {

// Genant-style ordinal grade by fractional height reduction.
enum class Grade : int { G0 = 0, G1 = 1, G2 = 2, G3 = 3 };

inline int grade_value(Grade g) { return static_cast<int>(g); }

inline Grade grade_from_int(int v) {
    check(v >= 0 && v <= 3, "invalid-grade", "grade must be 0..3");
    return static_cast<Grade>(v);
}

constexpr double kMaxCompression = 0.75;

inline void check_compression(double c) {
    check(c >= 0.0 && c <= kMaxCompression, "invalid-compression",
          "compression must lie in [0, 0.75]");
}

// c <= 0.075 -> G0; <= 0.25 -> G1; <= 0.40 -> G2; else G3
inline Grade grade_from_compression(double c) {
    check_compression(c);
    if (c <= 0.075) return Grade::G0;
    if (c <= 0.25) return Grade::G1;
    if (c <= 0.40) return Grade::G2;
    return Grade::G3;
}

struct GeneratorConfig {
    int image_size = 32;
    int body_count = 3;        // stacked bodies; the middle one carries the fracture
    double gap_px = -1.0;      // -1: derived from image_size
    double margin_px = -1.0;   // -1: derived from image_size
    double body_width_frac = 0.62;  // body width as fraction of image width
    double wedge = 0.35;            // anterior wedge asymmetry of the height loss
    double edge_power = 6.0;        // superellipse exponent (rounded corners)
    double intensity_lo = 0.75;     // per-body brightness range
    double intensity_hi = 0.95;
    double background_lo = 0.02;
    double background_hi = 0.10;
    double width_jitter = 0.05;     // relative width variation per body
    double offset_jitter = 1.0;     // horizontal center jitter, pixels
    double noise_sigma = 0.05;
    int blur_radius = 1;            // box blur
    double oracle_threshold = 0.5;
    double oracle_strip_frac = 0.30;  // central column strip width / body width
    int supersample = 4;

    double gap() const { return gap_px > 0 ? gap_px : std::max(1.0, image_size / 16.0); }
    double margin() const { return margin_px > 0 ? margin_px : image_size / 16.0; }

    // Unscaled per-body height; the oracle's reference length.
    double body_height() const {
        return (image_size - 2.0 * margin() - (body_count - 1) * gap()) / body_count;
    }
    double body_width() const { return body_width_frac * image_size; }

    void validate() const {
        check(image_size >= 8, "invalid-config", "image_size too small");
        check(body_count >= 1, "invalid-config", "body_count must be >= 1");
        check(supersample >= 1 && blur_radius >= 0, "invalid-config", "bad raster params");
        check(body_height() >= 2.0, "invalid-config",
              "body heights + gaps exceed image height");
    }
};

namespace detail {

struct BodyShape {
    double cx, cy;       // center
    double half_w;
    double top, bottom;  // uncompressed edges
    double intensity;
    // per-column compressed edges; u in [0,1] across the body width
    double removal_frac = 0.0;  // base compression c
    double wedge = 0.0;
};

// Fraction of the unscaled height removed at horizontal position u.
// Anterior (u = 0) loses fastest; the column mean equals the base fraction.
inline double removal_at(const BodyShape& b, double u) {
    double r = b.removal_frac * (1.0 + b.wedge * (1.0 - 2.0 * u));
    return std::clamp(r, 0.0, 0.97);
}

inline bool inside_body(const BodyShape& b, double x, double y, double edge_power) {
    double u = (x - (b.cx - b.half_w)) / (2.0 * b.half_w);
    if (u < 0.0 || u > 1.0) return false;
    double h0 = b.bottom - b.top;
    double removed = removal_at(b, u) * h0;
    // top edge drops faster than the bottom rises, wedge-fracture style
    double top = b.top + 0.6 * removed;
    double bot = b.bottom - 0.4 * removed;
    double cy = 0.5 * (top + bot);
    double hh = 0.5 * (bot - top);
    if (hh <= 0.0) return false;
    double nx = std::abs(x - b.cx) / b.half_w;
    double ny = std::abs(y - cy) / hh;
    return std::pow(nx, edge_power) + std::pow(ny, edge_power) <= 1.0;
}

}  // namespace detail

// Deterministic given (compression, style_seed, config). The center body's
// height shrinks by `compression` toward its midline; neighbors untouched.
inline Image render_vertebra_column(double compression, std::uint64_t style_seed,
                                    const GeneratorConfig& cfg) {
    check_compression(compression);
    cfg.validate();

    Rng rng(style_seed);
    const int S = cfg.image_size;
    const double h0 = cfg.body_height();
    const double background = rng.uniform(cfg.background_lo, cfg.background_hi);
    // one intensity for all bodies, so neighbor plateaus calibrate the oracle
    const double intensity = rng.uniform(cfg.intensity_lo, cfg.intensity_hi);
    const int center = cfg.body_count / 2;

    std::vector<detail::BodyShape> bodies;
    for (int i = 0; i < cfg.body_count; ++i) {
        detail::BodyShape b;
        double slot_top = cfg.margin() + i * (h0 + cfg.gap());
        b.top = slot_top;
        b.bottom = slot_top + h0;
        b.cy = 0.5 * (b.top + b.bottom);
        b.half_w = 0.5 * cfg.body_width() * (1.0 + cfg.width_jitter * (2.0 * rng.uniform() - 1.0));
        b.cx = 0.5 * S + cfg.offset_jitter * (2.0 * rng.uniform() - 1.0);
        b.intensity = intensity;
        if (i == center) {
            b.removal_frac = compression;
            b.wedge = cfg.wedge;
        }
        bodies.push_back(b);
    }

    // coverage-based raster, then noise, then box blur
    Image img(S, S, 0.f);
    const int ss = cfg.supersample;
    const double inv_ss2 = 1.0 / (ss * ss);
    for (int r = 0; r < S; ++r) {
        for (int c = 0; c < S; ++c) {
            double acc = 0.0;
            for (int sy = 0; sy < ss; ++sy) {
                for (int sx = 0; sx < ss; ++sx) {
                    double y = r + (sy + 0.5) / ss;
                    double x = c + (sx + 0.5) / ss;
                    double v = background;
                    for (const auto& b : bodies) {
                        if (detail::inside_body(b, x, y, cfg.edge_power)) {
                            v = b.intensity;
                            break;
                        }
                    }
                    acc += v;
                }
            }
            img.at(r, c) = static_cast<float>(acc * inv_ss2);
        }
    }

    if (cfg.noise_sigma > 0.0) {
        for (auto& p : img.px)
            p += static_cast<float>(cfg.noise_sigma * rng.normal());
    }

    if (cfg.blur_radius > 0) {
        const int k = cfg.blur_radius;
        Image out(S, S);
        for (int r = 0; r < S; ++r) {
            for (int c = 0; c < S; ++c) {
                double acc = 0.0;
                int cnt = 0;
                for (int dr = -k; dr <= k; ++dr) {
                    for (int dc = -k; dc <= k; ++dc) {
                        int rr = r + dr, cc = c + dc;
                        if (rr < 0 || rr >= S || cc < 0 || cc >= S) continue;
                        acc += img.at(rr, cc);
                        ++cnt;
                    }
                }
                out.at(r, c) = static_cast<float>(acc / cnt);
            }
        }
        img = out;
    }

    for (auto& p : img.px) p = std::clamp(p, 0.f, 1.f);
    return img;
}

namespace detail {

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

}  // namespace detail

// Pixel oracle: per-column foreground row count of the center body, with
// fractional membership (v - background) / (plateau - background) per row,
// clamped to [0,1]. Box blur and anti-aliasing conserve column mass, so the
// fractional count recovers the sub-pixel height for any body width; integer
// counting would quantize away ~1px per edge at 32x32. The plateau comes from
// the unmodified neighbor bodies and the background from the image corners.
// The threshold only gates foreground detection. Averaged over a central
// column strip against the unscaled height.
inline double measure_height_reduction(const Image& img, const GeneratorConfig& cfg) {
    cfg.validate();
    check(img.h == cfg.image_size && img.w == cfg.image_size, "shape-mismatch",
          "image does not match generator config size");

    const double h0 = cfg.body_height();
    const int center = cfg.body_count / 2;
    const double slot_top = cfg.margin() + center * (h0 + cfg.gap());
    const double slot_bot = slot_top + h0;

    const double cx = 0.5 * cfg.image_size;
    const double half_strip = 0.5 * cfg.oracle_strip_frac * cfg.body_width();

    // background: image corners are clear of every body
    std::vector<double> corner;
    const int m = std::max(2, cfg.image_size / 16);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) {
            corner.push_back(img.at(r, c));
            corner.push_back(img.at(r, img.w - 1 - c));
            corner.push_back(img.at(img.h - 1 - r, c));
            corner.push_back(img.at(img.h - 1 - r, img.w - 1 - c));
        }
    const double lo = detail::median_of(corner);

    // plateau: core rows of the neighbor bodies within the strip
    std::vector<double> plateau;
    for (int body = 0; body < cfg.body_count; ++body) {
        if (body == center && cfg.body_count > 1) continue;
        double t0 = cfg.margin() + body * (h0 + cfg.gap());
        for (int c = 0; c < img.w; ++c) {
            if (std::abs(c + 0.5 - cx) > half_strip) continue;
            for (int r = 0; r < img.h; ++r) {
                double y = r + 0.5;
                if (y >= t0 + 0.3 * h0 && y <= t0 + 0.7 * h0) plateau.push_back(img.at(r, c));
            }
        }
    }
    const double hi = detail::median_of(plateau);
    if (!(hi > lo + 1e-6))
        fail("measurement-failed", "no body plateau detected above background");
    const double th = lo + cfg.oracle_threshold * (hi - lo);

    // slot rows plus blur bleed; the gap keeps neighbor bleed out of reach
    const double guard = static_cast<double>(cfg.blur_radius);
    int r_lo = std::max(0, static_cast<int>(std::floor(slot_top - guard - 0.5)));
    int r_hi = std::min(img.h - 1, static_cast<int>(std::ceil(slot_bot + guard - 0.5)));

    int cols = 0, hit_cols = 0;
    double sum_height = 0.0;
    for (int c = 0; c < img.w; ++c) {
        if (std::abs(c + 0.5 - cx) > half_strip) continue;
        ++cols;
        bool hit = false;
        double mass = 0.0;
        for (int r = r_lo; r <= r_hi; ++r) {
            double y = r + 0.5;
            if (y < slot_top - guard || y >= slot_bot + guard) continue;
            // no lower clamp: background noise stays zero-mean
            mass += std::min((img.at(r, c) - lo) / (hi - lo), 1.0);
            if (img.at(r, c) >= th) hit = true;
        }
        sum_height += std::clamp(mass, 0.0, h0);
        if (hit) ++hit_cols;
    }
    if (cols == 0 || hit_cols == 0)
        fail("measurement-failed", "no foreground found in center-body band");
    double measured = sum_height / cols;
    return 1.0 - measured / h0;
}

// ---------------------------------------------------------------------------
// Dataset generation

struct DatasetSpec {
    int n_train = 3000;
    int n_val = 300;
    int n_test = 500;
    double healthy_frac = 0.8;        // draw arm; healthy c ~ U[0, 0.05]
    double healthy_c_max = 0.05;
    double fractured_c_min = 0.10;    // the (0.05, 0.10) margin gap is never sampled
    double fractured_c_max = 0.70;
    double graded_frac = 0.5;         // fraction of fractured samples with exposed grade
    std::uint64_t seed = 1;
    bool write_raw = false;
    GeneratorConfig gen;

    void validate() const {
        check(n_train > 0 && n_val > 0 && n_test > 0, "invalid-spec",
              "split counts must be positive");
        check(healthy_frac >= 0.0 && healthy_frac <= 1.0, "invalid-spec",
              "healthy_frac must lie in [0,1]");
        check(graded_frac >= 0.0 && graded_frac <= 1.0, "invalid-spec",
              "graded_frac must lie in [0,1]");
        check(healthy_c_max < fractured_c_min, "invalid-spec",
              "healthy/fractured compression ranges must not overlap");
        check(fractured_c_max <= kMaxCompression, "invalid-spec",
              "fractured_c_max exceeds max compression");
        gen.validate();
    }

    // Mimics the source data imbalance (1248 fractured of 12019 slices).
    static DatasetSpec paper_like() {
        DatasetSpec s;
        s.healthy_frac = 1.0 - 1248.0 / 12019.0;
        return s;
    }
};

struct ManifestRecord {
    std::string filename;
    std::string split;  // train | val | test
    double compression = 0.0;
    Grade grade = Grade::G0;
    bool fractured = false;  // detector-training convention: grade >= G2
    bool graded = false;     // grade label exposed to training
};

struct DatasetManifest {
    std::vector<ManifestRecord> records;
    std::uint64_t seed = 0;
    GeneratorConfig gen;

    std::vector<const ManifestRecord*> split(const std::string& name) const {
        std::vector<const ManifestRecord*> out;
        for (const auto& r : records)
            if (r.split == name) out.push_back(&r);
        return out;
    }
};

inline void write_manifest_csv(const std::string& path, const DatasetManifest& m) {
    std::ofstream f(path, std::ios::binary);
    check(f.good(), "io-error", "cannot write manifest: " + path);
    f << "filename,split,compression,grade,fractured,graded\n";
    char buf[64];
    for (const auto& r : m.records) {
        std::snprintf(buf, sizeof(buf), "%.6f", r.compression);
        f << r.filename << ',' << r.split << ',' << buf << ',' << grade_value(r.grade) << ','
          << (r.fractured ? 1 : 0) << ',' << (r.graded ? 1 : 0) << '\n';
    }
}

inline DatasetManifest read_manifest_csv(const std::string& path) {
    std::ifstream f(path);
    check(f.good(), "io-error", "cannot read manifest: " + path);
    DatasetManifest m;
    std::string line;
    std::getline(f, line);
    check(line == "filename,split,compression,grade,fractured,graded", "io-error",
          "unexpected manifest header in " + path);
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        ManifestRecord r;
        std::string field;
        std::getline(ss, r.filename, ',');
        std::getline(ss, r.split, ',');
        std::getline(ss, field, ',');
        r.compression = std::stod(field);
        std::getline(ss, field, ',');
        r.grade = grade_from_int(std::stoi(field));
        std::getline(ss, field, ',');
        r.fractured = field == "1";
        std::getline(ss, field, ',');
        r.graded = field == "1";
        m.records.push_back(std::move(r));
    }
    return m;
}

// Renders every record to out_dir and writes manifest.csv alongside.
// Per-image seed = mix_seed(spec.seed, global index): regeneration is
// bit-identical and records are independent.
inline DatasetManifest generate_dataset(const DatasetSpec& spec, const std::string& out_dir) {
    spec.validate();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    DatasetManifest manifest;
    manifest.seed = spec.seed;
    manifest.gen = spec.gen;

    const std::pair<std::string, int> splits[] = {
        {"train", spec.n_train}, {"val", spec.n_val}, {"test", spec.n_test}};

    std::uint64_t index = 0;
    for (const auto& [split, count] : splits) {
        for (int i = 0; i < count; ++i, ++index) {
            Rng rng(mix_seed(spec.seed, index, /*stream=*/1));
            ManifestRecord r;
            r.split = split;
            char name[64];
            std::snprintf(name, sizeof(name), "%s_%06d.png", split.c_str(), i);
            r.filename = name;

            bool healthy_arm = rng.uniform() < spec.healthy_frac;
            r.compression = healthy_arm
                                ? rng.uniform(0.0, spec.healthy_c_max)
                                : rng.uniform(spec.fractured_c_min, spec.fractured_c_max);
            r.grade = grade_from_compression(r.compression);
            r.fractured = grade_value(r.grade) >= 2;
            r.graded = r.fractured && rng.uniform() < spec.graded_frac;

            Image img =
                render_vertebra_column(r.compression, mix_seed(spec.seed, index, 2), spec.gen);
            std::string path = (fs::path(out_dir) / r.filename).string();
            write_png_gray8(path, img);
            if (spec.write_raw)
                write_raw_f32(path.substr(0, path.size() - 4) + ".f32", img);
            manifest.records.push_back(std::move(r));
        }
    }
    write_manifest_csv((fs::path(out_dir) / "manifest.csv").string(), manifest);
    return manifest;
}

}  // namespace vfg
