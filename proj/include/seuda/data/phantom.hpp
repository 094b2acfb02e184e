#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "seuda/core/config.hpp"
#include "seuda/core/rng.hpp"
#include "seuda/data/image.hpp"

namespace seuda::data {

// Intensity appearance of one domain. Applied after lobe/background
// levels are painted: blur -> gamma -> contrast (about 128) -> noise.
struct IntensityModel {
    double bg_level = 200.0;
    double lobe_level = 60.0;
    double gamma = 1.0;
    double contrast = 1.0;
    double noise_sigma = 6.0;
};

struct PhantomParams {
    int working_size = 64;
    // Lobe geometry, all as fractions of working_size. Two vertical
    // ellipses: class 1 (right lung) on the viewer-left half, class 2
    // on the viewer-right half.
    double center_jitter = 0.03;
    double axis_a_min = 0.10, axis_a_max = 0.15;  // horizontal semi-axis
    double axis_b_min = 0.20, axis_b_max = 0.30;  // vertical semi-axis
    IntensityModel intensity;
    Domain domain = Domain::source;
    std::uint64_t seed = 0;

    static constexpr double kRightCx = 0.28, kLeftCx = 0.72, kCy = 0.50;
};

namespace detail {

inline void validate_phantom(const PhantomParams& p) {
    if (p.working_size < 8) throw std::invalid_argument("phantom: working_size must be >= 8");
    if (p.axis_a_min > p.axis_a_max || p.axis_b_min > p.axis_b_max || p.axis_a_min <= 0 ||
        p.axis_b_min <= 0 || p.center_jitter < 0)
        throw std::invalid_argument("phantom: bad geometry ranges");
    const double j = p.center_jitter, a = p.axis_a_max, b = p.axis_b_max;
    const double margin = 0.01;
    const bool inside_x = PhantomParams::kRightCx - j - a > margin &&
                          PhantomParams::kLeftCx + j + a < 1.0 - margin;
    const bool inside_y =
        PhantomParams::kCy - j - b > margin && PhantomParams::kCy + j + b < 1.0 - margin;
    const bool disjoint =
        (PhantomParams::kLeftCx - j - a) - (PhantomParams::kRightCx + j + a) > margin;
    if (!inside_x || !inside_y || !disjoint)
        throw std::invalid_argument("phantom: geometry ranges cannot fit two disjoint lobes");
    const auto& m = p.intensity;
    if (m.bg_level < 0 || m.bg_level > 255 || m.lobe_level < 0 || m.lobe_level > 255)
        throw std::invalid_argument("phantom: intensity levels must lie in [0,255]");
    if (m.gamma <= 0 || m.noise_sigma < 0)
        throw std::invalid_argument("phantom: bad intensity model");
}

inline void box_blur3(Tensor<float>& img) {
    // separable [1 2 1]/4, replicated border
    const int h = img.height(), w = img.width();
    Tensor<float> tmp(1, h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(0, x - 1), xp = std::min(w - 1, x + 1);
            tmp.at(0, y, x) = 0.25f * img.at(0, y, xm) + 0.5f * img.at(0, y, x) +
                              0.25f * img.at(0, y, xp);
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int ym = std::max(0, y - 1), yp = std::min(h - 1, y + 1);
            img.at(0, y, x) = 0.25f * tmp.at(0, ym, x) + 0.5f * tmp.at(0, y, x) +
                              0.25f * tmp.at(0, yp, x);
        }
}

}  // namespace detail

// Generates n labeled phantoms. Geometry draws depend only on (seed,
// item index), so two parameter sets differing only in their intensity
// model and domain produce identical LabelMaps.
inline Dataset generate_phantoms(const PhantomParams& params, int n) {
    if (n < 1) throw std::invalid_argument("generate_phantoms: n must be >= 1");
    detail::validate_phantom(params);

    const int S = params.working_size;
    Dataset ds;
    ds.domain = params.domain;
    const std::string prefix = to_string(params.domain);

    for (int i = 0; i < n; ++i) {
        Rng geom = Rng::stream(params.seed, "phantom-geom-" + std::to_string(i));
        struct Lobe {
            double cx, cy, a, b;
        };
        auto draw_lobe = [&](double base_cx) {
            Lobe l;
            l.cx = base_cx + geom.uniform(-params.center_jitter, params.center_jitter);
            l.cy = PhantomParams::kCy + geom.uniform(-params.center_jitter, params.center_jitter);
            l.a = geom.uniform(params.axis_a_min, params.axis_a_max);
            l.b = geom.uniform(params.axis_b_min, params.axis_b_max);
            return l;
        };
        const Lobe right = draw_lobe(PhantomParams::kRightCx);
        const Lobe left = draw_lobe(PhantomParams::kLeftCx);

        DatasetItem item;
        item.case_id = prefix + "-" + std::to_string(1000 + i).substr(1);
        LabelMap mask(S, S);
        Image img(S, S);
        img.domain = params.domain;

        auto inside = [&](const Lobe& l, int y, int x) {
            const double dx = (x + 0.5) / S - l.cx;
            const double dy = (y + 0.5) / S - l.cy;
            return dx * dx / (l.a * l.a) + dy * dy / (l.b * l.b) <= 1.0;
        };
        for (int y = 0; y < S; ++y)
            for (int x = 0; x < S; ++x) {
                std::uint8_t cls = kClassBackground;
                if (inside(right, y, x)) cls = kClassRightLung;
                else if (inside(left, y, x)) cls = kClassLeftLung;
                mask.at(y, x) = cls;
                img.at(y, x) = static_cast<float>(cls == kClassBackground
                                                      ? params.intensity.bg_level
                                                      : params.intensity.lobe_level);
            }

        detail::box_blur3(img.pixels);

        Rng noise = Rng::stream(params.seed, "phantom-noise-" + prefix + "-" + std::to_string(i));
        const auto& m = params.intensity;
        for (std::size_t px = 0; px < img.pixels.size(); ++px) {
            double v = img.pixels[px];
            v = 255.0 * std::pow(std::clamp(v / 255.0, 0.0, 1.0), m.gamma);
            v = 128.0 + (v - 128.0) * m.contrast;
            if (m.noise_sigma > 0) v += noise.normal(0.0, m.noise_sigma);
            img.pixels[px] = static_cast<float>(std::clamp(v, 0.0, 255.0));
        }

        item.image = std::move(img);
        item.mask = std::move(mask);
        ds.items.push_back(std::move(item));
    }
    return ds;
}

// Parses one domain's intensity model from a flat config, keys prefixed
// e.g. "source." / "target.". Geometry and size keys are unprefixed and
// shared between domains.
inline PhantomParams phantom_params_from_config(const KeyValueConfig& cfg,
                                                const std::string& prefix, Domain domain,
                                                std::uint64_t seed) {
    PhantomParams p;
    p.working_size = cfg.get_int("working_size", p.working_size);
    p.center_jitter = cfg.get_double("center_jitter", p.center_jitter);
    p.axis_a_min = cfg.get_double("axis_a_min", p.axis_a_min);
    p.axis_a_max = cfg.get_double("axis_a_max", p.axis_a_max);
    p.axis_b_min = cfg.get_double("axis_b_min", p.axis_b_min);
    p.axis_b_max = cfg.get_double("axis_b_max", p.axis_b_max);
    p.intensity.bg_level = cfg.get_double(prefix + ".bg_level", p.intensity.bg_level);
    p.intensity.lobe_level = cfg.get_double(prefix + ".lobe_level", p.intensity.lobe_level);
    p.intensity.gamma = cfg.get_double(prefix + ".gamma", p.intensity.gamma);
    p.intensity.contrast = cfg.get_double(prefix + ".contrast", p.intensity.contrast);
    p.intensity.noise_sigma = cfg.get_double(prefix + ".noise_sigma", p.intensity.noise_sigma);
    p.domain = domain;
    p.seed = seed;
    return p;
}

}  // namespace seuda::data
