#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "seuda/data/image.hpp"

namespace seuda::metrics {

namespace detail {

// Boundary pixels of one class: class pixels with at least one
// 4-neighbour outside the class; the frame edge counts as outside.
inline std::vector<int> boundary_pixels(const data::LabelMap& m, int cls) {
    const int h = m.height(), w = m.width();
    std::vector<int> out;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (m.at(y, x) != cls) continue;
            const bool edge = y == 0 || y == h - 1 || x == 0 || x == w - 1 ||
                              m.at(y - 1, x) != cls || m.at(y + 1, x) != cls ||
                              m.at(y, x - 1) != cls || m.at(y, x + 1) != cls;
            if (edge) out.push_back(y * w + x);
        }
    return out;
}

// Large finite stand-in for "no site"; true squared distances stay far
// below it, and keeping it finite avoids inf-inf in the envelope math.
inline constexpr double kFar = 1e18;

// Felzenszwalb-Huttenlocher 1-D squared distance transform
// (lower envelope of parabolas). Exact for integer site positions.
inline void edt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                   std::vector<double>& z, int n) {
    int k = 0;
    v[0] = 0;
    z[0] = -kFar;
    z[1] = kFar;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kFar;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

// Exact squared Euclidean distance to the nearest site pixel.
inline std::vector<double> edt_squared(const std::vector<int>& sites, int h, int w) {
    std::vector<double> g(static_cast<std::size_t>(h) * w, kFar);
    for (int px : sites) g[px] = 0.0;

    const int n = std::max(h, w);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);

    // columns
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = g[static_cast<std::size_t>(y) * w + x];
        edt_1d(f, d, v, z, h);
        for (int y = 0; y < h; ++y) g[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    // rows
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = g[static_cast<std::size_t>(y) * w + x];
        edt_1d(f, d, v, z, w);
        for (int x = 0; x < w; ++x) g[static_cast<std::size_t>(y) * w + x] = d[x];
    }
    return g;
}

}  // namespace detail

// Symmetric average surface distance in millimetres. Distances are
// pixel-centre Euclidean, computed with an exact distance transform.
inline double asd(const data::LabelMap& pred, const data::LabelMap& gt, int cls,
                  double spacing_mm) {
    if (pred.height() != gt.height() || pred.width() != gt.width())
        throw std::invalid_argument("asd: shape mismatch");

    const auto bp = detail::boundary_pixels(pred, cls);
    const auto bg = detail::boundary_pixels(gt, cls);
    if (bp.empty() || bg.empty()) throw std::runtime_error("ASD undefined: empty mask");

    const int h = pred.height(), w = pred.width();
    const auto dist_to_gt = detail::edt_squared(bg, h, w);
    const auto dist_to_pred = detail::edt_squared(bp, h, w);

    double total = 0.0;
    for (int px : bp) total += std::sqrt(dist_to_gt[px]);
    for (int px : bg) total += std::sqrt(dist_to_pred[px]);
    return total / static_cast<double>(bp.size() + bg.size()) * spacing_mm;
}

}  // namespace seuda::metrics
