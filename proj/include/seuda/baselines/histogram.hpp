#pragma once

#include <array>
#include <fstream>
#include <vector>

#include "seuda/data/image.hpp"

namespace seuda::baselines {

inline constexpr int kHistBins = 256;

using Histogram = std::vector<double>;  // normalized, kHistBins entries

inline int hist_bin(float v) {
    const int b = static_cast<int>(v);
    return b < 0 ? 0 : b >= kHistBins ? kHistBins - 1 : b;
}

// Pooled intensity histogram over every pixel of every image in the
// dataset, normalized to sum 1.
inline Histogram build_reference_histogram(const data::Dataset& source_train) {
    if (source_train.empty())
        throw std::invalid_argument("build_reference_histogram: empty dataset");
    Histogram h(kHistBins, 0.0);
    double n = 0;
    for (const auto& item : source_train.items) {
        for (std::size_t i = 0; i < item.image.pixels.size(); ++i)
            h[hist_bin(item.image.pixels[i])] += 1.0;
        n += static_cast<double>(item.image.pixels.size());
    }
    for (auto& v : h) v /= n;
    return h;
}

// Classic CDF matching: each pixel value v maps to the smallest
// reference value r with CDF_ref(r) >= CDF_img(v). Monotone
// non-decreasing in v; output values are bin indices in [0,255].
inline data::Image histogram_match(const data::Image& image, const Histogram& reference) {
    if (reference.size() != kHistBins)
        throw std::invalid_argument("histogram_match: reference must have 256 bins");

    std::array<double, kHistBins> cdf_img{};
    for (std::size_t i = 0; i < image.pixels.size(); ++i) cdf_img[hist_bin(image.pixels[i])] += 1.0;
    double acc = 0;
    for (auto& v : cdf_img) {
        acc += v;
        v = acc / static_cast<double>(image.pixels.size());
    }

    std::array<double, kHistBins> cdf_ref{};
    acc = 0;
    for (int b = 0; b < kHistBins; ++b) {
        acc += reference[b];
        cdf_ref[b] = acc;
    }

    std::array<float, kHistBins> lut{};
    int r = 0;
    for (int v = 0; v < kHistBins; ++v) {
        while (r < kHistBins - 1 && cdf_ref[r] < cdf_img[v] - 1e-12) ++r;
        lut[v] = static_cast<float>(r);
    }

    data::Image out = image;
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = lut[hist_bin(out.pixels[i])];
    return out;
}

// 256-line text artifact, one probability per line.
inline void save_histogram(const Histogram& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write histogram " + path);
    out.precision(17);
    for (double v : h) out << v << "\n";
}

inline Histogram load_histogram(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open histogram " + path);
    Histogram h;
    double v;
    while (in >> v) h.push_back(v);
    if (h.size() != kHistBins)
        throw std::runtime_error(path + ": expected 256 histogram lines");
    return h;
}

}  // namespace seuda::baselines
