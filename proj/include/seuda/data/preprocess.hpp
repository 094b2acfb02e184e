#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seuda/data/image.hpp"

namespace seuda::data {

// Bilinear resample with the pixel-center convention; a same-size call is
// an exact copy so preprocessing is idempotent at fixed working size.
inline Tensor<float> resize_bilinear(const Tensor<float>& src, int out_h, int out_w) {
    if (src.empty()) throw std::invalid_argument("resize_bilinear: empty input");
    if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("resize_bilinear: bad size");
    if (src.height() == out_h && src.width() == out_w) return src;

    Tensor<float> dst(src.channels(), out_h, out_w);
    const double sy = static_cast<double>(src.height()) / out_h;
    const double sx = static_cast<double>(src.width()) / out_w;
    for (int c = 0; c < src.channels(); ++c) {
        for (int y = 0; y < out_h; ++y) {
            const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
            const int y0 = std::min(static_cast<int>(fy), src.height() - 1);
            const int y1 = std::min(y0 + 1, src.height() - 1);
            const double wy = fy - y0;
            for (int x = 0; x < out_w; ++x) {
                const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
                const int x0 = std::min(static_cast<int>(fx), src.width() - 1);
                const int x1 = std::min(x0 + 1, src.width() - 1);
                const double wx = fx - x0;
                const double top = (1.0 - wx) * src.at(c, y0, x0) + wx * src.at(c, y0, x1);
                const double bot = (1.0 - wx) * src.at(c, y1, x0) + wx * src.at(c, y1, x1);
                dst.at(c, y, x) = static_cast<float>((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return dst;
}

// Nearest-neighbour resample; labels must stay categorical.
inline LabelMap resize_nearest(const LabelMap& src, int out_h, int out_w) {
    if (src.empty()) throw std::invalid_argument("resize_nearest: empty input");
    if (src.height() == out_h && src.width() == out_w) return src;

    LabelMap dst(out_h, out_w);
    const double sy = static_cast<double>(src.height()) / out_h;
    const double sx = static_cast<double>(src.width()) / out_w;
    for (int y = 0; y < out_h; ++y) {
        const int yy = std::min(static_cast<int>((y + 0.5) * sy), src.height() - 1);
        for (int x = 0; x < out_w; ++x) {
            const int xx = std::min(static_cast<int>((x + 0.5) * sx), src.width() - 1);
            dst.at(y, x) = src.at(yy, xx);
        }
    }
    return dst;
}

// Per-image min-max rescale to [0,255]; a constant image maps to all zeros.
inline void rescale_minmax(Tensor<float>& px) {
    float lo = px[0], hi = px[0];
    for (std::size_t i = 0; i < px.size(); ++i) {
        lo = std::min(lo, px[i]);
        hi = std::max(hi, px[i]);
    }
    if (hi <= lo) {
        px.fill(0.0f);
        return;
    }
    const double range = static_cast<double>(hi) - lo;
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = static_cast<float>((static_cast<double>(px[i]) - lo) * 255.0 / range);
}

// Resize to working_size x working_size and rescale intensities to [0,255].
inline Image preprocess(const Image& image, int working_size) {
    if (image.empty()) throw std::invalid_argument("preprocess: empty image");
    if (working_size < 8) throw std::invalid_argument("preprocess: working_size must be >= 8");
    Image out;
    out.pixels = resize_bilinear(image.pixels, working_size, working_size);
    rescale_minmax(out.pixels);
    out.spacing_mm = image.spacing_mm *
                     (static_cast<float>(image.height()) / static_cast<float>(working_size));
    out.domain = image.domain;
    return out;
}

}  // namespace seuda::data
