#pragma once

#include <stdexcept>

#include "seuda/data/image.hpp"

namespace seuda::metrics {

struct OverlapResult {
    double dice = 0, recall = 0, precision = 0;  // percent
};

// Pixel-count overlap metrics for one class. Empty-set conventions:
// both masks empty -> all 100; exactly one empty -> dice 0 and the
// undefined ratio 0.
inline OverlapResult overlap_metrics(const data::LabelMap& pred, const data::LabelMap& gt,
                                     int class_id) {
    if (pred.height() != gt.height() || pred.width() != gt.width())
        throw std::invalid_argument("overlap_metrics: shape mismatch");
    if (class_id != data::kClassRightLung && class_id != data::kClassLeftLung)
        throw std::invalid_argument("overlap_metrics: class_id must be 1 or 2");

    std::size_t p = 0, g = 0, both = 0;
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        const bool in_p = pred.labels[i] == class_id;
        const bool in_g = gt.labels[i] == class_id;
        p += in_p;
        g += in_g;
        both += in_p && in_g;
    }

    OverlapResult r;
    if (p == 0 && g == 0) {
        r.dice = r.recall = r.precision = 100.0;
        return r;
    }
    r.dice = 200.0 * static_cast<double>(both) / static_cast<double>(p + g);
    r.recall = g == 0 ? 0.0 : 100.0 * static_cast<double>(both) / static_cast<double>(g);
    r.precision = p == 0 ? 0.0 : 100.0 * static_cast<double>(both) / static_cast<double>(p);
    return r;
}

}  // namespace seuda::metrics
