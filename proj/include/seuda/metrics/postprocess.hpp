#pragma once

#include <functional>
#include <vector>

#include "seuda/data/image.hpp"

namespace seuda::metrics {

enum class Connectivity { four = 4, eight = 8 };

namespace detail {

// Flood-fill labelling over an arbitrary pixel predicate. Returns one
// entry per component: pixel indices in discovery (row-major) order, so
// front() is the component's lexicographically smallest (y,x).
inline std::vector<std::vector<int>> components(
    int h, int w, Connectivity conn, const std::function<bool(int)>& member) {
    std::vector<int> comp_of(static_cast<std::size_t>(h) * w, -1);
    std::vector<std::vector<int>> comps;
    std::vector<int> stack;

    const int dy4[] = {-1, 1, 0, 0}, dx4[] = {0, 0, -1, 1};
    const int dy8[] = {-1, 1, 0, 0, -1, -1, 1, 1}, dx8[] = {0, 0, -1, 1, -1, 1, -1, 1};
    const int n_nb = conn == Connectivity::four ? 4 : 8;
    const int* dy = conn == Connectivity::four ? dy4 : dy8;
    const int* dx = conn == Connectivity::four ? dx4 : dx8;

    for (int start = 0; start < h * w; ++start) {
        if (comp_of[start] != -1 || !member(start)) continue;
        const int id = static_cast<int>(comps.size());
        comps.emplace_back();
        stack.push_back(start);
        comp_of[start] = id;
        while (!stack.empty()) {
            const int px = stack.back();
            stack.pop_back();
            comps[id].push_back(px);
            const int y = px / w, x = px % w;
            for (int k = 0; k < n_nb; ++k) {
                const int ny = y + dy[k], nx = x + dx[k];
                if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                const int np = ny * w + nx;
                if (comp_of[np] == -1 && member(np)) {
                    comp_of[np] = id;
                    stack.push_back(np);
                }
            }
        }
    }
    return comps;
}

inline bool touches_border(const std::vector<int>& comp, int h, int w) {
    for (int px : comp) {
        const int y = px / w, x = px % w;
        if (y == 0 || y == h - 1 || x == 0 || x == w - 1) return true;
    }
    return false;
}

}  // namespace detail

// Largest-connected-component selection followed by hole filling, per
// lung class. Ties on component size go to the component with the
// lexicographically smallest top-left pixel. A hole is a component of
// the class complement that does not touch the frame border; only its
// background pixels are claimed, so the other class is never overwritten.
inline data::LabelMap postprocess(const data::LabelMap& pred,
                                  Connectivity conn = Connectivity::four) {
    const int h = pred.height(), w = pred.width();
    data::LabelMap out = pred;

    for (std::uint8_t cls : {data::kClassRightLung, data::kClassLeftLung}) {
        auto comps = detail::components(
            h, w, conn, [&](int px) { return out.labels[px] == cls; });
        if (comps.empty()) continue;

        std::size_t best = 0;
        for (std::size_t i = 1; i < comps.size(); ++i)
            if (comps[i].size() > comps[best].size()) best = i;

        for (std::size_t i = 0; i < comps.size(); ++i) {
            if (i == best) continue;
            for (int px : comps[i]) out.labels[px] = data::kClassBackground;
        }
    }

    for (std::uint8_t cls : {data::kClassRightLung, data::kClassLeftLung}) {
        auto holes = detail::components(
            h, w, conn, [&](int px) { return out.labels[px] != cls; });
        for (const auto& comp : holes) {
            if (detail::touches_border(comp, h, w)) continue;
            for (int px : comp)
                if (out.labels[px] == data::kClassBackground) out.labels[px] = cls;
        }
    }
    return out;
}

// Number of connected components of one class.
inline std::size_t count_components(const data::LabelMap& m, int cls,
                                    Connectivity conn = Connectivity::four) {
    return detail::components(m.height(), m.width(), conn,
                              [&](int px) { return m.labels[px] == cls; })
        .size();
}

// Number of enclosed background pockets relative to one class: components
// of the class complement that avoid the border and contain at least one
// background pixel.
inline std::size_t count_holes(const data::LabelMap& m, int cls,
                               Connectivity conn = Connectivity::four) {
    const int h = m.height(), w = m.width();
    auto comps =
        detail::components(h, w, conn, [&](int px) { return m.labels[px] != cls; });
    std::size_t holes = 0;
    for (const auto& comp : comps) {
        if (detail::touches_border(comp, h, w)) continue;
        for (int px : comp)
            if (m.labels[px] == data::kClassBackground) {
                ++holes;
                break;
            }
    }
    return holes;
}

}  // namespace seuda::metrics
