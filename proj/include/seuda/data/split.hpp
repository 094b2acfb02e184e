#pragma once

#include <array>
#include <numeric>
#include <stdexcept>

#include "seuda/core/rng.hpp"
#include "seuda/data/image.hpp"

namespace seuda::data {

// Largest-remainder apportionment of n items by the given ratios.
// Leftover slots go to the largest fractional parts, ties to the lower
// index, so the result is order-independent and reproducible.
inline std::array<std::size_t, 3> apportion(std::size_t n, std::array<double, 3> ratios) {
    double total = 0;
    for (double r : ratios) {
        if (r <= 0) throw std::invalid_argument("apportion: ratios must be positive");
        total += r;
    }
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> rem{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double quota = static_cast<double>(n) * ratios[i] / total;
        sizes[i] = static_cast<std::size_t>(quota);
        rem[i] = quota - static_cast<double>(sizes[i]);
        assigned += sizes[i];
    }
    for (std::size_t left = n - assigned; left > 0; --left) {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (rem[i] > rem[best]) best = i;
        ++sizes[best];
        rem[best] = -1.0;
    }
    return sizes;
}

struct SplitResult {
    Dataset train, val, test;
};

// Deterministic shuffle under seed, then partition by largest remainder.
inline SplitResult split(const Dataset& dataset, std::array<double, 3> ratios, std::uint64_t seed) {
    if (dataset.empty()) throw std::invalid_argument("split: empty dataset");
    const auto sizes = apportion(dataset.size(), ratios);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng::stream(seed, "split");
    rng.shuffle(order);

    SplitResult out;
    out.train.domain = out.val.domain = out.test.domain = dataset.domain;
    out.train.split = Split::train;
    out.val.split = Split::val;
    out.test.split = Split::test;
    std::size_t pos = 0;
    for (Dataset* part : {&out.train, &out.val, &out.test}) {
        const std::size_t count = part == &out.train ? sizes[0]
                                : part == &out.val   ? sizes[1]
                                                     : sizes[2];
        for (std::size_t k = 0; k < count; ++k) part->items.push_back(dataset.items[order[pos++]]);
    }
    return out;
}

}  // namespace seuda::data
