#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "seuda/core/tensor.hpp"

namespace seuda::data {

enum class Domain { source, target, transformed };
enum class Split { train, val, test, unsplit };

inline std::string to_string(Domain d) {
    switch (d) {
        case Domain::source: return "source";
        case Domain::target: return "target";
        case Domain::transformed: return "transformed";
    }
    return "?";
}

inline std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
        case Split::unsplit: return "unsplit";
    }
    return "?";
}

// 2-D grayscale raster with intensities in [0,255] once preprocessed.
struct Image {
    Tensor<float> pixels;  // 1 x H x W
    float spacing_mm = 1.0f;
    Domain domain = Domain::source;

    Image() = default;
    Image(int h, int w, float fill = 0.0f) : pixels(1, h, w, fill) {}

    int height() const { return pixels.height(); }
    int width() const { return pixels.width(); }
    float& at(int y, int x) { return pixels.at(0, y, x); }
    float at(int y, int x) const { return pixels.at(0, y, x); }
    bool empty() const { return pixels.empty(); }
};

inline constexpr int kNumClasses = 3;  // background, right lung, left lung
inline constexpr int kClassBackground = 0;
inline constexpr int kClassRightLung = 1;
inline constexpr int kClassLeftLung = 2;

// Per-pixel class ids in {0,1,2}.
struct LabelMap {
    Tensor<std::uint8_t> labels;  // 1 x H x W

    LabelMap() = default;
    LabelMap(int h, int w, std::uint8_t fill = 0) : labels(1, h, w, fill) {}

    int height() const { return labels.height(); }
    int width() const { return labels.width(); }
    std::uint8_t& at(int y, int x) { return labels.at(0, y, x); }
    std::uint8_t at(int y, int x) const { return labels.at(0, y, x); }
    bool empty() const { return labels.empty(); }

    bool operator==(const LabelMap& o) const { return labels == o.labels; }
};

struct DatasetItem {
    std::string case_id;
    Image image;
    std::optional<LabelMap> mask;
};

struct Dataset {
    std::vector<DatasetItem> items;
    Domain domain = Domain::source;
    Split split = Split::unsplit;

    std::size_t size() const { return items.size(); }
    bool empty() const { return items.empty(); }
    const DatasetItem& operator[](std::size_t i) const { return items[i]; }
    DatasetItem& operator[](std::size_t i) { return items[i]; }

    void validate() const {
        std::vector<std::string> ids;
        ids.reserve(items.size());
        for (const auto& it : items) ids.push_back(it.case_id);
        std::sort(ids.begin(), ids.end());
        if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
            throw std::runtime_error("dataset: duplicate case id");
        for (const auto& it : items) {
            if (it.mask && (it.mask->height() != it.image.height() ||
                            it.mask->width() != it.image.width()))
                throw std::runtime_error("dataset: image/mask dimension mismatch for case " +
                                         it.case_id);
        }
    }
};

}  // namespace seuda::data
