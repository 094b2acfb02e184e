#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "seuda/data/image.hpp"
#include "seuda/data/raster_io.hpp"

namespace seuda::data {

// Manifest format: one record per line, tab-separated:
//   case-id <TAB> image-path [<TAB> mask-path]
// Paths are resolved relative to root unless absolute.

inline Image raster_to_image(const Raster& r, Domain domain, float spacing_mm = 1.0f) {
    Image img(r.height, r.width);
    for (std::size_t i = 0; i < r.px.size(); ++i) img.pixels[i] = static_cast<float>(r.px[i]);
    img.domain = domain;
    img.spacing_mm = spacing_mm;
    return img;
}

inline LabelMap raster_to_mask(const Raster& r, const std::string& path) {
    LabelMap m(r.height, r.width);
    for (std::size_t i = 0; i < r.px.size(); ++i) {
        if (r.px[i] >= kNumClasses)
            throw std::runtime_error(path + ": invalid class id " + std::to_string(r.px[i]) +
                                     " in mask");
        m.labels[i] = static_cast<std::uint8_t>(r.px[i]);
    }
    return m;
}

inline Dataset load_dataset(const std::string& root, const std::string& manifest_path,
                            Domain domain = Domain::source) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open manifest " + manifest_path);

    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (std::filesystem::path(root) / fp).string();
    };

    Dataset ds;
    ds.domain = domain;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string case_id, image_rel, mask_rel;
        std::getline(ss, case_id, '\t');
        std::getline(ss, image_rel, '\t');
        std::getline(ss, mask_rel, '\t');
        if (case_id.empty() || image_rel.empty())
            throw std::runtime_error(manifest_path + ":" + std::to_string(lineno) +
                                     ": expected case-id<TAB>image-path");

        DatasetItem item;
        item.case_id = case_id;
        item.image = raster_to_image(load_raster(resolve(image_rel)), domain);
        if (!mask_rel.empty()) {
            const std::string mpath = resolve(mask_rel);
            LabelMap mask = raster_to_mask(load_raster(mpath), mpath);
            if (mask.height() != item.image.height() || mask.width() != item.image.width())
                throw std::runtime_error(mpath + ": mask dimensions do not match image for case " +
                                         case_id);
            item.mask = std::move(mask);
        }
        ds.items.push_back(std::move(item));
    }
    ds.validate();
    return ds;
}

// Writes images as 8-bit grayscale PNG (values rounded), masks as 8-bit
// PNG with raw class ids, plus a manifest.tsv naming all files.
inline void save_dataset(const Dataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "images");
    const bool any_mask =
        std::any_of(ds.items.begin(), ds.items.end(), [](const auto& it) { return bool(it.mask); });
    if (any_mask) fs::create_directories(fs::path(dir) / "masks");

    std::ofstream man(fs::path(dir) / "manifest.tsv");
    if (!man) throw std::runtime_error("cannot write manifest in " + dir);
    for (const auto& item : ds.items) {
        Raster r;
        r.height = item.image.height();
        r.width = item.image.width();
        r.maxval = 255;
        r.px.resize(std::size_t(r.height) * r.width);
        for (std::size_t i = 0; i < r.px.size(); ++i) {
            const float v = std::clamp(item.image.pixels[i], 0.0f, 255.0f);
            r.px[i] = static_cast<std::uint16_t>(std::lround(v));
        }
        const std::string img_rel = "images/" + item.case_id + ".png";
        save_png((fs::path(dir) / img_rel).string(), r);
        man << item.case_id << '\t' << img_rel;

        if (item.mask) {
            Raster mr;
            mr.height = item.mask->height();
            mr.width = item.mask->width();
            mr.maxval = 255;
            mr.px.assign(item.mask->labels.data(),
                         item.mask->labels.data() + item.mask->labels.size());
            const std::string mask_rel = "masks/" + item.case_id + ".png";
            save_png((fs::path(dir) / mask_rel).string(), mr);
            man << '\t' << mask_rel;
        }
        man << '\n';
    }
}

}  // namespace seuda::data
