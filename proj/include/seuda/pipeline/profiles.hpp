#pragma once

#include "seuda/baselines/stl.hpp"
#include "seuda/data/phantom.hpp"
#include "seuda/seg/segmenter.hpp"
#include "seuda/uda/adaptation.hpp"

namespace seuda::pipeline {

// A complete desk-scale experiment recipe: phantom domains, dataset
// sizes, and per-stage training configuration.
struct ExperimentProfile {
    int working_size = 64;
    int n_source = 60;  // split 4:1:1 -> 40/10/10
    int n_target = 60;
    std::array<double, 3> split_ratios = {4, 1, 1};
    std::uint64_t data_seed = 7;
    std::uint64_t split_seed = 99;
    double spacing_mm = 1.0;

    data::PhantomParams source_phantoms;
    data::PhantomParams target_phantoms;

    seg::SegmenterConfig seg_config;
    seg::SegTrainOptions seg_train;

    uda::AdaptationConfig uda_config;
    int uda_epochs = 200;

    baselines::StlOptions stl;

    // Source and target share geometry (same data_seed); the target
    // intensity model inverts lobe/background contrast, a shift the
    // source segmenter cannot absorb.
    static ExperimentProfile toy64() {
        ExperimentProfile p;
        p.source_phantoms.working_size = 64;
        p.source_phantoms.domain = data::Domain::source;
        p.source_phantoms.intensity = {200.0, 60.0, 1.0, 1.0, 6.0};

        p.target_phantoms = p.source_phantoms;
        p.target_phantoms.domain = data::Domain::target;
        p.target_phantoms.intensity = {55.0, 190.0, 0.5, 0.9, 6.0};

        p.seg_config.base_channels = 8;
        p.seg_config.stage_blocks = {1, 1, 1};
        p.seg_config.dilated_stage_rates = {2};
        p.seg_config.working_size = 64;
        p.seg_train.epochs = 40;
        p.seg_train.lr = 0.01;

        p.uda_config.gen.base_channels = 8;
        p.uda_config.gen.encoder_downsamples = 2;
        p.uda_config.gen.residual_blocks = 2;
        p.uda_config.disc.base_channels = 12;
        p.uda_config.disc.layers = 5;
        p.uda_config.working_size = 64;
        p.uda_epochs = 200;

        p.stl.epochs = 30;
        return p;
    }

    // Reduced profile for the repeated stability study.
    static ExperimentProfile stability32() {
        ExperimentProfile p = toy64();
        p.working_size = 32;
        p.n_source = 24;  // 16/4/4
        p.n_target = 24;
        p.source_phantoms.working_size = 32;
        p.target_phantoms.working_size = 32;
        p.seg_config.working_size = 32;
        p.seg_train.epochs = 30;
        p.uda_config.working_size = 32;
        p.uda_config.gen.base_channels = 6;
        p.uda_config.gen.residual_blocks = 1;
        p.uda_config.disc.base_channels = 8;
        p.uda_config.disc.layers = 3;
        p.uda_epochs = 25;
        p.stl.epochs = 15;
        return p;
    }
};

struct DomainData {
    data::SplitResult source;
    data::SplitResult target;
};

// Generate both phantom domains (shared geometry seed), preprocess to
// the working size, and split deterministically.
inline DomainData make_phantom_data(const ExperimentProfile& p) {
    data::PhantomParams sp = p.source_phantoms;
    data::PhantomParams tp = p.target_phantoms;
    sp.seed = p.data_seed;
    tp.seed = p.data_seed;

    auto prep = [&](data::Dataset ds) {
        for (auto& item : ds.items) item.image = data::preprocess(item.image, p.working_size);
        return ds;
    };
    DomainData d;
    d.source = data::split(prep(data::generate_phantoms(sp, p.n_source)), p.split_ratios,
                           p.split_seed);
    d.target = data::split(prep(data::generate_phantoms(tp, p.n_target)), p.split_ratios,
                           p.split_seed + 1);
    return d;
}

}  // namespace seuda::pipeline
