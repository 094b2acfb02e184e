#pragma once

#include "seuda/seg/segmenter.hpp"

namespace seuda::baselines {

struct StlOptions {
    int epochs = 60;
    double lr_scale = 0.1;  // applied to the segmenter's default lr
    double base_lr = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;
};

// Supervised transfer learning: continue training an unfrozen copy of
// the source model on labeled target data at a reduced learning rate.
// Returns the per-epoch history; the model holds the best-on-val params.
template <typename T>
std::vector<seg::SegEpochStats> fine_tune_stl(seg::SegmenterModel<T>& source_model,
                                              const data::Dataset& target_train,
                                              const data::Dataset& target_val,
                                              const StlOptions& opts) {
    if (source_model.frozen)
        throw std::logic_error("fine_tune_stl: model is frozen; pass an unfrozen copy");
    seg::SegTrainOptions topts;
    topts.epochs = opts.epochs;
    topts.lr = opts.base_lr * opts.lr_scale;
    topts.momentum = opts.momentum;
    topts.seed = opts.seed;
    return seg::train_segmenter(source_model, target_train, target_val, topts);
}

}  // namespace seuda::baselines
