#pragma once

#include <map>

#include "seuda/baselines/settings.hpp"
#include "seuda/pipeline/profiles.hpp"
#include "seuda/uda/checkpoint.hpp"

namespace seuda::pipeline {

// Everything one end-to-end run produces; reports are keyed by setting.
template <typename T>
struct BenchRun {
    DomainData datasets;
    seg::SegmenterModel<T> segmenter;              // frozen after training
    std::vector<seg::SegEpochStats> seg_history;
    std::optional<seg::SegmenterModel<T>> stl_model;
    std::optional<uda::AdaptationState<T>> seuda;
    std::optional<uda::AdaptationState<T>> cyuda;
    std::vector<uda::EpochReport> seuda_history;
    std::vector<uda::EpochReport> cyuda_history;
    std::map<std::string, metrics::MetricsReport> reports;
};

// Trains whatever the requested settings need (segmenter always; STL /
// SeUDA / CyUDA on demand) and evaluates each setting. `run_seed` feeds
// every trainable stage so independent runs differ only by seed.
template <typename T>
BenchRun<T> run_bench(const ExperimentProfile& profile,
                      const std::vector<baselines::Setting>& settings, std::uint64_t run_seed) {
    if (settings.empty()) throw std::invalid_argument("run_bench: empty settings list");
    BenchRun<T> run;
    run.datasets = make_phantom_data(profile);

    run.segmenter = seg::build_segmenter<T>(profile.seg_config, run_seed);
    {
        seg::SegTrainOptions o = profile.seg_train;
        o.seed = run_seed;
        run.seg_history =
            seg::train_segmenter(run.segmenter, run.datasets.source.train, run.datasets.source.val, o);
    }
    run.segmenter.frozen = true;

    auto wants = [&](baselines::Setting s) {
        return std::find(settings.begin(), settings.end(), s) != settings.end();
    };

    if (wants(baselines::Setting::t_stl)) {
        run.stl_model.emplace(seg::clone_segmenter(run.segmenter));
        run.stl_model->frozen = false;
        baselines::StlOptions o = profile.stl;
        o.base_lr = profile.seg_train.lr;
        o.seed = run_seed + 1;
        baselines::fine_tune_stl(*run.stl_model, run.datasets.target.train,
                                 run.datasets.target.val, o);
    }

    if (wants(baselines::Setting::se_uda)) {
        uda::AdaptationConfig c = profile.uda_config;
        c.seed = run_seed;
        run.seuda.emplace(uda::build_adaptation<T>(c));
        run.seuda_history = uda::train_adaptation(*run.seuda, run.segmenter,
                                                  run.datasets.source.train,
                                                  run.datasets.target.train, profile.uda_epochs);
    }
    if (wants(baselines::Setting::cy_uda)) {
        uda::AdaptationConfig c = profile.uda_config;
        c.seed = run_seed;
        c.weights.lambda_sem = 0.0;
        run.cyuda.emplace(uda::build_adaptation<T>(c));
        run.cyuda_history = uda::train_adaptation(*run.cyuda, run.segmenter,
                                                  run.datasets.source.train,
                                                  run.datasets.target.train, profile.uda_epochs);
    }

    baselines::SettingInputs<T> in;
    in.segmenter = &run.segmenter;
    in.stl_model = run.stl_model ? &*run.stl_model : nullptr;
    in.seuda = run.seuda ? &*run.seuda : nullptr;
    in.cyuda = run.cyuda ? &*run.cyuda : nullptr;
    in.source_test = &run.datasets.source.test;
    in.target_test = &run.datasets.target.test;
    in.source_train = &run.datasets.source.train;
    in.spacing_mm = profile.spacing_mm;

    for (baselines::Setting s : settings)
        run.reports.emplace(baselines::to_string(s), baselines::run_setting(s, in));
    return run;
}

}  // namespace seuda::pipeline
