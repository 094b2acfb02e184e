#pragma once

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "seuda/pipeline/bench.hpp"

namespace seuda::pipeline {

struct StabilityRun {
    std::uint64_t seed = 0;
    double dice = 0;  // mean over both lungs, percent
    double asd = 0;   // mean over both lungs, mm
};

struct LambdaStability {
    double lambda = 0;
    std::vector<StabilityRun> runs;
    double dice_mean = 0, dice_std = 0;
    double asd_mean = 0, asd_std = 0;
};

struct StabilityReport {
    std::vector<LambdaStability> per_lambda;
    int n_runs = 0;
};

namespace detail {

inline void mean_std(const std::vector<double>& v, double& mean, double& std_out) {
    mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    std_out = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace detail

// Repeated-initialization study: trains one adaptation model per
// (lambda, seed) pair against a fixed segmenter and data, evaluates each
// on the target test set, and reports mean/std of Dice and ASD per
// lambda. Runs are independent; `workers` threads execute them in
// parallel, each on its own state and segmenter clone.
template <typename T>
StabilityReport run_stability(const ExperimentProfile& profile, seg::SegmenterModel<T>& segmenter,
                              const DomainData& data, const std::vector<double>& lambda_values,
                              const std::vector<std::uint64_t>& run_seeds, int workers = 1) {
    if (run_seeds.size() < 2)
        throw std::invalid_argument("run_stability: need at least 2 runs");
    if (!segmenter.frozen) throw std::logic_error("run_stability: segmenter must be frozen");

    struct Job {
        std::size_t lambda_idx;
        std::size_t run_idx;
    };
    std::vector<Job> jobs;
    for (std::size_t li = 0; li < lambda_values.size(); ++li)
        for (std::size_t ri = 0; ri < run_seeds.size(); ++ri) jobs.push_back({li, ri});

    StabilityReport rep;
    rep.n_runs = static_cast<int>(run_seeds.size());
    rep.per_lambda.resize(lambda_values.size());
    for (std::size_t li = 0; li < lambda_values.size(); ++li) {
        rep.per_lambda[li].lambda = lambda_values[li];
        rep.per_lambda[li].runs.resize(run_seeds.size());
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;

    auto worker = [&]() {
        auto seg_copy = seg::clone_segmenter(segmenter);
        while (true) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            try {
                const Job job = jobs[j];
                uda::AdaptationConfig c = profile.uda_config;
                c.weights.lambda_sem = lambda_values[job.lambda_idx];
                c.with_mask_discriminator = c.weights.lambda_sem > 0;
                c.seed = run_seeds[job.run_idx];
                auto st = uda::build_adaptation<T>(c);
                uda::train_adaptation(st, seg_copy, data.source.train, data.target.train,
                                      profile.uda_epochs);

                std::vector<data::LabelMap> preds, gts;
                std::vector<std::string> ids;
                for (const auto& item : data.target.test.items) {
                    preds.push_back(seg::probs_to_labels(
                        seg::segment(seg_copy, uda::transform(st, item.image))));
                    gts.push_back(*item.mask);
                    ids.push_back(item.case_id);
                }
                const auto r = metrics::evaluate(preds, gts, ids, profile.spacing_mm, "stability");
                auto& slot = rep.per_lambda[job.lambda_idx].runs[job.run_idx];
                slot.seed = c.seed;
                slot.dice = r.mean_dice();
                slot.asd = r.mean_asd();
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    const int n_workers = std::max(1, workers);
    std::vector<std::thread> threads;
    for (int i = 0; i < n_workers - 1; ++i) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);

    for (auto& ls : rep.per_lambda) {
        std::vector<double> dices, asds;
        for (const auto& r : ls.runs) {
            dices.push_back(r.dice);
            asds.push_back(r.asd);
        }
        detail::mean_std(dices, ls.dice_mean, ls.dice_std);
        detail::mean_std(asds, ls.asd_mean, ls.asd_std);
    }
    return rep;
}

}  // namespace seuda::pipeline
