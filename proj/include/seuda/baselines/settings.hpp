#pragma once

#include <functional>
#include <string>

#include "seuda/baselines/histogram.hpp"
#include "seuda/metrics/report.hpp"
#include "seuda/seg/segmenter.hpp"
#include "seuda/uda/adaptation.hpp"

namespace seuda::baselines {

enum class Setting { s_test, t_no_da, t_hist_m, t_stl, cy_uda, se_uda };

inline std::string to_string(Setting s) {
    switch (s) {
        case Setting::s_test: return "S-test";
        case Setting::t_no_da: return "T-noDA";
        case Setting::t_hist_m: return "T-HistM";
        case Setting::t_stl: return "T-STL";
        case Setting::cy_uda: return "CyUDA";
        case Setting::se_uda: return "SeUDA";
    }
    return "?";
}

inline Setting setting_from_string(const std::string& s) {
    for (Setting v : {Setting::s_test, Setting::t_no_da, Setting::t_hist_m, Setting::t_stl,
                      Setting::cy_uda, Setting::se_uda})
        if (to_string(v) == s) return v;
    throw std::invalid_argument("unknown setting '" + s + "'");
}

// Everything a setting might need; unused members may stay null.
template <typename T>
struct SettingInputs {
    seg::SegmenterModel<T>* segmenter = nullptr;      // frozen f^s
    seg::SegmenterModel<T>* stl_model = nullptr;      // fine-tuned model (T-STL)
    uda::AdaptationState<T>* seuda = nullptr;         // trained at lambda_sem > 0
    uda::AdaptationState<T>* cyuda = nullptr;         // trained at lambda_sem = 0
    const data::Dataset* source_test = nullptr;
    const data::Dataset* target_test = nullptr;
    const data::Dataset* source_train = nullptr;      // histogram reference (T-HistM)
    double spacing_mm = 1.0;
};

namespace detail {

template <typename T>
metrics::MetricsReport segment_and_evaluate(
    seg::SegmenterModel<T>& model, const data::Dataset& test, double spacing_mm,
    const std::string& tag,
    const std::function<data::Image(const data::Image&)>& image_pipeline) {
    std::vector<data::LabelMap> preds, gts;
    std::vector<std::string> ids;
    for (const auto& item : test.items) {
        if (!item.mask)
            throw std::invalid_argument("run_setting(" + tag + "): test case " + item.case_id +
                                        " has no ground-truth mask");
        const data::Image input = image_pipeline ? image_pipeline(item.image) : item.image;
        preds.push_back(seg::probs_to_labels(seg::segment(model, input)));
        gts.push_back(*item.mask);
        ids.push_back(item.case_id);
    }
    return metrics::evaluate(preds, gts, ids, spacing_mm, tag);
}

}  // namespace detail

// Builds the per-setting image pipeline (identity / histogram match /
// G_ts transform / fine-tuned model) and evaluates it on the setting's
// test set. Missing prerequisites are reported by name.
template <typename T>
metrics::MetricsReport run_setting(Setting setting, SettingInputs<T>& in) {
    const std::string tag = to_string(setting);
    auto need = [&](const void* p, const std::string& what) {
        if (!p)
            throw std::invalid_argument("run_setting(" + tag + "): missing prerequisite: " + what);
    };

    switch (setting) {
        case Setting::s_test:
            need(in.segmenter, "segmenter");
            need(in.source_test, "source test set");
            return detail::segment_and_evaluate(*in.segmenter, *in.source_test, in.spacing_mm, tag,
                                                nullptr);
        case Setting::t_no_da:
            need(in.segmenter, "segmenter");
            need(in.target_test, "target test set");
            return detail::segment_and_evaluate(*in.segmenter, *in.target_test, in.spacing_mm, tag,
                                                nullptr);
        case Setting::t_hist_m: {
            need(in.segmenter, "segmenter");
            need(in.target_test, "target test set");
            need(in.source_train, "source training set (histogram reference)");
            const Histogram ref = build_reference_histogram(*in.source_train);
            return detail::segment_and_evaluate<T>(
                *in.segmenter, *in.target_test, in.spacing_mm, tag,
                [&ref](const data::Image& img) { return histogram_match(img, ref); });
        }
        case Setting::t_stl:
            need(in.stl_model, "fine-tuned model");
            need(in.target_test, "target test set");
            return detail::segment_and_evaluate(*in.stl_model, *in.target_test, in.spacing_mm, tag,
                                                nullptr);
        case Setting::cy_uda:
            need(in.segmenter, "segmenter");
            need(in.cyuda, "adaptation state trained at lambda_sem = 0");
            need(in.target_test, "target test set");
            return detail::segment_and_evaluate<T>(
                *in.segmenter, *in.target_test, in.spacing_mm, tag,
                [st = in.cyuda](const data::Image& img) { return uda::transform(*st, img); });
        case Setting::se_uda:
            need(in.segmenter, "segmenter");
            need(in.seuda, "trained adaptation state");
            need(in.target_test, "target test set");
            return detail::segment_and_evaluate<T>(
                *in.segmenter, *in.target_test, in.spacing_mm, tag,
                [st = in.seuda](const data::Image& img) { return uda::transform(*st, img); });
    }
    throw std::logic_error("run_setting: unreachable");
}

}  // namespace seuda::baselines
