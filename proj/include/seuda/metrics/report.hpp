#pragma once

#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seuda/metrics/overlap.hpp"
#include "seuda/metrics/postprocess.hpp"
#include "seuda/metrics/surface.hpp"

namespace seuda::metrics {

inline const char* class_name(int cls) {
    return cls == data::kClassRightLung ? "right_lung" : "left_lung";
}

struct ClassMetrics {
    double dice = 0, recall = 0, precision = 0;  // percent
    std::optional<double> asd;                   // mm; missing when undefined
};

struct CaseMetrics {
    std::string case_id;
    ClassMetrics cls[2];  // [0]=right lung, [1]=left lung
};

struct ClassAggregate {
    double dice = 0, recall = 0, precision = 0;
    double asd = 0;               // mean over cases where defined
    std::size_t asd_missing = 0;  // cases excluded from the ASD mean
};

struct MetricsReport {
    std::string setting;  // S-test, T-noDA, T-HistM, T-STL, CyUDA, SeUDA
    double spacing_mm = 1.0;
    std::vector<CaseMetrics> cases;
    ClassAggregate aggregate[2];
    std::map<std::string, std::string> config;  // resolved run config, audit trail

    double mean_dice() const { return 0.5 * (aggregate[0].dice + aggregate[1].dice); }
    double mean_asd() const { return 0.5 * (aggregate[0].asd + aggregate[1].asd); }
};

// Post-processes every prediction, computes the four metrics per lung
// class per case, and aggregates by arithmetic mean. Cases with an
// undefined ASD are excluded from the ASD mean and counted.
inline MetricsReport evaluate(const std::vector<data::LabelMap>& preds,
                              const std::vector<data::LabelMap>& gts,
                              const std::vector<std::string>& case_ids, double spacing_mm,
                              const std::string& setting_tag,
                              Connectivity conn = Connectivity::four) {
    if (preds.size() != gts.size() || preds.size() != case_ids.size())
        throw std::invalid_argument("evaluate: length mismatch");

    MetricsReport rep;
    rep.setting = setting_tag;
    rep.spacing_mm = spacing_mm;

    double dice_sum[2] = {0, 0}, rec_sum[2] = {0, 0}, prec_sum[2] = {0, 0}, asd_sum[2] = {0, 0};
    std::size_t asd_n[2] = {0, 0};

    for (std::size_t i = 0; i < preds.size(); ++i) {
        const data::LabelMap post = postprocess(preds[i], conn);
        CaseMetrics cm;
        cm.case_id = case_ids[i];
        for (int k = 0; k < 2; ++k) {
            const int cls = k + 1;
            const auto ov = overlap_metrics(post, gts[i], cls);
            cm.cls[k].dice = ov.dice;
            cm.cls[k].recall = ov.recall;
            cm.cls[k].precision = ov.precision;
            dice_sum[k] += ov.dice;
            rec_sum[k] += ov.recall;
            prec_sum[k] += ov.precision;
            try {
                cm.cls[k].asd = asd(post, gts[i], cls, spacing_mm);
                asd_sum[k] += *cm.cls[k].asd;
                ++asd_n[k];
            } catch (const std::runtime_error&) {
                cm.cls[k].asd = std::nullopt;
            }
        }
        rep.cases.push_back(std::move(cm));
    }

    const double n = static_cast<double>(preds.size());
    for (int k = 0; k < 2; ++k) {
        rep.aggregate[k].dice = n > 0 ? dice_sum[k] / n : 0;
        rep.aggregate[k].recall = n > 0 ? rec_sum[k] / n : 0;
        rep.aggregate[k].precision = n > 0 ? prec_sum[k] / n : 0;
        rep.aggregate[k].asd = asd_n[k] > 0 ? asd_sum[k] / static_cast<double>(asd_n[k]) : 0;
        rep.aggregate[k].asd_missing = preds.size() - asd_n[k];
    }
    return rep;
}

// --- report file: one JSON record per line (header, cases, aggregate) ---

inline void write_report(const MetricsReport& rep, const std::string& path) {
    using nlohmann::json;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report " + path);

    json hdr{{"type", "header"},
             {"setting", rep.setting},
             {"spacing_mm", rep.spacing_mm},
             {"config", rep.config}};
    out << hdr.dump() << "\n";

    for (const auto& cm : rep.cases) {
        json rec{{"type", "case"}, {"case_id", cm.case_id}};
        for (int k = 0; k < 2; ++k) {
            json c{{"dice", cm.cls[k].dice},
                   {"recall", cm.cls[k].recall},
                   {"precision", cm.cls[k].precision}};
            c["asd"] = cm.cls[k].asd ? json(*cm.cls[k].asd) : json(nullptr);
            rec[class_name(k + 1)] = c;
        }
        out << rec.dump() << "\n";
    }

    json agg{{"type", "aggregate"}};
    for (int k = 0; k < 2; ++k) {
        agg[class_name(k + 1)] = {{"dice", rep.aggregate[k].dice},
                                  {"recall", rep.aggregate[k].recall},
                                  {"precision", rep.aggregate[k].precision},
                                  {"asd", rep.aggregate[k].asd},
                                  {"asd_missing", rep.aggregate[k].asd_missing}};
    }
    out << agg.dump() << "\n";
}

inline MetricsReport read_report(const std::string& path) {
    using nlohmann::json;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report " + path);

    MetricsReport rep;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json rec = json::parse(line);
        const std::string type = rec.at("type");
        if (type == "header") {
            rep.setting = rec.at("setting");
            rep.spacing_mm = rec.at("spacing_mm");
            if (rec.contains("config"))
                rep.config = rec.at("config").get<std::map<std::string, std::string>>();
        } else if (type == "case") {
            CaseMetrics cm;
            cm.case_id = rec.at("case_id");
            for (int k = 0; k < 2; ++k) {
                const json& c = rec.at(class_name(k + 1));
                cm.cls[k].dice = c.at("dice");
                cm.cls[k].recall = c.at("recall");
                cm.cls[k].precision = c.at("precision");
                if (!c.at("asd").is_null()) cm.cls[k].asd = c.at("asd").get<double>();
            }
            rep.cases.push_back(std::move(cm));
        } else if (type == "aggregate") {
            for (int k = 0; k < 2; ++k) {
                const json& c = rec.at(class_name(k + 1));
                rep.aggregate[k].dice = c.at("dice");
                rep.aggregate[k].recall = c.at("recall");
                rep.aggregate[k].precision = c.at("precision");
                rep.aggregate[k].asd = c.at("asd");
                rep.aggregate[k].asd_missing = c.at("asd_missing");
            }
        }
    }
    return rep;
}

// Side-by-side table over settings, columns matching the evaluation
// stack: Dice / Recall / Precision / ASD for each lung.
inline std::string format_table(const std::vector<MetricsReport>& reports) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "Setting";
    for (const char* lung : {"R", "L"})
        for (const char* m : {"Dice", "Recall", "Prec", "ASD"})
            os << std::right << std::setw(9) << (std::string(m) + "(" + lung + ")");
    os << "\n";
    os << std::string(10 + 8 * 9, '-') << "\n";
    os << std::fixed << std::setprecision(2);
    for (const auto& rep : reports) {
        os << std::left << std::setw(10) << rep.setting;
        for (int k = 0; k < 2; ++k) {
            os << std::right << std::setw(9) << rep.aggregate[k].dice << std::setw(9)
               << rep.aggregate[k].recall << std::setw(9) << rep.aggregate[k].precision
               << std::setw(9) << rep.aggregate[k].asd;
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace seuda::metrics
