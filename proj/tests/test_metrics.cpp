#include <catch2/catch_amalgamated.hpp>

#include "seuda/core/rng.hpp"
#include "seuda/metrics/overlap.hpp"
#include "seuda/metrics/postprocess.hpp"
#include "seuda/metrics/report.hpp"
#include "seuda/metrics/surface.hpp"

using namespace seuda;

namespace {

// Independent oracles: direct set counting for overlap, exhaustive
// all-pairs boundary distances for ASD.

struct OracleOverlap {
    double dice, recall, precision;
};

OracleOverlap overlap_oracle(const data::LabelMap& pred, const data::LabelMap& gt, int cls) {
    std::size_t p = 0, g = 0, i = 0;
    for (std::size_t k = 0; k < pred.labels.size(); ++k) {
        if (pred.labels[k] == cls) ++p;
        if (gt.labels[k] == cls) ++g;
        if (pred.labels[k] == cls && gt.labels[k] == cls) ++i;
    }
    OracleOverlap o{};
    if (p == 0 && g == 0) return {100, 100, 100};
    o.dice = 200.0 * double(i) / double(p + g);
    o.recall = g ? 100.0 * double(i) / double(g) : 0.0;
    o.precision = p ? 100.0 * double(i) / double(p) : 0.0;
    return o;
}

std::vector<std::pair<int, int>> boundary_oracle(const data::LabelMap& m, int cls) {
    std::vector<std::pair<int, int>> out;
    const int h = m.height(), w = m.width();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (m.at(y, x) != cls) continue;
            bool b = y == 0 || y == h - 1 || x == 0 || x == w - 1;
            if (!b)
                b = m.at(y - 1, x) != cls || m.at(y + 1, x) != cls || m.at(y, x - 1) != cls ||
                    m.at(y, x + 1) != cls;
            if (b) out.emplace_back(y, x);
        }
    return out;
}

double asd_oracle(const data::LabelMap& pred, const data::LabelMap& gt, int cls, double spacing) {
    auto bp = boundary_oracle(pred, cls);
    auto bg = boundary_oracle(gt, cls);
    if (bp.empty() || bg.empty()) throw std::runtime_error("oracle: empty");
    auto min_dist = [](const std::pair<int, int>& a, const std::vector<std::pair<int, int>>& bs) {
        double best = 1e300;
        for (const auto& b : bs) {
            const double dy = a.first - b.first, dx = a.second - b.second;
            best = std::min(best, std::sqrt(dy * dy + dx * dx));
        }
        return best;
    };
    double total = 0;
    for (const auto& a : bp) total += min_dist(a, bg);
    for (const auto& b : bg) total += min_dist(b, bp);
    return total / double(bp.size() + bg.size()) * spacing;
}

data::LabelMap random_mask(Rng& rng, int h, int w, double fg_prob) {
    data::LabelMap m(h, w);
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        const double u = rng.uniform();
        m.labels[i] = u < fg_prob ? 1 : (u < 2 * fg_prob ? 2 : 0);
    }
    return m;
}

}  // namespace

TEST_CASE("overlap metrics: identity, partial overlap, full-frame pred") {
    data::LabelMap gt(4, 4), pred(4, 4);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) gt.at(y, x) = 1;

    auto same = metrics::overlap_metrics(gt, gt, 1);
    REQUIRE(same.dice == 100.0);
    REQUIRE(same.recall == 100.0);
    REQUIRE(same.precision == 100.0);

    // two 2x2 squares overlapping in 2 pixels
    for (int y = 1; y < 3; ++y)
        for (int x = 0; x < 2; ++x) pred.at(y, x) = 1;
    auto part = metrics::overlap_metrics(pred, gt, 1);
    REQUIRE(part.dice == 50.0);
    REQUIRE(part.recall == 50.0);
    REQUIRE(part.precision == 50.0);

    data::LabelMap full(4, 4, 1);
    auto f = metrics::overlap_metrics(full, gt, 1);
    REQUIRE(f.recall == 100.0);
    REQUIRE(f.precision == 25.0);
    REQUIRE(f.dice == 40.0);
}

TEST_CASE("overlap metrics empty-set conventions") {
    data::LabelMap a(4, 4), b(4, 4);
    auto both_empty = metrics::overlap_metrics(a, b, 1);
    REQUIRE(both_empty.dice == 100.0);
    REQUIRE(both_empty.recall == 100.0);
    REQUIRE(both_empty.precision == 100.0);

    b.at(0, 0) = 1;
    auto one_empty = metrics::overlap_metrics(a, b, 1);
    REQUIRE(one_empty.dice == 0.0);
    REQUIRE(one_empty.recall == 0.0);
    REQUIRE(one_empty.precision == 0.0);

    data::LabelMap c(3, 3);
    REQUIRE_THROWS_AS(metrics::overlap_metrics(a, c, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(metrics::overlap_metrics(a, b, 0), std::invalid_argument);
}

TEST_CASE("asd: identity, two points, shifted square vs oracle") {
    data::LabelMap sq(8, 8);
    for (int y = 1; y < 6; ++y)
        for (int x = 1; x < 6; ++x) sq.at(y, x) = 1;
    REQUIRE(metrics::asd(sq, sq, 1, 1.0) == 0.0);

    data::LabelMap p(4, 4), g(4, 4);
    p.at(0, 0) = 1;
    g.at(0, 3) = 1;
    REQUIRE(metrics::asd(p, g, 1, 0.5) == Catch::Approx(1.5).epsilon(1e-12));

    data::LabelMap shifted(8, 8);
    for (int y = 1; y < 6; ++y)
        for (int x = 1; x < 6; ++x)
            if (y + 2 < 8) shifted.at(y + 2, x) = 1;
    const double got = metrics::asd(sq, shifted, 1, 1.0);
    const double want = asd_oracle(sq, shifted, 1, 1.0);
    REQUIRE(std::abs(got - want) < 1e-9);
}

TEST_CASE("asd errors on empty masks and is reported missing by evaluate") {
    data::LabelMap empty(4, 4), full(4, 4);
    full.at(1, 1) = 1;
    REQUIRE_THROWS_WITH(metrics::asd(empty, full, 1, 1.0),
                        Catch::Matchers::ContainsSubstring("ASD undefined"));
    REQUIRE_THROWS_WITH(metrics::asd(full, empty, 1, 1.0),
                        Catch::Matchers::ContainsSubstring("ASD undefined"));
}

TEST_CASE("asd symmetry and spacing scale law") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_mask(rng, 12, 12, 0.2);
        auto b = random_mask(rng, 12, 12, 0.2);
        bool ok = true;
        for (int cls : {1, 2}) {
            std::size_t na = 0, nb = 0;
            for (std::size_t i = 0; i < a.labels.size(); ++i) {
                na += a.labels[i] == cls;
                nb += b.labels[i] == cls;
            }
            if (na == 0 || nb == 0) {
                ok = false;
                continue;
            }
            const double ab = metrics::asd(a, b, cls, 1.0);
            const double ba = metrics::asd(b, a, cls, 1.0);
            REQUIRE(ab == ba);
            REQUIRE(metrics::asd(a, b, cls, 2.0) == Catch::Approx(2.0 * ab).epsilon(1e-12));
        }
        (void)ok;
    }
}

TEST_CASE("metric oracle equivalence on random 16x16 masks") {
    Rng rng(23);
    int asd_checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        auto pred = random_mask(rng, 16, 16, 0.15);
        auto gt = random_mask(rng, 16, 16, 0.15);
        for (int cls : {1, 2}) {
            auto got = metrics::overlap_metrics(pred, gt, cls);
            auto want = overlap_oracle(pred, gt, cls);
            REQUIRE(got.dice == want.dice);
            REQUIRE(got.recall == want.recall);
            REQUIRE(got.precision == want.precision);
            try {
                const double want_asd = asd_oracle(pred, gt, cls, 0.7);
                const double got_asd = metrics::asd(pred, gt, cls, 0.7);
                REQUIRE(std::abs(got_asd - want_asd) < 1e-9);
                ++asd_checked;
            } catch (const std::runtime_error&) {
            }
        }
    }
    REQUIRE(asd_checked > 50);
}

TEST_CASE("postprocess keeps the largest component and fills holes") {
    data::LabelMap m(8, 8);
    // size-5 component
    for (int x = 1; x < 6; ++x) m.at(1, x) = 1;
    // size-3 component
    for (int x = 1; x < 4; ++x) m.at(5, x) = 1;
    auto out = metrics::postprocess(m);
    REQUIRE(metrics::count_components(out, 1) == 1);
    for (int x = 1; x < 4; ++x) REQUIRE(out.at(5, x) == 0);
    for (int x = 1; x < 6; ++x) REQUIRE(out.at(1, x) == 1);

    // 5x5 ring with a 1-px hole
    data::LabelMap ring(7, 7);
    for (int y = 1; y < 6; ++y)
        for (int x = 1; x < 6; ++x) ring.at(y, x) = 2;
    ring.at(3, 3) = 0;
    auto filled = metrics::postprocess(ring);
    REQUIRE(filled.at(3, 3) == 2);
    REQUIRE(metrics::count_holes(filled, 2) == 0);

    data::LabelMap blank(5, 5);
    REQUIRE(metrics::postprocess(blank) == blank);
}

TEST_CASE("postprocess tie-break picks smallest top-left component") {
    data::LabelMap m(6, 6);
    m.at(0, 3) = 1;  // first in row-major order
    m.at(4, 0) = 1;  // same size, later
    auto out = metrics::postprocess(m);
    REQUIRE(out.at(0, 3) == 1);
    REQUIRE(out.at(4, 0) == 0);
}

TEST_CASE("postprocess is idempotent and normalizing on random noise") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        auto noisy = random_mask(rng, 16, 16, 0.2);
        auto once = metrics::postprocess(noisy);
        for (int cls : {1, 2}) {
            REQUIRE(metrics::count_components(once, cls) <= 1);
            REQUIRE(metrics::count_holes(once, cls) == 0);
        }
        REQUIRE(metrics::postprocess(once) == once);
    }
}

TEST_CASE("postprocess never claims the other class when filling") {
    // class-2 island inside a class-1 ring
    data::LabelMap m(9, 9);
    for (int y = 1; y < 8; ++y)
        for (int x = 1; x < 8; ++x) m.at(y, x) = 1;
    for (int y = 3; y < 6; ++y)
        for (int x = 3; x < 6; ++x) m.at(y, x) = 0;
    m.at(4, 4) = 2;
    auto out = metrics::postprocess(m);
    REQUIRE(out.at(4, 4) == 2);          // island survives
    REQUIRE(out.at(3, 3) == 1);          // background pocket filled by class 1
    REQUIRE(metrics::postprocess(out) == out);
}

TEST_CASE("evaluate: identity, hand-checked case, aggregate mean") {
    data::PhantomParams p;
    p.seed = 6;
    p.working_size = 32;
    auto ds = data::generate_phantoms(p, 3);
    std::vector<data::LabelMap> gts, preds;
    std::vector<std::string> ids;
    for (const auto& item : ds.items) {
        gts.push_back(*item.mask);
        preds.push_back(*item.mask);
        ids.push_back(item.case_id);
    }
    auto rep = metrics::evaluate(preds, gts, ids, 1.0, "S-test");
    for (int k = 0; k < 2; ++k) {
        REQUIRE(rep.aggregate[k].dice == 100.0);
        REQUIRE(rep.aggregate[k].recall == 100.0);
        REQUIRE(rep.aggregate[k].precision == 100.0);
        REQUIRE(rep.aggregate[k].asd == 0.0);
        REQUIRE(rep.aggregate[k].asd_missing == 0);
    }
    REQUIRE(rep.setting == "S-test");

    // single constructed case: pred is gt with one lung dilated by a row
    {
        data::LabelMap gt(8, 8), pred(8, 8);
        for (int y = 2; y < 5; ++y)
            for (int x = 2; x < 5; ++x) gt.at(y, x) = 1;
        pred = gt;
        for (int x = 2; x < 5; ++x) pred.at(5, x) = 1;
        auto r1 = metrics::evaluate({pred}, {gt}, {"one"}, 1.0, "x");
        auto want = overlap_oracle(metrics::postprocess(pred), gt, 1);
        REQUIRE(r1.aggregate[0].dice == Catch::Approx(want.dice));
        REQUIRE(r1.aggregate[0].recall == Catch::Approx(want.recall));
        REQUIRE(r1.aggregate[0].precision == Catch::Approx(want.precision));
        const double asd_want = asd_oracle(metrics::postprocess(pred), gt, 1, 1.0);
        REQUIRE(r1.aggregate[0].asd == Catch::Approx(asd_want).margin(1e-9));
    }

    // aggregate of dice 40 and 60 -> 50 (right lung)
    {
        data::LabelMap gt(4, 4);
        for (int y = 0; y < 2; ++y)
            for (int x = 0; x < 2; ++x) gt.at(y, x) = 1;
        data::LabelMap pred40(4, 4, 1);  // full frame: dice 2*4/(16+4) = 40
        // connected pred with |P|=6, |P∩G|=3 -> dice 2*3/(6+4) = 60
        data::LabelMap p60c(4, 4);
        p60c.at(0, 0) = p60c.at(0, 1) = p60c.at(1, 0) = 1;   // 3 true positives
        p60c.at(2, 0) = p60c.at(3, 0) = p60c.at(2, 1) = 1;   // 3 false positives, connected
        auto r2 = metrics::evaluate({pred40, p60c}, {gt, gt}, {"a", "b"}, 1.0, "x");
        REQUIRE(r2.cases[0].cls[0].dice == Catch::Approx(40.0));
        REQUIRE(r2.cases[1].cls[0].dice == Catch::Approx(60.0));
        REQUIRE(r2.aggregate[0].dice == Catch::Approx(50.0));
    }

    REQUIRE_THROWS_AS(metrics::evaluate({preds[0]}, gts, ids, 1.0, "x"), std::invalid_argument);
}

TEST_CASE("evaluate counts undefined ASD cases instead of zeroing them") {
    data::LabelMap gt(6, 6), pred(6, 6);
    gt.at(2, 2) = 1;  // class 1 present in gt only
    auto rep = metrics::evaluate({pred}, {gt}, {"c"}, 1.0, "x");
    REQUIRE(rep.aggregate[0].asd_missing == 1);
    REQUIRE(rep.cases[0].cls[0].asd == std::nullopt);
    REQUIRE(rep.aggregate[0].dice == 0.0);
}

TEST_CASE("metrics report round-trips losslessly") {
    Rng rng(41);
    auto gt = random_mask(rng, 16, 16, 0.2);
    auto pred = random_mask(rng, 16, 16, 0.2);
    auto rep = metrics::evaluate({pred, gt}, {gt, gt}, {"a", "b"}, 0.7, "T-noDA");
    rep.config = {{"seed", "3"}, {"working_size", "16"}};

    const auto path = std::filesystem::temp_directory_path() / "seuda_report.jsonl";
    metrics::write_report(rep, path.string());
    auto back = metrics::read_report(path.string());

    REQUIRE(back.setting == rep.setting);
    REQUIRE(back.spacing_mm == rep.spacing_mm);
    REQUIRE(back.config == rep.config);
    REQUIRE(back.cases.size() == rep.cases.size());
    for (std::size_t i = 0; i < rep.cases.size(); ++i) {
        REQUIRE(back.cases[i].case_id == rep.cases[i].case_id);
        for (int k = 0; k < 2; ++k) {
            REQUIRE(back.cases[i].cls[k].dice == rep.cases[i].cls[k].dice);
            REQUIRE(back.cases[i].cls[k].recall == rep.cases[i].cls[k].recall);
            REQUIRE(back.cases[i].cls[k].precision == rep.cases[i].cls[k].precision);
            REQUIRE(back.cases[i].cls[k].asd == rep.cases[i].cls[k].asd);
        }
    }
    for (int k = 0; k < 2; ++k) {
        REQUIRE(back.aggregate[k].dice == rep.aggregate[k].dice);
        REQUIRE(back.aggregate[k].asd == rep.aggregate[k].asd);
        REQUIRE(back.aggregate[k].asd_missing == rep.aggregate[k].asd_missing);
    }
    std::filesystem::remove(path);
}
