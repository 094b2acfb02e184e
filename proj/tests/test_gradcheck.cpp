#include <catch2/catch_amalgamated.hpp>

#include <functional>

#include "seuda/seg/segmenter.hpp"
#include "seuda/uda/networks.hpp"

using namespace seuda;

namespace {

// Central finite differences against accumulated analytic gradients for
// every parameter in `params`. `eval(true)` must zero grads, compute the
// loss and backpropagate; `eval(false)` must only compute the loss.
struct GradCheckResult {
    double worst_rel = 0;
    std::size_t checked = 0;
};

GradCheckResult grad_check(const std::vector<nn::Param<double>*>& params,
                           const std::function<double(bool)>& eval, double h = 1e-6) {
    eval(true);
    GradCheckResult res;
    for (auto* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + h;
            const double lp = eval(false);
            p->value[i] = orig - h;
            const double lm = eval(false);
            p->value[i] = orig;
            const double num = (lp - lm) / (2 * h);
            const double ana = p->grad[i];
            const double scale = std::max(std::abs(num), std::abs(ana));
            if (scale > 1e-7) {
                res.worst_rel = std::max(res.worst_rel, std::abs(num - ana) / scale);
            } else {
                REQUIRE(std::abs(num - ana) < 1e-7);
            }
            ++res.checked;
        }
    }
    return res;
}

seg::SegmenterModel<double> mini_segmenter(std::uint64_t seed) {
    seg::SegmenterConfig cfg;
    cfg.base_channels = 4;
    cfg.stage_blocks = {1};
    cfg.dilated_stage_rates = {};
    cfg.head_rates = {1, 2, 3, 4};
    cfg.working_size = 8;
    return seg::build_segmenter<double>(cfg, seed);
}

uda::GeneratorConfig mini_gen() {
    uda::GeneratorConfig g;
    g.base_channels = 2;
    g.encoder_downsamples = 1;
    g.residual_blocks = 1;
    return g;
}

uda::DiscriminatorConfig mini_disc() {
    uda::DiscriminatorConfig d;
    d.layers = 2;
    d.base_channels = 4;
    return d;
}

Tensor<double> random_input(Rng& rng, int c, int s) {
    Tensor<double> t(c, s, s);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal(0, 0.5);
    return t;
}

}  // namespace

TEST_CASE("gradcheck: cross-entropy through the segmenter") {
    auto model = mini_segmenter(12);
    REQUIRE(model.net.param_count() <= 2000);
    Rng rng(100);
    auto x = random_input(rng, 1, 8);
    data::LabelMap y(8, 8);
    for (int i = 0; i < 64; ++i) y.labels[i] = static_cast<std::uint8_t>(i % 3);

    auto res = grad_check(model.net.params(), [&](bool bp) {
        auto probs = model.net.forward(x);
        Tensor<double> dp;
        const double loss = nn::cross_entropy_prob(probs, y, bp ? &dp : nullptr);
        if (bp) {
            model.net.zero_grad();
            model.net.backward(dp);
        }
        return loss;
    });
    INFO("checked " << res.checked << " params");
    REQUIRE(res.worst_rel < 1e-4);
}

TEST_CASE("gradcheck: generator-side LSGAN loss w.r.t. generator params") {
    auto g = uda::build_generator<double>(mini_gen(), Rng(21), "G");
    auto d = uda::build_discriminator<double>(mini_disc(), 1, Rng(22), "D");
    REQUIRE(g.param_count() + d.param_count() <= 2000);
    Rng rng(101);
    auto x = random_input(rng, 1, 8);

    auto res = grad_check(g.params(), [&](bool bp) {
        auto fake = g.forward(x);
        auto scores = d.forward(fake);
        const double loss = nn::lsgan_g_loss(scores);
        if (bp) {
            g.zero_grad();
            auto dfake = d.backward(nn::lsgan_g_grad(scores), /*accum_param_grads=*/false);
            g.backward(dfake);
        }
        return loss;
    });
    INFO("checked " << res.checked << " params");
    REQUIRE(res.worst_rel < 1e-4);
}

TEST_CASE("gradcheck: cycle loss through both generators, away from L1 kinks") {
    auto g_ts = uda::build_generator<double>(mini_gen(), Rng(31), "G_ts");
    auto g_st = uda::build_generator<double>(mini_gen(), Rng(32), "G_st");
    Rng rng(102);
    auto x_t = random_input(rng, 1, 8);
    auto x_s = random_input(rng, 1, 8);

    // precondition of the check: no reconstruction residual sits within
    // 1e-3 of zero, otherwise the FD step straddles the |.| kink
    {
        auto rec_t = g_st.forward(g_ts.forward(x_t));
        auto rec_s = g_ts.forward(g_st.forward(x_s));
        double closest = 1e9;
        for (std::size_t i = 0; i < rec_t.size(); ++i)
            closest = std::min(closest, std::abs(rec_t[i] - x_t[i]));
        for (std::size_t i = 0; i < rec_s.size(); ++i)
            closest = std::min(closest, std::abs(rec_s[i] - x_s[i]));
        REQUIRE(closest > 1e-3);
    }

    std::vector<nn::Param<double>*> params = g_ts.params();
    for (auto* p : g_st.params()) params.push_back(p);

    auto res = grad_check(params, [&](bool bp) {
        // target cycle
        auto fake_s = g_ts.forward(x_t);
        auto rec_t = g_st.forward(fake_s);
        Tensor<double> d_rec_t;
        const double cyc_t = nn::l1_loss(rec_t, x_t, bp ? &d_rec_t : nullptr);
        if (bp) {
            g_ts.zero_grad();
            g_st.zero_grad();
            auto dfake_s = g_st.backward(d_rec_t);
            g_ts.backward(dfake_s);
        }
        // source cycle
        auto fake_t = g_st.forward(x_s);
        auto rec_s = g_ts.forward(fake_t);
        Tensor<double> d_rec_s;
        const double cyc_s = nn::l1_loss(rec_s, x_s, bp ? &d_rec_s : nullptr);
        if (bp) {
            auto dfake_t = g_ts.backward(d_rec_s);
            g_st.backward(dfake_t);
        }
        return cyc_t + cyc_s;
    });
    INFO("checked " << res.checked << " params");
    REQUIRE(res.worst_rel < 1e-4);
}

TEST_CASE("gradcheck: semantic loss reaches G_ts through the frozen segmenter") {
    auto g_ts = uda::build_generator<double>(mini_gen(), Rng(41), "G_ts");
    auto segm = mini_segmenter(42);
    segm.frozen = true;
    auto d_m = uda::build_discriminator<double>(mini_disc(), 3, Rng(43), "D_m");
    Rng rng(103);
    auto x_t = random_input(rng, 1, 8);

    auto eval = [&](bool bp) {
        auto fake_s = g_ts.forward(x_t);
        auto probs = segm.net.forward(fake_s);
        auto scores = d_m.forward(probs);
        const double loss = nn::lsgan_g_loss(scores);
        if (bp) {
            g_ts.zero_grad();
            auto dprobs = d_m.backward(nn::lsgan_g_grad(scores), /*accum_param_grads=*/false);
            auto dfake = segm.net.backward(dprobs, /*accum_param_grads=*/false);
            g_ts.backward(dfake);
        }
        return loss;
    };

    auto res = grad_check(g_ts.params(), eval);
    INFO("checked " << res.checked << " params");
    REQUIRE(res.worst_rel < 1e-4);

    // gradient w.r.t. G_ts is nonzero while the frozen segmenter's
    // parameter gradients are never accumulated
    eval(true);
    double g_norm = 0;
    for (auto* p : g_ts.params())
        for (double v : p->grad) g_norm += v * v;
    REQUIRE(g_norm > 0.0);
    for (auto* p : segm.net.params())
        for (double v : p->grad) REQUIRE(v == 0.0);
    for (auto* p : d_m.params())
        for (double v : p->grad) REQUIRE(v == 0.0);
}
