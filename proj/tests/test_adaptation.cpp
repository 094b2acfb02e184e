#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "seuda/data/phantom.hpp"
#include "seuda/data/preprocess.hpp"
#include "seuda/uda/checkpoint.hpp"

using namespace seuda;

namespace {

uda::AdaptationConfig mini_config(std::uint64_t seed, double lambda_sem = 0.5) {
    uda::AdaptationConfig c;
    c.gen.base_channels = 4;
    c.gen.encoder_downsamples = 1;
    c.gen.residual_blocks = 1;
    c.disc.layers = 3;
    c.disc.base_channels = 4;
    c.weights.lambda_sem = lambda_sem;
    c.working_size = 16;
    c.pool_capacity = 8;
    c.seed = seed;
    c.with_mask_discriminator = lambda_sem > 0;
    return c;
}

seg::SegmenterModel<float> mini_segmenter(std::uint64_t seed) {
    seg::SegmenterConfig cfg;
    cfg.base_channels = 4;
    cfg.stage_blocks = {1};
    cfg.dilated_stage_rates = {};
    cfg.head_rates = {1, 2, 3, 4};
    cfg.working_size = 16;
    auto m = seg::build_segmenter<float>(cfg, seed);
    m.frozen = true;
    return m;
}

struct MiniData {
    data::Dataset source, target;
};

MiniData mini_data(int n = 4) {
    data::PhantomParams sp;
    sp.seed = 3;
    sp.working_size = 16;
    sp.domain = data::Domain::source;
    data::PhantomParams tp = sp;
    tp.domain = data::Domain::target;
    tp.intensity = {55.0, 190.0, 0.5, 0.9, 6.0};
    MiniData d{data::generate_phantoms(sp, n), data::generate_phantoms(tp, n)};
    for (auto* ds : {&d.source, &d.target})
        for (auto& item : ds->items) item.image = data::preprocess(item.image, 16);
    return d;
}

Tensor<float> norm_of(const data::Image& img) { return seg::to_normalized<float>(img); }

std::vector<std::vector<float>> gen_params(uda::AdaptationState<float>& st) {
    auto a = st.g_ts.snapshot();
    auto b = st.g_st.snapshot();
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("build_adaptation shapes and determinism") {
    auto a = uda::build_adaptation<float>(mini_config(5));
    auto b = uda::build_adaptation<float>(mini_config(5));
    auto c = uda::build_adaptation<float>(mini_config(6));
    REQUIRE(gen_params(a) == gen_params(b));
    REQUIRE(gen_params(a) != gen_params(c));

    Tensor<float> x(1, 16, 16, 0.3f);
    auto y = a.g_ts.forward(x);
    REQUIRE(y.channels() == 1);
    REQUIRE(y.height() == 16);
    REQUIRE(y.width() == 16);

    auto scores = a.d_s.forward(x);
    REQUIRE(scores.plane() > 1);  // patch behaviour: several spatial cells

    auto m_scores = a.d_m.forward(Tensor<float>(3, 16, 16, 0.33f));
    REQUIRE(m_scores.plane() > 1);

    auto bad = mini_config(5);
    bad.working_size = 4;  // discriminator conv stack cannot consume 4x4
    REQUIRE_THROWS(uda::build_adaptation<float>(bad));
}

TEST_CASE("non-patch discriminator collapses scores to one cell") {
    auto cfg = mini_config(5);
    cfg.disc.patch_mode = false;
    auto st = uda::build_adaptation<float>(cfg);
    auto scores = st.d_s.forward(Tensor<float>(1, 16, 16, 0.1f));
    REQUIRE(scores.plane() == 1);
}

TEST_CASE("train_step keeps the frozen segmenter bit-identical and recombines Eq. 4") {
    auto st = uda::build_adaptation<float>(mini_config(7));
    auto segm = mini_segmenter(8);
    auto d = mini_data();

    auto seg_before = segm.net.snapshot();
    for (int i = 0; i < 5; ++i) {
        auto rep = uda::train_step(st, segm, norm_of(d.source[i % 4].image),
                                   *d.source[i % 4].mask, norm_of(d.target[(i + 1) % 4].image));
        REQUIRE(rep.finite());
        const double recombined = rep.gan_st + 0.5 * rep.gan_ts + 10.0 * rep.cyc + 0.5 * rep.sem;
        REQUIRE(std::abs(rep.total - recombined) < 1e-6);
        REQUIRE(rep.sem > 0.0);
    }
    REQUIRE(segm.net.snapshot() == seg_before);

    segm.frozen = false;
    REQUIRE_THROWS_AS(uda::train_step(st, segm, norm_of(d.source[0].image), *d.source[0].mask,
                                      norm_of(d.target[0].image)),
                      std::logic_error);
}

TEST_CASE("lambda_sem = 0 never touches the mask discriminator") {
    auto st = uda::build_adaptation<float>(mini_config(9, 0.0));
    // full build including D_m, but lambda 0
    auto cfg = mini_config(9, 0.0);
    cfg.with_mask_discriminator = true;
    auto st_full = uda::build_adaptation<float>(cfg);
    auto segm = mini_segmenter(10);
    auto d = mini_data();

    auto dm_before = st_full.d_m.snapshot();
    for (int i = 0; i < 4; ++i) {
        auto rep = uda::train_step(st_full, segm, norm_of(d.source[i].image), *d.source[i].mask,
                                   norm_of(d.target[i].image));
        REQUIRE(rep.sem == 0.0);
        REQUIRE(rep.d_m == 0.0);
    }
    REQUIRE(st_full.d_m.snapshot() == dm_before);
    (void)st;
}

TEST_CASE("CyUDA equivalence: lambda 0 matches a build without D_m, step by step") {
    auto with_dm = mini_config(21, 0.0);
    with_dm.with_mask_discriminator = true;
    auto without_dm = mini_config(21, 0.0);
    without_dm.with_mask_discriminator = false;

    auto a = uda::build_adaptation<float>(with_dm);
    auto b = uda::build_adaptation<float>(without_dm);
    auto segm = mini_segmenter(22);
    auto d = mini_data();

    REQUIRE(gen_params(a) == gen_params(b));
    for (int i = 0; i < 30; ++i) {
        const auto& xs = d.source[i % 4];
        const auto& xt = d.target[(i * 3 + 1) % 4];
        uda::train_step(a, segm, norm_of(xs.image), *xs.mask, norm_of(xt.image));
        uda::train_step(b, segm, norm_of(xs.image), *xs.mask, norm_of(xt.image));
        REQUIRE(gen_params(a) == gen_params(b));
    }
}

TEST_CASE("train_adaptation: no-op at zero epochs, deterministic histories") {
    auto segm = mini_segmenter(30);
    auto d = mini_data();

    auto st0 = uda::build_adaptation<float>(mini_config(31));
    auto before = gen_params(st0);
    auto h0 = uda::train_adaptation(st0, segm, d.source, d.target, 0);
    REQUIRE(h0.empty());
    REQUIRE(gen_params(st0) == before);
    REQUIRE(st0.epoch == 0);

    auto s1 = uda::build_adaptation<float>(mini_config(31));
    auto s2 = uda::build_adaptation<float>(mini_config(31));
    auto h1 = uda::train_adaptation(s1, segm, d.source, d.target, 3);
    auto h2 = uda::train_adaptation(s2, segm, d.source, d.target, 3);
    REQUIRE(h1.size() == 3);
    for (std::size_t i = 0; i < h1.size(); ++i) {
        REQUIRE(h1[i].mean.total == h2[i].mean.total);
        REQUIRE(h1[i].mean.cyc == h2[i].mean.cyc);
        REQUIRE(h1[i].lr == h2[i].lr);
    }
    REQUIRE(gen_params(s1) == gen_params(s2));

    auto unlabeled = d.source;
    unlabeled.items[0].mask.reset();
    REQUIRE_THROWS_AS(uda::train_adaptation(s1, segm, unlabeled, d.target, 1),
                      std::invalid_argument);
}

TEST_CASE("transform: shape, range, purity, domain tag") {
    auto st = uda::build_adaptation<float>(mini_config(40));
    auto d = mini_data();
    auto out1 = uda::transform(st, d.target[0].image);
    auto out2 = uda::transform(st, d.target[0].image);
    REQUIRE(out1.height() == 16);
    REQUIRE(out1.width() == 16);
    REQUIRE(out1.domain == data::Domain::transformed);
    REQUIRE(out1.pixels == out2.pixels);
    for (std::size_t i = 0; i < out1.pixels.size(); ++i) {
        REQUIRE(std::isfinite(out1.pixels[i]));
        REQUIRE(out1.pixels[i] >= 0.0f);
        REQUIRE(out1.pixels[i] <= 255.0f);
    }
    data::Image wrong(8, 8, 0.0f);
    REQUIRE_THROWS_AS(uda::transform(st, wrong), std::invalid_argument);
}

TEST_CASE("adaptation checkpoint round-trips and resumes identically") {
    auto segm = mini_segmenter(50);
    auto d = mini_data();
    auto st = uda::build_adaptation<float>(mini_config(51));
    uda::train_adaptation(st, segm, d.source, d.target, 2);

    const auto path = (std::filesystem::temp_directory_path() / "seuda_uda_ckpt.bin").string();
    uda::save_adaptation(st, path);
    auto loaded = uda::load_adaptation<float>(path);

    REQUIRE(loaded.epoch == st.epoch);
    REQUIRE(gen_params(loaded) == gen_params(st));
    REQUIRE(loaded.pool_fake_s.size() == st.pool_fake_s.size());
    REQUIRE(uda::transform(loaded, d.target[1].image).pixels ==
            uda::transform(st, d.target[1].image).pixels);

    // resuming both copies produces identical trajectories
    auto h1 = uda::train_adaptation(st, segm, d.source, d.target, 2);
    auto h2 = uda::train_adaptation(loaded, segm, d.source, d.target, 2);
    REQUIRE(h1.size() == h2.size());
    for (std::size_t i = 0; i < h1.size(); ++i) REQUIRE(h1[i].mean.total == h2[i].mean.total);
    REQUIRE(gen_params(loaded) == gen_params(st));
    std::filesystem::remove(path);
}

TEST_CASE("weights and label smoothing are validated") {
    auto bad = mini_config(60);
    bad.weights.alpha = -1;
    REQUIRE_THROWS_AS(uda::build_adaptation<float>(bad), std::invalid_argument);
    auto bad2 = mini_config(60);
    bad2.label_smooth = 1.5;
    REQUIRE_THROWS_AS(uda::build_adaptation<float>(bad2), std::invalid_argument);
    auto bad3 = mini_config(60, 0.5);
    bad3.with_mask_discriminator = false;
    auto st = uda::build_adaptation<float>(bad3);
    auto segm = mini_segmenter(61);
    auto d = mini_data();
    REQUIRE_THROWS_AS(uda::train_step(st, segm, norm_of(d.source[0].image), *d.source[0].mask,
                                      norm_of(d.target[0].image)),
                      std::logic_error);
}
