#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "seuda/data/phantom.hpp"
#include "seuda/data/preprocess.hpp"
#include "seuda/data/split.hpp"
#include "seuda/seg/segmenter.hpp"

using namespace seuda;

namespace {

seg::SegmenterConfig small64() {
    seg::SegmenterConfig cfg;
    cfg.base_channels = 8;
    cfg.stage_blocks = {1, 1, 1, 1};
    cfg.dilated_stage_rates = {2};
    cfg.working_size = 64;
    return cfg;
}

data::Image random_image(Rng& rng, int s) {
    data::Image img(s, s);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<float>(rng.uniform(0, 255));
    return img;
}

std::vector<std::vector<float>> param_bytes(seg::SegmenterModel<float>& m) {
    return m.net.snapshot();
}

}  // namespace

TEST_CASE("segmenter emits a working-size probability simplex") {
    auto model = seg::build_segmenter<float>(small64(), 1);
    Rng rng(5);
    auto img = random_image(rng, 64);
    auto probs = seg::segment(model, img);
    REQUIRE(probs.channels() == 3);
    REQUIRE(probs.height() == 64);
    REQUIRE(probs.width() == 64);
    const std::size_t n = probs.plane();
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (int c = 0; c < 3; ++c) {
            REQUIRE(probs[c * n + i] >= 0.0f);
            s += probs[c * n + i];
        }
        REQUIRE(std::abs(s - 1.0) < 1e-5);
    }
}

TEST_CASE("segmenter build is seed-deterministic") {
    auto a = seg::build_segmenter<float>(small64(), 9);
    auto b = seg::build_segmenter<float>(small64(), 9);
    auto c = seg::build_segmenter<float>(small64(), 10);
    REQUIRE(a.net.snapshot() == b.net.snapshot());
    REQUIRE(a.net.snapshot() != c.net.snapshot());
}

TEST_CASE("segment is pure: identical calls, identical maps, frozen params") {
    auto model = seg::build_segmenter<float>(small64(), 2);
    model.frozen = true;
    Rng rng(6);
    auto img = random_image(rng, 64);
    auto before = param_bytes(model);
    auto p1 = seg::segment(model, img);
    auto p2 = seg::segment(model, img);
    REQUIRE(p1 == p2);
    REQUIRE(param_bytes(model) == before);

    data::Image small(32, 32, 1.0f);
    REQUIRE_THROWS_AS(seg::segment(model, small), std::invalid_argument);
}

TEST_CASE("segmenter config validation") {
    auto cfg = small64();
    cfg.head_rates = {6, 12, 18};
    REQUIRE_THROWS_AS(seg::build_segmenter<float>(cfg, 1), std::invalid_argument);
    cfg = small64();
    cfg.base_channels = 2;
    REQUIRE_THROWS_AS(seg::build_segmenter<float>(cfg, 1), std::invalid_argument);
    cfg = small64();
    cfg.working_size = 8;
    cfg.stage_blocks = {1, 1, 1, 1, 1};
    cfg.dilated_stage_rates = {};
    REQUIRE_THROWS_WITH(seg::build_segmenter<float>(cfg, 1),
                        Catch::Matchers::ContainsSubstring("downsampling exceeds"));
}

TEST_CASE("train_segmenter: zero epochs is a no-op, frozen and unlabeled error") {
    seg::SegmenterConfig cfg;
    cfg.base_channels = 4;
    cfg.stage_blocks = {1};
    cfg.dilated_stage_rates = {};
    cfg.head_rates = {1, 2, 3, 4};
    cfg.working_size = 16;
    auto model = seg::build_segmenter<float>(cfg, 3);

    data::PhantomParams p;
    p.seed = 5;
    p.working_size = 16;
    auto ds = data::generate_phantoms(p, 4);
    for (auto& item : ds.items) item.image = data::preprocess(item.image, 16);

    auto before = param_bytes(model);
    seg::SegTrainOptions opts;
    opts.epochs = 0;
    auto hist = seg::train_segmenter(model, ds, ds, opts);
    REQUIRE(hist.empty());
    REQUIRE(param_bytes(model) == before);

    model.frozen = true;
    opts.epochs = 1;
    REQUIRE_THROWS_AS(seg::train_segmenter(model, ds, ds, opts), std::logic_error);
    model.frozen = false;

    auto unlabeled = ds;
    unlabeled.items[1].mask.reset();
    REQUIRE_THROWS_AS(seg::train_segmenter(model, unlabeled, ds, opts), std::invalid_argument);
}

TEST_CASE("train_segmenter learns phantoms and is seed-deterministic") {
    data::PhantomParams p;
    p.seed = 8;
    p.working_size = 32;
    auto all = data::generate_phantoms(p, 16);
    for (auto& item : all.items) item.image = data::preprocess(item.image, 32);
    auto parts = data::split(all, {3, 1, 0.0001}, 2);

    seg::SegmenterConfig cfg;
    cfg.base_channels = 6;
    cfg.stage_blocks = {1, 1};
    cfg.dilated_stage_rates = {2};
    cfg.working_size = 32;

    seg::SegTrainOptions opts;
    opts.epochs = 8;
    opts.lr = 0.02;
    opts.seed = 4;

    auto m1 = seg::build_segmenter<float>(cfg, 11);
    auto h1 = seg::train_segmenter(m1, parts.train, parts.val, opts);
    auto m2 = seg::build_segmenter<float>(cfg, 11);
    auto h2 = seg::train_segmenter(m2, parts.train, parts.val, opts);

    REQUIRE(h1.size() == 8);
    for (std::size_t i = 0; i < h1.size(); ++i) {
        REQUIRE(h1[i].train_loss == h2[i].train_loss);
        REQUIRE(h1[i].val_dice == h2[i].val_dice);
    }
    REQUIRE(param_bytes(m1) == param_bytes(m2));
    REQUIRE(h1.back().val_dice > 80.0);
    REQUIRE(h1.back().train_loss < h1.front().train_loss);
}

TEST_CASE("segmenter checkpoint round-trips bit-stably") {
    auto model = seg::build_segmenter<float>(small64(), 77);
    model.frozen = true;
    const auto path =
        (std::filesystem::temp_directory_path() / "seuda_seg_ckpt.bin").string();
    seg::save_segmenter(model, path);
    auto loaded = seg::load_segmenter<float>(path);
    REQUIRE(loaded.frozen);
    REQUIRE(loaded.config.base_channels == model.config.base_channels);
    REQUIRE(loaded.net.snapshot() == model.net.snapshot());

    Rng rng(13);
    auto img = random_image(rng, 64);
    REQUIRE(seg::segment(loaded, img) == seg::segment(model, img));

    // second save of the loaded model produces identical bytes
    const auto path2 =
        (std::filesystem::temp_directory_path() / "seuda_seg_ckpt2.bin").string();
    seg::save_segmenter(loaded, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), {});
    std::string b2((std::istreambuf_iterator<char>(f2)), {});
    REQUIRE(b1 == b2);
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}
