#include <catch2/catch_amalgamated.hpp>

#include "seuda/nn/losses.hpp"
#include "seuda/uda/adaptation.hpp"

using namespace seuda;

TEST_CASE("lsgan losses at analytic points") {
    Tensor<float> ones(1, 2, 2, 1.0f), zeros(1, 2, 2, 0.0f), half(1, 2, 2, 0.5f);

    auto perfect = nn::lsgan_losses(ones, zeros);
    REQUIRE(perfect.d_loss == Catch::Approx(0.0));
    REQUIRE(perfect.g_loss == Catch::Approx(1.0));

    auto mid = nn::lsgan_losses(half, half);
    REQUIRE(mid.d_loss == Catch::Approx(0.25));
    REQUIRE(mid.g_loss == Catch::Approx(0.25));

    auto fooled = nn::lsgan_losses(ones, ones);
    REQUIRE(fooled.d_loss == Catch::Approx(0.5));
    REQUIRE(fooled.g_loss == Catch::Approx(0.0));
}

TEST_CASE("semantic losses share the least-squares form") {
    Tensor<float> ones(1, 3, 3, 1.0f), zeros(1, 3, 3, 0.0f), half(1, 3, 3, 0.5f);
    auto a = uda::semantic_losses(ones, zeros);
    REQUIRE(a.d_loss == Catch::Approx(0.0));
    REQUIRE(a.g_loss == Catch::Approx(1.0));
    auto b = uda::semantic_losses(half, half);
    REQUIRE(b.d_loss == Catch::Approx(0.25));
    REQUIRE(b.g_loss == Catch::Approx(0.25));
}

TEST_CASE("cycle loss is the sum of the two per-pixel-mean L1 terms") {
    Tensor<float> x_t(1, 4, 4, 10.0f), x_s(1, 4, 4, -3.0f);

    // both cycles exact
    REQUIRE(nn::l1_loss(x_t, x_t) + nn::l1_loss(x_s, x_s) == Catch::Approx(0.0));

    // target cycle off by constant 3, source exact
    Tensor<float> rec_t(1, 4, 4, 13.0f);
    REQUIRE(nn::l1_loss(rec_t, x_t) + nn::l1_loss(x_s, x_s) == Catch::Approx(3.0));

    // both cycles off by constant 2
    Tensor<float> rec_t2(1, 4, 4, 12.0f), rec_s2(1, 4, 4, -1.0f);
    REQUIRE(nn::l1_loss(rec_t2, x_t) + nn::l1_loss(rec_s2, x_s) == Catch::Approx(4.0));

    Tensor<float> other(1, 2, 2);
    REQUIRE_THROWS_AS(nn::l1_loss(x_t, other), std::invalid_argument);
}

TEST_CASE("total objective combines per Eq.-4 weighting") {
    uda::AdaptationWeights w;  // {0.5, 10, 0.5}
    REQUIRE(uda::total_objective(1.0, 0.8, 0.2, 0.4, w) == Catch::Approx(3.6));

    uda::AdaptationWeights cy = w;
    cy.lambda_sem = 0.0;
    REQUIRE(uda::total_objective(1.0, 0.8, 0.2, 0.4, cy) ==
            Catch::Approx(uda::total_objective(1.0, 0.8, 0.2, 0.0, w)));

    REQUIRE(uda::total_objective(0, 0, 0, 0, w) == 0.0);
}

TEST_CASE("cross entropy at analytic points") {
    const int n = 4;
    data::LabelMap y(n, n);
    for (int i = 0; i < n * n; ++i) y.labels[i] = static_cast<std::uint8_t>(i % 3);

    // one-hot-correct prediction
    Tensor<float> onehot(3, n, n, 0.0f);
    for (int i = 0; i < n * n; ++i) onehot[y.labels[i] * n * n + i] = 1.0f;
    REQUIRE(nn::cross_entropy_prob(onehot, y) <= 1e-6);

    // uniform prediction
    Tensor<float> uniform(3, n, n, 1.0f / 3.0f);
    REQUIRE(nn::cross_entropy_prob(uniform, y) == Catch::Approx(std::log(3.0)).margin(1e-4));

    // zero probability on the true class, clipped
    Tensor<float> wrong(3, n, n, 0.0f);
    for (int i = 0; i < n * n; ++i) wrong[((y.labels[i] + 1) % 3) * n * n + i] = 1.0f;
    REQUIRE(nn::cross_entropy_prob(wrong, y) ==
            Catch::Approx(-std::log(nn::kProbEps)).epsilon(1e-6));

    data::LabelMap small(2, 2);
    REQUIRE_THROWS_AS(nn::cross_entropy_prob(uniform, small), std::invalid_argument);
}

TEST_CASE("one-hot smoothing stays on the simplex") {
    data::LabelMap y(4, 4);
    y.at(0, 0) = 1;
    y.at(1, 1) = 2;
    auto t = uda::one_hot_smooth<float>(y, 3, 0.1);
    const std::size_t plane = t.plane();
    for (std::size_t i = 0; i < plane; ++i) {
        double s = 0;
        for (int c = 0; c < 3; ++c) s += t[c * plane + i];
        REQUIRE(s == Catch::Approx(1.0).margin(1e-6));
    }
    REQUIRE(t.at(1, 0, 0) == Catch::Approx(0.9f));
    REQUIRE(t.at(0, 0, 0) == Catch::Approx(0.05f));
}
