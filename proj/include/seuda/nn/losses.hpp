#pragma once

#include <cmath>
#include <stdexcept>

#include "seuda/core/tensor.hpp"
#include "seuda/data/image.hpp"

namespace seuda::nn {

inline constexpr double kProbEps = 1e-7;

// Mean over pixels of -log p(true class), probabilities clipped to
// [kProbEps, 1] before the log. Returns the loss; if grad is non-null it
// receives dL/dprob (zero where clipping is active).
template <typename T>
double cross_entropy_prob(const Tensor<T>& probs, const data::LabelMap& gt,
                          Tensor<T>* grad = nullptr) {
    if (probs.height() != gt.height() || probs.width() != gt.width())
        throw std::invalid_argument("cross_entropy: shape mismatch");
    const std::size_t n = probs.plane();
    if (grad) *grad = Tensor<T>(probs.channels(), probs.height(), probs.width());

    double loss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int cls = gt.labels[i];
        if (cls < 0 || cls >= probs.channels())
            throw std::invalid_argument("cross_entropy: label out of range");
        const double p = probs[static_cast<std::size_t>(cls) * n + i];
        const double pc = std::max(p, kProbEps);
        loss -= std::log(pc);
        if (grad && p > kProbEps)
            (*grad)[static_cast<std::size_t>(cls) * n + i] =
                static_cast<T>(-1.0 / (pc * static_cast<double>(n)));
    }
    return loss / static_cast<double>(n);
}

// Least-squares GAN terms over patch score maps, targets 1 (real) and
// 0 (fake). The discriminator loss carries the conventional 0.5 factor.
//   d_loss = 0.5*[mean((s_r-1)^2) + mean(s_f^2)]
//   g_loss = mean((s_f-1)^2)
struct LsganLosses {
    double d_loss = 0;
    double g_loss = 0;
};

template <typename T>
LsganLosses lsgan_losses(const Tensor<T>& scores_real, const Tensor<T>& scores_fake) {
    double real_term = 0, fake_term = 0, g_term = 0;
    for (std::size_t i = 0; i < scores_real.size(); ++i) {
        const double d = scores_real[i] - 1.0;
        real_term += d * d;
    }
    for (std::size_t i = 0; i < scores_fake.size(); ++i) {
        const double s = scores_fake[i];
        fake_term += s * s;
        g_term += (s - 1.0) * (s - 1.0);
    }
    LsganLosses out;
    out.d_loss = 0.5 * (real_term / static_cast<double>(scores_real.size()) +
                        fake_term / static_cast<double>(scores_fake.size()));
    out.g_loss = g_term / static_cast<double>(scores_fake.size());
    return out;
}

// Generator-side term alone: mean((s_f-1)^2).
template <typename T>
double lsgan_g_loss(const Tensor<T>& scores_fake) {
    double g = 0;
    for (std::size_t i = 0; i < scores_fake.size(); ++i) {
        const double d = scores_fake[i] - 1.0;
        g += d * d;
    }
    return g / static_cast<double>(scores_fake.size());
}

// dL/dscores for the three LSGAN pieces.
template <typename T>
Tensor<T> lsgan_d_real_grad(const Tensor<T>& scores_real) {
    Tensor<T> g(scores_real.channels(), scores_real.height(), scores_real.width());
    const double n = static_cast<double>(scores_real.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = static_cast<T>((scores_real[i] - 1.0) / n);
    return g;
}

template <typename T>
Tensor<T> lsgan_d_fake_grad(const Tensor<T>& scores_fake) {
    Tensor<T> g(scores_fake.channels(), scores_fake.height(), scores_fake.width());
    const double n = static_cast<double>(scores_fake.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<T>(scores_fake[i] / n);
    return g;
}

template <typename T>
Tensor<T> lsgan_g_grad(const Tensor<T>& scores_fake) {
    Tensor<T> g(scores_fake.channels(), scores_fake.height(), scores_fake.width());
    const double n = static_cast<double>(scores_fake.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = static_cast<T>(2.0 * (scores_fake[i] - 1.0) / n);
    return g;
}

// Mean absolute difference. grad, if given, is dL/da.
template <typename T>
double l1_loss(const Tensor<T>& a, const Tensor<T>& b, Tensor<T>* grad = nullptr) {
    if (!a.same_shape(b)) throw std::invalid_argument("l1_loss: shape mismatch");
    if (grad) *grad = Tensor<T>(a.channels(), a.height(), a.width());
    double loss = 0;
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        loss += std::abs(d);
        if (grad) (*grad)[i] = static_cast<T>(d > 0 ? 1.0 / n : d < 0 ? -1.0 / n : 0.0);
    }
    return loss / n;
}

}  // namespace seuda::nn
