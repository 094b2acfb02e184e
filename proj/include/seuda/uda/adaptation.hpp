#pragma once

#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "seuda/core/errors.hpp"
#include "seuda/core/serialize.hpp"
#include "seuda/seg/segmenter.hpp"
#include "seuda/uda/networks.hpp"
#include "seuda/uda/pool.hpp"
#include "seuda/uda/schedule.hpp"

namespace seuda::uda {

// Trade-off weights of the total objective:
//   gan_st + alpha*gan_ts + beta*cyc + lambda_sem*sem
struct AdaptationWeights {
    double alpha = 0.5;
    double beta = 10.0;
    double lambda_sem = 0.5;

    void validate() const {
        if (alpha < 0 || beta < 0 || lambda_sem < 0)
            throw std::invalid_argument("weights must be non-negative");
    }
};

struct AdaptationConfig {
    GeneratorConfig gen;
    DiscriminatorConfig disc;
    AdaptationWeights weights;
    int working_size = 64;
    int num_classes = data::kNumClasses;
    double base_lr = 0.002;
    long long lr_hold = 100;
    long long lr_decay = 100;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    std::size_t pool_capacity = 50;
    bool use_mask_pool = true;
    // When false, the mask discriminator is never constructed; with
    // lambda_sem == 0 this build is trajectory-identical to the full one.
    bool with_mask_discriminator = true;
    double label_smooth = 0.1;
    std::uint64_t seed = 0;
};

struct LossReport {
    double gan_st = 0;  // generator-side LSGAN loss of G_st vs D_t
    double gan_ts = 0;  // generator-side LSGAN loss of G_ts vs D_s
    double cyc = 0;
    double sem = 0;
    double total = 0;
    double d_s = 0, d_t = 0, d_m = 0;

    bool finite() const {
        for (double v : {gan_st, gan_ts, cyc, sem, total, d_s, d_t, d_m})
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double total_objective(double gan_st, double gan_ts, double cyc, double sem,
                              const AdaptationWeights& w) {
    return gan_st + w.alpha * gan_ts + w.beta * cyc + w.lambda_sem * sem;
}

// The semantic adversary is trained with the same least-squares form as
// the image discriminators; real input is the smoothed one-hot y^s, fake
// input is the segmenter's probability map on the transformed image.
template <typename T>
nn::LsganLosses semantic_losses(const Tensor<T>& d_m_scores_real_mask,
                                const Tensor<T>& d_m_scores_fake_mask) {
    return nn::lsgan_losses(d_m_scores_real_mask, d_m_scores_fake_mask);
}

// Smoothed one-hot encoding: true class 1-s, each other class s/(C-1),
// keeping every pixel on the probability simplex.
template <typename T>
Tensor<T> one_hot_smooth(const data::LabelMap& y, int num_classes, double smooth) {
    Tensor<T> out(num_classes, y.height(), y.width());
    const std::size_t n = out.plane();
    const T off = static_cast<T>(smooth / (num_classes - 1));
    const T on = static_cast<T>(1.0 - smooth);
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < num_classes; ++c)
            out[static_cast<std::size_t>(c) * n + i] = (c == y.labels[i]) ? on : off;
    }
    return out;
}

template <typename T>
struct AdaptationState {
    AdaptationConfig config;
    nn::Sequential<T> g_ts, g_st;      // generators
    nn::Sequential<T> d_s, d_t, d_m;   // discriminators (d_m may be absent)
    std::optional<nn::Adam<T>> opt_g_ts, opt_g_st, opt_d_s, opt_d_t, opt_d_m;
    ImagePool<T> pool_fake_s, pool_fake_t, pool_fake_mask;
    long long epoch = 0;
    Rng shuffle_rng;

    bool has_mask_disc() const { return !d_m.empty(); }

    void set_lr(double lr) {
        opt_g_ts->set_lr(lr);
        opt_g_st->set_lr(lr);
        opt_d_s->set_lr(lr);
        opt_d_t->set_lr(lr);
        if (opt_d_m) opt_d_m->set_lr(lr);
    }
};

// Seed-deterministic construction. Every network and pool draws from its
// own (seed, tag) stream, so builds with and without the mask
// discriminator initialize the shared networks identically.
template <typename T>
AdaptationState<T> build_adaptation(const AdaptationConfig& config) {
    config.gen.validate();
    config.disc.validate();
    config.weights.validate();
    if (config.label_smooth < 0 || config.label_smooth >= 1)
        throw std::invalid_argument("build_adaptation: label_smooth must be in [0,1)");

    AdaptationState<T> st;
    st.config = config;
    const auto seed = config.seed;
    st.g_ts = build_generator<T>(config.gen, Rng::stream(seed, "uda-G_ts"), "G_ts");
    st.g_st = build_generator<T>(config.gen, Rng::stream(seed, "uda-G_st"), "G_st");
    st.d_s = build_discriminator<T>(config.disc, 1, Rng::stream(seed, "uda-D_s"), "D_s");
    st.d_t = build_discriminator<T>(config.disc, 1, Rng::stream(seed, "uda-D_t"), "D_t");
    if (config.with_mask_discriminator)
        st.d_m = build_discriminator<T>(config.disc, config.num_classes,
                                        Rng::stream(seed, "uda-D_m"), "D_m");

    const double lr0 = lr_at(0, config.base_lr, config.lr_hold, config.lr_decay);
    auto adam = [&](nn::Sequential<T>& net) {
        return nn::Adam<T>(net.params(), lr0, config.adam_beta1, config.adam_beta2);
    };
    st.opt_g_ts.emplace(adam(st.g_ts));
    st.opt_g_st.emplace(adam(st.g_st));
    st.opt_d_s.emplace(adam(st.d_s));
    st.opt_d_t.emplace(adam(st.d_t));
    if (config.with_mask_discriminator) st.opt_d_m.emplace(adam(st.d_m));

    st.pool_fake_s = ImagePool<T>(config.pool_capacity, Rng::stream(seed, "uda-pool-s"));
    st.pool_fake_t = ImagePool<T>(config.pool_capacity, Rng::stream(seed, "uda-pool-t"));
    st.pool_fake_mask = ImagePool<T>(config.pool_capacity, Rng::stream(seed, "uda-pool-m"));
    st.shuffle_rng = Rng::stream(seed, "uda-shuffle");

    // Probe the whole graph once so incompatible config/working-size
    // combinations fail at build time, not mid-training.
    const int S = config.working_size;
    Tensor<T> probe(1, S, S, T(0));
    Tensor<T> fake = st.g_ts.forward(probe);
    if (fake.height() != S || fake.width() != S)
        throw std::invalid_argument("build_adaptation: generator does not preserve size " +
                                    std::to_string(S));
    st.g_st.forward(probe);
    st.d_s.forward(probe);
    st.d_t.forward(probe);
    if (config.with_mask_discriminator)
        st.d_m.forward(Tensor<T>(config.num_classes, S, S, T(0)));
    return st;
}

namespace detail {

template <typename T>
void check_finite(double v, const char* component) {
    if (!std::isfinite(v))
        throw NumericalError(std::string("train_step: non-finite loss component ") + component);
}

}  // namespace detail

// One full update cycle: (1) forward both translation cycles, (2) update
// both generators on the total objective, (3) update D_s and D_t on
// pool-replayed fakes, (4) update D_m on the smoothed one-hot y^s versus
// a (pooled) predicted mask. The segmenter must be frozen; its gradients
// are propagated to G_ts but never accumulated. With lambda_sem == 0 the
// semantic branch is skipped entirely (CyUDA).
template <typename T>
LossReport train_step(AdaptationState<T>& st, seg::SegmenterModel<T>& segmenter,
                      const Tensor<T>& x_s, const data::LabelMap& y_s, const Tensor<T>& x_t) {
    if (!segmenter.frozen) throw std::logic_error("train_step: segmenter must be frozen");
    const auto& w = st.config.weights;
    const bool sem_on = w.lambda_sem > 0.0;
    if (sem_on && !st.has_mask_disc())
        throw std::logic_error("train_step: lambda_sem > 0 requires the mask discriminator");

    LossReport rep;

    // ---- generator update ----
    st.g_ts.zero_grad();
    st.g_st.zero_grad();

    // target cycle: x_t -> fake_s -> rec_t
    Tensor<T> fake_s = st.g_ts.forward(x_t);
    Tensor<T> grad_fake_s(fake_s.channels(), fake_s.height(), fake_s.width());
    Tensor<T> fake_mask;  // segmenter probs on fake_s, reused for the D_m update

    if (sem_on) {
        fake_mask = segmenter.net.forward(fake_s);
        Tensor<T> dm_scores = st.d_m.forward(fake_mask);
        rep.sem = nn::lsgan_g_loss(dm_scores);
        Tensor<T> dscores = nn::lsgan_g_grad(dm_scores);
        dscores.scale(static_cast<T>(w.lambda_sem));
        Tensor<T> dprobs = st.d_m.backward(dscores, /*accum_param_grads=*/false);
        grad_fake_s.add(segmenter.net.backward(dprobs, /*accum_param_grads=*/false));
    }

    {
        Tensor<T> ds_scores = st.d_s.forward(fake_s);
        rep.gan_ts = nn::lsgan_g_loss(ds_scores);
        Tensor<T> dscores = nn::lsgan_g_grad(ds_scores);
        dscores.scale(static_cast<T>(w.alpha));
        grad_fake_s.add(st.d_s.backward(dscores, /*accum_param_grads=*/false));
    }

    Tensor<T> rec_t = st.g_st.forward(fake_s);
    {
        Tensor<T> d_rec_t;
        const double cyc_t = nn::l1_loss(rec_t, x_t, &d_rec_t);
        rep.cyc += cyc_t;
        d_rec_t.scale(static_cast<T>(w.beta));
        grad_fake_s.add(st.g_st.backward(d_rec_t, /*accum_param_grads=*/true));
    }
    st.g_ts.backward(grad_fake_s, /*accum_param_grads=*/true);

    // source cycle: x_s -> fake_t -> rec_s
    Tensor<T> fake_t = st.g_st.forward(x_s);
    Tensor<T> grad_fake_t(fake_t.channels(), fake_t.height(), fake_t.width());
    {
        Tensor<T> dt_scores = st.d_t.forward(fake_t);
        rep.gan_st = nn::lsgan_g_loss(dt_scores);
        grad_fake_t.add(st.d_t.backward(nn::lsgan_g_grad(dt_scores), false));
    }
    Tensor<T> rec_s = st.g_ts.forward(fake_t);
    {
        Tensor<T> d_rec_s;
        const double cyc_s = nn::l1_loss(rec_s, x_s, &d_rec_s);
        rep.cyc += cyc_s;
        d_rec_s.scale(static_cast<T>(w.beta));
        grad_fake_t.add(st.g_ts.backward(d_rec_s, /*accum_param_grads=*/true));
    }
    st.g_st.backward(grad_fake_t, /*accum_param_grads=*/true);

    detail::check_finite<T>(rep.gan_st, "gan_st");
    detail::check_finite<T>(rep.gan_ts, "gan_ts");
    detail::check_finite<T>(rep.cyc, "cyc");
    detail::check_finite<T>(rep.sem, "sem");

    st.opt_g_ts->step();
    st.opt_g_st->step();

    // ---- discriminator updates, one optimizer step each ----
    auto update_disc = [](nn::Sequential<T>& d, nn::Adam<T>& opt, const Tensor<T>& real,
                          const Tensor<T>& fake) {
        d.zero_grad();
        Tensor<T> s_real = d.forward(real);
        d.backward(nn::lsgan_d_real_grad(s_real), true);
        Tensor<T> s_fake = d.forward(fake);
        d.backward(nn::lsgan_d_fake_grad(s_fake), true);
        const double loss = nn::lsgan_losses(s_real, s_fake).d_loss;
        opt.step();
        return loss;
    };

    rep.d_s = update_disc(st.d_s, *st.opt_d_s, x_s, st.pool_fake_s.query(fake_s));
    detail::check_finite<T>(rep.d_s, "d_s");
    rep.d_t = update_disc(st.d_t, *st.opt_d_t, x_t, st.pool_fake_t.query(fake_t));
    detail::check_finite<T>(rep.d_t, "d_t");

    if (sem_on) {
        const Tensor<T> real_mask =
            one_hot_smooth<T>(y_s, st.config.num_classes, st.config.label_smooth);
        const Tensor<T> fake_for_dm =
            st.config.use_mask_pool ? st.pool_fake_mask.query(fake_mask) : fake_mask;
        rep.d_m = update_disc(st.d_m, *st.opt_d_m, real_mask, fake_for_dm);
        detail::check_finite<T>(rep.d_m, "d_m");
    }

    rep.total = total_objective(rep.gan_st, rep.gan_ts, rep.cyc, rep.sem, w);
    return rep;
}

struct EpochReport {
    long long epoch = 0;
    LossReport mean;
    double lr = 0;
};

namespace detail {

template <typename T>
std::vector<Tensor<T>> normalize_all(const data::Dataset& ds, int working_size) {
    std::vector<Tensor<T>> out;
    out.reserve(ds.size());
    for (const auto& item : ds.items) {
        if (item.image.height() != working_size || item.image.width() != working_size)
            throw std::invalid_argument("train_adaptation: case " + item.case_id +
                                        " not preprocessed to working size");
        out.push_back(seg::to_normalized<T>(item.image));
    }
    return out;
}

}  // namespace detail

// Epoch loop over shuffled source/target pairings, batch size 1. Source
// labels feed the mask discriminator; target labels, if present, are
// ignored. The learning rate follows lr_at on the state's absolute epoch
// counter and is applied to every optimizer.
template <typename T>
std::vector<EpochReport> train_adaptation(AdaptationState<T>& st,
                                          seg::SegmenterModel<T>& segmenter,
                                          const data::Dataset& source, const data::Dataset& target,
                                          int epochs) {
    for (const auto& item : source.items)
        if (!item.mask)
            throw std::invalid_argument("train_adaptation: unlabeled source item " + item.case_id);
    if (source.empty() || target.empty())
        throw std::invalid_argument("train_adaptation: empty dataset");

    std::vector<EpochReport> history;
    if (epochs <= 0) return history;

    const auto xs = detail::normalize_all<T>(source, st.config.working_size);
    const auto xt = detail::normalize_all<T>(target, st.config.working_size);

    std::vector<std::size_t> perm_s(xs.size()), perm_t(xt.size());
    std::iota(perm_s.begin(), perm_s.end(), 0);
    std::iota(perm_t.begin(), perm_t.end(), 0);

    const std::size_t steps = std::max(xs.size(), xt.size());
    for (int e = 0; e < epochs; ++e) {
        const double lr =
            lr_at(st.epoch, st.config.base_lr, st.config.lr_hold, st.config.lr_decay);
        st.set_lr(lr);
        st.shuffle_rng.shuffle(perm_s);
        st.shuffle_rng.shuffle(perm_t);

        LossReport mean;
        for (std::size_t i = 0; i < steps; ++i) {
            const std::size_t is = perm_s[i % perm_s.size()];
            const std::size_t it = perm_t[i % perm_t.size()];
            const LossReport r =
                train_step(st, segmenter, xs[is], *source.items[is].mask, xt[it]);
            mean.gan_st += r.gan_st;
            mean.gan_ts += r.gan_ts;
            mean.cyc += r.cyc;
            mean.sem += r.sem;
            mean.total += r.total;
            mean.d_s += r.d_s;
            mean.d_t += r.d_t;
            mean.d_m += r.d_m;
        }
        const double n = static_cast<double>(steps);
        for (double* v : {&mean.gan_st, &mean.gan_ts, &mean.cyc, &mean.sem, &mean.total, &mean.d_s,
                          &mean.d_t, &mean.d_m})
            *v /= n;

        ++st.epoch;
        history.push_back({st.epoch, mean, lr});
    }
    return history;
}

// Applies G_ts to a preprocessed target image; output is mapped back to
// [0,255] and tagged as transformed. Same input, same output; parallel
// callers need their own state copy since forward reuses scratch buffers.
template <typename T>
data::Image transform(AdaptationState<T>& st, const data::Image& x_t) {
    if (x_t.height() != st.config.working_size || x_t.width() != st.config.working_size)
        throw std::invalid_argument("transform: input not preprocessed to working size");
    const Tensor<T> y = st.g_ts.forward(seg::to_normalized<T>(x_t));
    data::Image out(x_t.height(), x_t.width());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double v = (static_cast<double>(y[i]) + 1.0) * 127.5;
        out.pixels[i] = static_cast<float>(std::clamp(v, 0.0, 255.0));
    }
    out.spacing_mm = x_t.spacing_mm;
    out.domain = data::Domain::transformed;
    return out;
}

}  // namespace seuda::uda
