#pragma once

#include <sstream>

#include "seuda/uda/adaptation.hpp"

namespace seuda::uda {

inline constexpr std::uint32_t kUdaCheckpointMagic = 0x43414455;  // "UDAC"
inline constexpr std::uint32_t kUdaCheckpointVersion = 1;

namespace detail {

inline std::string rng_to_string(const Rng& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

inline Rng rng_from_string(const std::string& s) {
    std::istringstream is(s);
    Rng r;
    is >> r;
    return r;
}

template <typename T>
void write_net(BinaryWriter& w, nn::Sequential<T>& net, nn::Adam<T>& opt) {
    auto params = net.params();
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (auto* p : params) {
        w.str(p->name);
        w.vec(p->value);
    }
    w.u64(static_cast<std::uint64_t>(opt.step_count()));
    for (const auto& m : opt.moment1()) w.vec(m);
    for (const auto& v : opt.moment2()) w.vec(v);
}

template <typename T>
void read_net(BinaryReader& r, nn::Sequential<T>& net, nn::Adam<T>& opt,
              const std::string& path) {
    auto params = net.params();
    if (r.u32() != params.size()) throw std::runtime_error(path + ": parameter count mismatch");
    for (auto* p : params) {
        if (r.str() != p->name) throw std::runtime_error(path + ": parameter order mismatch");
        auto v = r.template vec<T>();
        if (v.size() != p->value.size())
            throw std::runtime_error(path + ": parameter size mismatch for " + p->name);
        p->value = std::move(v);
    }
    opt.set_step_count(static_cast<long long>(r.u64()));
    for (auto& m : opt.moment1()) m = r.template vec<T>();
    for (auto& v : opt.moment2()) v = r.template vec<T>();
}

template <typename T>
void write_pool(BinaryWriter& w, const ImagePool<T>& pool) {
    w.u64(pool.capacity());
    w.u64(pool.buffer().size());
    for (const auto& t : pool.buffer()) w.tensor(t);
    w.str(rng_to_string(const_cast<ImagePool<T>&>(pool).rng()));
}

template <typename T>
void read_pool(BinaryReader& r, ImagePool<T>& pool) {
    pool.set_capacity(r.u64());
    pool.buffer().clear();
    const std::uint64_t n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) pool.buffer().push_back(r.template tensor<T>());
    pool.rng() = rng_from_string(r.str());
}

}  // namespace detail

template <typename T>
void save_adaptation(AdaptationState<T>& st, const std::string& path) {
    BinaryWriter w(path);
    w.u32(kUdaCheckpointMagic);
    w.u32(kUdaCheckpointVersion);
    w.u32(sizeof(T));

    const auto& c = st.config;
    w.u32(static_cast<std::uint32_t>(c.gen.encoder_downsamples));
    w.u32(static_cast<std::uint32_t>(c.gen.residual_blocks));
    w.u32(static_cast<std::uint32_t>(c.gen.base_channels));
    w.u32(static_cast<std::uint32_t>(c.disc.layers));
    w.u32(static_cast<std::uint32_t>(c.disc.base_channels));
    w.u32(c.disc.patch_mode ? 1 : 0);
    w.f64(c.weights.alpha);
    w.f64(c.weights.beta);
    w.f64(c.weights.lambda_sem);
    w.u32(static_cast<std::uint32_t>(c.working_size));
    w.u32(static_cast<std::uint32_t>(c.num_classes));
    w.f64(c.base_lr);
    w.u64(static_cast<std::uint64_t>(c.lr_hold));
    w.u64(static_cast<std::uint64_t>(c.lr_decay));
    w.f64(c.adam_beta1);
    w.f64(c.adam_beta2);
    w.u64(c.pool_capacity);
    w.u32(c.use_mask_pool ? 1 : 0);
    w.u32(c.with_mask_discriminator ? 1 : 0);
    w.f64(c.label_smooth);
    w.u64(c.seed);

    w.u64(static_cast<std::uint64_t>(st.epoch));
    detail::write_net(w, st.g_ts, *st.opt_g_ts);
    detail::write_net(w, st.g_st, *st.opt_g_st);
    detail::write_net(w, st.d_s, *st.opt_d_s);
    detail::write_net(w, st.d_t, *st.opt_d_t);
    if (c.with_mask_discriminator) detail::write_net(w, st.d_m, *st.opt_d_m);
    detail::write_pool(w, st.pool_fake_s);
    detail::write_pool(w, st.pool_fake_t);
    detail::write_pool(w, st.pool_fake_mask);
    w.str(detail::rng_to_string(st.shuffle_rng));
}

template <typename T>
AdaptationState<T> load_adaptation(const std::string& path) {
    BinaryReader r(path);
    if (r.u32() != kUdaCheckpointMagic)
        throw std::runtime_error(path + ": not an adaptation checkpoint");
    if (r.u32() != kUdaCheckpointVersion)
        throw std::runtime_error(path + ": unsupported checkpoint version");
    if (r.u32() != sizeof(T)) throw std::runtime_error(path + ": checkpoint scalar width mismatch");

    AdaptationConfig c;
    c.gen.encoder_downsamples = static_cast<int>(r.u32());
    c.gen.residual_blocks = static_cast<int>(r.u32());
    c.gen.base_channels = static_cast<int>(r.u32());
    c.disc.layers = static_cast<int>(r.u32());
    c.disc.base_channels = static_cast<int>(r.u32());
    c.disc.patch_mode = r.u32() != 0;
    c.weights.alpha = r.f64();
    c.weights.beta = r.f64();
    c.weights.lambda_sem = r.f64();
    c.working_size = static_cast<int>(r.u32());
    c.num_classes = static_cast<int>(r.u32());
    c.base_lr = r.f64();
    c.lr_hold = static_cast<long long>(r.u64());
    c.lr_decay = static_cast<long long>(r.u64());
    c.adam_beta1 = r.f64();
    c.adam_beta2 = r.f64();
    c.pool_capacity = r.u64();
    c.use_mask_pool = r.u32() != 0;
    c.with_mask_discriminator = r.u32() != 0;
    c.label_smooth = r.f64();
    c.seed = r.u64();

    AdaptationState<T> st = build_adaptation<T>(c);
    st.epoch = static_cast<long long>(r.u64());
    detail::read_net(r, st.g_ts, *st.opt_g_ts, path);
    detail::read_net(r, st.g_st, *st.opt_g_st, path);
    detail::read_net(r, st.d_s, *st.opt_d_s, path);
    detail::read_net(r, st.d_t, *st.opt_d_t, path);
    if (c.with_mask_discriminator) detail::read_net(r, st.d_m, *st.opt_d_m, path);
    detail::read_pool(r, st.pool_fake_s);
    detail::read_pool(r, st.pool_fake_t);
    detail::read_pool(r, st.pool_fake_mask);
    st.shuffle_rng = detail::rng_from_string(r.str());
    return st;
}

}  // namespace seuda::uda
