#pragma once

#include "seuda/core/rng.hpp"
#include "seuda/nn/blocks.hpp"

namespace seuda::uda {

// Encoder-transformer-decoder generator: a 7x7 ingress convolution,
// stride-2 downsampling convolutions, residual blocks at the bottleneck,
// nearest-upsample+conv decoding, and a 7x7 egress convolution with tanh.
// Operates on [-1,1] single-channel tensors.
struct GeneratorConfig {
    int encoder_downsamples = 2;
    int residual_blocks = 3;
    int base_channels = 16;

    void validate() const {
        if (encoder_downsamples <= 0 || residual_blocks <= 0 || base_channels <= 0)
            throw std::invalid_argument("generator: all config fields must be positive");
    }
};

// PatchGAN discriminator: `layers` 4x4 convolutions, LeakyReLU(0.2),
// instance norm on the middle layers, emitting a 2-D patch score map.
struct DiscriminatorConfig {
    int layers = 5;
    int base_channels = 64;
    bool patch_mode = true;

    void validate() const {
        if (layers < 2) throw std::invalid_argument("discriminator: layers must be >= 2");
        if (base_channels <= 0)
            throw std::invalid_argument("discriminator: base_channels must be positive");
    }
};

namespace detail {

// Collapses a score map to its mean (non-patch discriminator mode).
template <typename T>
class GlobalMean : public nn::Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x) override {
        n_ = x.size();
        c_ = x.channels();
        h_ = x.height();
        w_ = x.width();
        double sum = 0;
        for (std::size_t i = 0; i < x.size(); ++i) sum += x[i];
        Tensor<T> y(1, 1, 1);
        y[0] = static_cast<T>(sum / static_cast<double>(n_));
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy, bool = true) override {
        Tensor<T> dx(c_, h_, w_);
        const T g = static_cast<T>(dy[0] / static_cast<double>(n_));
        dx.fill(g);
        return dx;
    }

private:
    std::size_t n_ = 1;
    int c_ = 1, h_ = 1, w_ = 1;
};

}  // namespace detail

template <typename T>
nn::Sequential<T> build_generator(const GeneratorConfig& cfg, Rng rng, const std::string& name) {
    cfg.validate();
    nn::Sequential<T> net;
    int ch = cfg.base_channels;

    net.add(std::make_unique<nn::Conv2d<T>>(1, ch, 7, 1, 3, 1, nn::Init::gauss002, rng,
                                            name + ".in"));
    net.add(std::make_unique<nn::InstanceNorm<T>>(ch, name + ".in.norm"));
    net.add(std::make_unique<nn::ReLU<T>>());

    for (int i = 0; i < cfg.encoder_downsamples; ++i) {
        net.add(std::make_unique<nn::Conv2d<T>>(ch, 2 * ch, 3, 2, 1, 1, nn::Init::gauss002, rng,
                                                name + ".down" + std::to_string(i)));
        net.add(std::make_unique<nn::InstanceNorm<T>>(2 * ch,
                                                      name + ".down" + std::to_string(i) + ".norm"));
        net.add(std::make_unique<nn::ReLU<T>>());
        ch *= 2;
    }

    for (int i = 0; i < cfg.residual_blocks; ++i) {
        const std::string bn = name + ".res" + std::to_string(i);
        auto main = std::make_unique<nn::Sequential<T>>();
        main->add(std::make_unique<nn::Conv2d<T>>(ch, ch, 3, 1, 1, 1, nn::Init::gauss002, rng,
                                                  bn + ".conv1"));
        main->add(std::make_unique<nn::InstanceNorm<T>>(ch, bn + ".norm1"));
        main->add(std::make_unique<nn::ReLU<T>>());
        main->add(std::make_unique<nn::Conv2d<T>>(ch, ch, 3, 1, 1, 1, nn::Init::gauss002, rng,
                                                  bn + ".conv2"));
        main->add(std::make_unique<nn::InstanceNorm<T>>(ch, bn + ".norm2"));
        net.add(std::make_unique<nn::ResidualBlock<T>>(std::move(main), nullptr, false));
    }

    for (int i = 0; i < cfg.encoder_downsamples; ++i) {
        net.add(std::make_unique<nn::NearestUpsample2x<T>>());
        net.add(std::make_unique<nn::Conv2d<T>>(ch, ch / 2, 3, 1, 1, 1, nn::Init::gauss002, rng,
                                                name + ".up" + std::to_string(i)));
        net.add(std::make_unique<nn::InstanceNorm<T>>(ch / 2,
                                                      name + ".up" + std::to_string(i) + ".norm"));
        net.add(std::make_unique<nn::ReLU<T>>());
        ch /= 2;
    }

    net.add(std::make_unique<nn::Conv2d<T>>(ch, 1, 7, 1, 3, 1, nn::Init::gauss002, rng,
                                            name + ".out"));
    net.add(std::make_unique<nn::Tanh<T>>());
    return net;
}

template <typename T>
nn::Sequential<T> build_discriminator(const DiscriminatorConfig& cfg, int in_channels, Rng rng,
                                      const std::string& name) {
    cfg.validate();
    nn::Sequential<T> net;
    int ch = cfg.base_channels;

    net.add(std::make_unique<nn::Conv2d<T>>(in_channels, ch, 4, 2, 1, 1, nn::Init::gauss002, rng,
                                            name + ".conv0"));
    net.add(std::make_unique<nn::LeakyReLU<T>>(0.2));

    for (int i = 2; i <= cfg.layers - 2; ++i) {
        net.add(std::make_unique<nn::Conv2d<T>>(ch, 2 * ch, 4, 2, 1, 1, nn::Init::gauss002, rng,
                                                name + ".conv" + std::to_string(i - 1)));
        net.add(std::make_unique<nn::InstanceNorm<T>>(2 * ch,
                                                      name + ".conv" + std::to_string(i - 1) +
                                                          ".norm"));
        net.add(std::make_unique<nn::LeakyReLU<T>>(0.2));
        ch *= 2;
    }

    if (cfg.layers >= 3) {
        net.add(std::make_unique<nn::Conv2d<T>>(ch, 2 * ch, 4, 1, 1, 1, nn::Init::gauss002, rng,
                                                name + ".penult"));
        net.add(std::make_unique<nn::InstanceNorm<T>>(2 * ch, name + ".penult.norm"));
        net.add(std::make_unique<nn::LeakyReLU<T>>(0.2));
        ch *= 2;
    }

    net.add(std::make_unique<nn::Conv2d<T>>(ch, 1, 4, 1, 1, 1, nn::Init::gauss002, rng,
                                            name + ".score"));
    if (!cfg.patch_mode) net.add(std::make_unique<detail::GlobalMean<T>>());
    return net;
}

}  // namespace seuda::uda
