#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>

#include "seuda/core/rng.hpp"
#include "seuda/nn/layer.hpp"

namespace seuda::nn {

enum class Init { he, gauss002 };

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;

// 2-D convolution with stride, zero padding and dilation, evaluated as
// im2col + GEMM. Weight layout: out_ch x (in_ch*kh*kw).
template <typename T>
class Conv2d : public Layer<T> {
public:
    Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, int dilation, Init init,
           Rng& rng, std::string name)
        : in_ch_(in_ch),
          out_ch_(out_ch),
          k_(kernel),
          stride_(stride),
          pad_(pad),
          dil_(dilation),
          weight_(name + ".weight", static_cast<std::size_t>(out_ch) * in_ch * kernel * kernel),
          bias_(name + ".bias", static_cast<std::size_t>(out_ch)) {
        const double fan_in = static_cast<double>(in_ch) * kernel * kernel;
        const double stddev = init == Init::he ? std::sqrt(2.0 / fan_in) : 0.02;
        for (auto& w : weight_.value) w = static_cast<T>(rng.normal(0.0, stddev));
    }

    Tensor<T> forward(const Tensor<T>& x) override {
        if (x.channels() != in_ch_) throw std::invalid_argument("Conv2d: channel mismatch");
        x_ = x;
        const int span = dil_ * (k_ - 1) + 1;
        out_h_ = (x.height() + 2 * pad_ - span) / stride_ + 1;
        out_w_ = (x.width() + 2 * pad_ - span) / stride_ + 1;
        if (out_h_ <= 0 || out_w_ <= 0)
            throw std::invalid_argument("Conv2d: output would be empty (input too small)");

        im2col(x);
        Tensor<T> y(out_ch_, out_h_, out_w_);
        const std::size_t P = static_cast<std::size_t>(out_h_) * out_w_;
        const std::size_t K = static_cast<std::size_t>(in_ch_) * k_ * k_;
        CMapMat<T> W(weight_.value.data(), out_ch_, K);
        CMapMat<T> C(col_.data(), K, P);
        MapMat<T> Y(y.data(), out_ch_, P);
        Y.noalias() = W * C;
        for (int c = 0; c < out_ch_; ++c) Y.row(c).array() += bias_.value[c];
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy, bool accum_param_grads = true) override {
        const std::size_t P = static_cast<std::size_t>(out_h_) * out_w_;
        const std::size_t K = static_cast<std::size_t>(in_ch_) * k_ * k_;
        CMapMat<T> dY(dy.data(), out_ch_, P);
        CMapMat<T> C(col_.data(), K, P);
        CMapMat<T> W(weight_.value.data(), out_ch_, K);

        if (accum_param_grads) {
            MapMat<T> dW(weight_.grad.data(), out_ch_, K);
            dW.noalias() += dY * C.transpose();
            for (int c = 0; c < out_ch_; ++c) bias_.grad[c] += dY.row(c).sum();
        }

        dcol_.resize(K * P);
        MapMat<T> dC(dcol_.data(), K, P);
        dC.noalias() = W.transpose() * dY;
        return col2im();
    }

    void collect_params(std::vector<Param<T>*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }

private:
    void im2col(const Tensor<T>& x) {
        const std::size_t P = static_cast<std::size_t>(out_h_) * out_w_;
        col_.assign(static_cast<std::size_t>(in_ch_) * k_ * k_ * P, T(0));
        std::size_t row = 0;
        for (int c = 0; c < in_ch_; ++c)
            for (int ki = 0; ki < k_; ++ki)
                for (int kj = 0; kj < k_; ++kj, ++row) {
                    T* dst = &col_[row * P];
                    for (int oy = 0; oy < out_h_; ++oy) {
                        const int iy = oy * stride_ - pad_ + ki * dil_;
                        if (iy < 0 || iy >= x.height()) continue;
                        const T* src = &x.at(c, iy, 0);
                        T* drow = dst + static_cast<std::size_t>(oy) * out_w_;
                        for (int ox = 0; ox < out_w_; ++ox) {
                            const int ix = ox * stride_ - pad_ + kj * dil_;
                            if (ix >= 0 && ix < x.width()) drow[ox] = src[ix];
                        }
                    }
                }
    }

    Tensor<T> col2im() {
        Tensor<T> dx(in_ch_, x_.height(), x_.width());
        const std::size_t P = static_cast<std::size_t>(out_h_) * out_w_;
        std::size_t row = 0;
        for (int c = 0; c < in_ch_; ++c)
            for (int ki = 0; ki < k_; ++ki)
                for (int kj = 0; kj < k_; ++kj, ++row) {
                    const T* src = &dcol_[row * P];
                    for (int oy = 0; oy < out_h_; ++oy) {
                        const int iy = oy * stride_ - pad_ + ki * dil_;
                        if (iy < 0 || iy >= dx.height()) continue;
                        T* drow = &dx.at(c, iy, 0);
                        const T* srow = src + static_cast<std::size_t>(oy) * out_w_;
                        for (int ox = 0; ox < out_w_; ++ox) {
                            const int ix = ox * stride_ - pad_ + kj * dil_;
                            if (ix >= 0 && ix < dx.width()) drow[ix] += srow[ox];
                        }
                    }
                }
        return dx;
    }

    int in_ch_, out_ch_, k_, stride_, pad_, dil_;
    int out_h_ = 0, out_w_ = 0;
    Param<T> weight_, bias_;
    Tensor<T> x_;
    std::vector<T> col_, dcol_;
};

// Instance normalization: per-channel mean/variance over H*W with a
// learnable affine. Statistics are accumulated in double so results do
// not depend on the reduction order the optimizer picks.
template <typename T>
class InstanceNorm : public Layer<T> {
public:
    InstanceNorm(int channels, std::string name, double eps = 1e-5)
        : ch_(channels),
          eps_(eps),
          gamma_(name + ".gamma", channels, T(1)),
          beta_(name + ".beta", channels, T(0)) {}

    Tensor<T> forward(const Tensor<T>& x) override {
        if (x.channels() != ch_) throw std::invalid_argument("InstanceNorm: channel mismatch");
        const std::size_t n = x.plane();
        xhat_ = Tensor<T>(x.channels(), x.height(), x.width());
        inv_std_.assign(ch_, 0.0);
        Tensor<T> y(x.channels(), x.height(), x.width());
        for (int c = 0; c < ch_; ++c) {
            const T* px = x.data() + c * n;
            double mean = 0;
            for (std::size_t i = 0; i < n; ++i) mean += px[i];
            mean /= static_cast<double>(n);
            double var = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = px[i] - mean;
                var += d * d;
            }
            var /= static_cast<double>(n);
            const double inv = 1.0 / std::sqrt(var + eps_);
            inv_std_[c] = inv;
            T* pxh = xhat_.data() + c * n;
            T* py = y.data() + c * n;
            const double g = gamma_.value[c], b = beta_.value[c];
            for (std::size_t i = 0; i < n; ++i) {
                pxh[i] = static_cast<T>((px[i] - mean) * inv);
                py[i] = static_cast<T>(g * pxh[i] + b);
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy, bool accum_param_grads = true) override {
        const std::size_t n = dy.plane();
        Tensor<T> dx(dy.channels(), dy.height(), dy.width());
        for (int c = 0; c < ch_; ++c) {
            const T* pdy = dy.data() + c * n;
            const T* pxh = xhat_.data() + c * n;
            double sum_dy = 0, sum_dy_xhat = 0;
            for (std::size_t i = 0; i < n; ++i) {
                sum_dy += pdy[i];
                sum_dy_xhat += static_cast<double>(pdy[i]) * pxh[i];
            }
            if (accum_param_grads) {
                beta_.grad[c] += static_cast<T>(sum_dy);
                gamma_.grad[c] += static_cast<T>(sum_dy_xhat);
            }
            const double g = gamma_.value[c];
            const double mean_dy = sum_dy / static_cast<double>(n);
            const double mean_dy_xhat = sum_dy_xhat / static_cast<double>(n);
            const double scale = g * inv_std_[c];
            T* pdx = dx.data() + c * n;
            for (std::size_t i = 0; i < n; ++i)
                pdx[i] = static_cast<T>(scale * (pdy[i] - mean_dy - pxh[i] * mean_dy_xhat));
        }
        return dx;
    }

    void collect_params(std::vector<Param<T>*>& out) override {
        out.push_back(&gamma_);
        out.push_back(&beta_);
    }

private:
    int ch_;
    double eps_;
    Param<T> gamma_, beta_;
    Tensor<T> xhat_;
    std::vector<double> inv_std_;
};

template <typename T>
class LeakyReLU : public Layer<T> {
public:
    explicit LeakyReLU(double slope = 0.0) : slope_(static_cast<T>(slope)) {}

    Tensor<T> forward(const Tensor<T>& x) override {
        x_ = x;
        Tensor<T> y = x;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] < T(0)) y[i] *= slope_;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy, bool = true) override {
        Tensor<T> dx = dy;
        for (std::size_t i = 0; i < dx.size(); ++i)
            if (x_[i] < T(0)) dx[i] *= slope_;
        return dx;
    }

private:
    T slope_;
    Tensor<T> x_;
};

template <typename T>
class ReLU : public LeakyReLU<T> {
public:
    ReLU() : LeakyReLU<T>(0.0) {}
};

template <typename T>
class Tanh : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x) override {
        y_ = x;
        for (std::size_t i = 0; i < y_.size(); ++i) y_[i] = std::tanh(y_[i]);
        return y_;
    }

    Tensor<T> backward(const Tensor<T>& dy, bool = true) override {
        Tensor<T> dx = dy;
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= (T(1) - y_[i] * y_[i]);
        return dx;
    }

private:
    Tensor<T> y_;
};

// Per-pixel softmax across channels; emits the probability simplex.
template <typename T>
class SoftmaxChannels : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x) override {
        const int C = x.channels();
        const std::size_t n = x.plane();
        y_ = Tensor<T>(C, x.height(), x.width());
        for (std::size_t i = 0; i < n; ++i) {
            T mx = x[i];
            for (int c = 1; c < C; ++c) mx = std::max(mx, x[c * n + i]);
            double z = 0;
            for (int c = 0; c < C; ++c) {
                const double e = std::exp(static_cast<double>(x[c * n + i] - mx));
                y_[c * n + i] = static_cast<T>(e);
                z += e;
            }
            for (int c = 0; c < C; ++c) y_[c * n + i] = static_cast<T>(y_[c * n + i] / z);
        }
        return y_;
    }

    Tensor<T> backward(const Tensor<T>& dy, bool = true) override {
        const int C = dy.channels();
        const std::size_t n = dy.plane();
        Tensor<T> dx(C, dy.height(), dy.width());
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0;
            for (int c = 0; c < C; ++c)
                dot += static_cast<double>(dy[c * n + i]) * y_[c * n + i];
            for (int c = 0; c < C; ++c)
                dx[c * n + i] = static_cast<T>(y_[c * n + i] * (dy[c * n + i] - dot));
        }
        return dx;
    }

private:
    Tensor<T> y_;
};

// 2x nearest-neighbour upsampling (decoder resize-convolution).
template <typename T>
class NearestUpsample2x : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x) override {
        in_h_ = x.height();
        in_w_ = x.width();
        Tensor<T> y(x.channels(), 2 * in_h_, 2 * in_w_);
        for (int c = 0; c < x.channels(); ++c)
            for (int yy = 0; yy < y.height(); ++yy)
                for (int xx = 0; xx < y.width(); ++xx)
                    y.at(c, yy, xx) = x.at(c, yy / 2, xx / 2);
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy, bool = true) override {
        Tensor<T> dx(dy.channels(), in_h_, in_w_);
        for (int c = 0; c < dy.channels(); ++c)
            for (int yy = 0; yy < dy.height(); ++yy)
                for (int xx = 0; xx < dy.width(); ++xx)
                    dx.at(c, yy / 2, xx / 2) += dy.at(c, yy, xx);
        return dx;
    }

private:
    int in_h_ = 0, in_w_ = 0;
};

// Bilinear resize to a fixed target size; backward is the exact adjoint
// (same interpolation weights, scatter instead of gather).
template <typename T>
class BilinearResize : public Layer<T> {
public:
    BilinearResize(int out_h, int out_w) : out_h_(out_h), out_w_(out_w) {}

    Tensor<T> forward(const Tensor<T>& x) override {
        in_h_ = x.height();
        in_w_ = x.width();
        Tensor<T> y(x.channels(), out_h_, out_w_);
        for_each_weight([&](int oy, int ox, int iy, int ix, double w) {
            for (int c = 0; c < y.channels(); ++c)
                y.at(c, oy, ox) += static_cast<T>(w * x.at(c, iy, ix));
        });
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy, bool = true) override {
        Tensor<T> dx(dy.channels(), in_h_, in_w_);
        for_each_weight([&](int oy, int ox, int iy, int ix, double w) {
            for (int c = 0; c < dy.channels(); ++c)
                dx.at(c, iy, ix) += static_cast<T>(w * dy.at(c, oy, ox));
        });
        return dx;
    }

private:
    template <typename F>
    void for_each_weight(F&& emit) const {
        const double sy = static_cast<double>(in_h_) / out_h_;
        const double sx = static_cast<double>(in_w_) / out_w_;
        for (int oy = 0; oy < out_h_; ++oy) {
            const double fy = std::max(0.0, (oy + 0.5) * sy - 0.5);
            const int y0 = std::min(static_cast<int>(fy), in_h_ - 1);
            const int y1 = std::min(y0 + 1, in_h_ - 1);
            const double wy = fy - y0;
            for (int ox = 0; ox < out_w_; ++ox) {
                const double fx = std::max(0.0, (ox + 0.5) * sx - 0.5);
                const int x0 = std::min(static_cast<int>(fx), in_w_ - 1);
                const int x1 = std::min(x0 + 1, in_w_ - 1);
                const double wx = fx - x0;
                emit(oy, ox, y0, x0, (1 - wy) * (1 - wx));
                emit(oy, ox, y0, x1, (1 - wy) * wx);
                emit(oy, ox, y1, x0, wy * (1 - wx));
                emit(oy, ox, y1, x1, wy * wx);
            }
        }
    }

    int out_h_, out_w_;
    int in_h_ = 0, in_w_ = 0;
};

}  // namespace seuda::nn
