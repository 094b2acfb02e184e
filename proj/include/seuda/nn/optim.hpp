#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "seuda/nn/layer.hpp"

namespace seuda::nn {

// Plain SGD with momentum: v = mu*v + g; w -= lr*v.
template <typename T>
class Sgd {
public:
    Sgd(std::vector<Param<T>*> params, double lr, double momentum = 0.9)
        : params_(std::move(params)), lr_(lr), momentum_(momentum) {
        for (auto* p : params_) vel_.emplace_back(p->size(), T(0));
    }

    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }

    void step() {
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& w = params_[i]->value;
            auto& g = params_[i]->grad;
            auto& v = vel_[i];
            for (std::size_t j = 0; j < w.size(); ++j) {
                v[j] = static_cast<T>(momentum_ * v[j] + g[j]);
                w[j] -= static_cast<T>(lr_ * v[j]);
            }
        }
    }

private:
    std::vector<Param<T>*> params_;
    double lr_, momentum_;
    std::vector<std::vector<T>> vel_;
};

// Adam. State (m, v, t) is exposed for checkpointing.
template <typename T>
class Adam {
public:
    Adam(std::vector<Param<T>*> params, double lr, double beta1 = 0.5, double beta2 = 0.999,
         double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (auto* p : params_) {
            m_.emplace_back(p->size(), T(0));
            v_.emplace_back(p->size(), T(0));
        }
    }

    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& w = params_[i]->value;
            auto& g = params_[i]->grad;
            auto& m = m_[i];
            auto& v = v_[i];
            for (std::size_t j = 0; j < w.size(); ++j) {
                const double gj = g[j];
                m[j] = static_cast<T>(beta1_ * m[j] + (1.0 - beta1_) * gj);
                v[j] = static_cast<T>(beta2_ * v[j] + (1.0 - beta2_) * gj * gj);
                const double mhat = m[j] / bc1;
                const double vhat = v[j] / bc2;
                w[j] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

    // checkpoint access
    long long step_count() const { return t_; }
    void set_step_count(long long t) { t_ = t; }
    std::vector<std::vector<T>>& moment1() { return m_; }
    std::vector<std::vector<T>>& moment2() { return v_; }

private:
    std::vector<Param<T>*> params_;
    double lr_, beta1_, beta2_, eps_;
    long long t_ = 0;
    std::vector<std::vector<T>> m_, v_;
};

}  // namespace seuda::nn
