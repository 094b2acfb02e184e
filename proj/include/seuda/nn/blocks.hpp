#pragma once

#include "seuda/nn/layers.hpp"

namespace seuda::nn {

// Residual block: out = [ReLU](main(x) + skip(x)). The skip is identity
// unless a projection layer is supplied (channel/stride change).
template <typename T>
class ResidualBlock : public Layer<T> {
public:
    ResidualBlock(std::unique_ptr<Sequential<T>> main, std::unique_ptr<Layer<T>> projection,
                  bool post_relu)
        : main_(std::move(main)), proj_(std::move(projection)), post_relu_(post_relu) {}

    Tensor<T> forward(const Tensor<T>& x) override {
        Tensor<T> y = main_->forward(x);
        if (proj_) {
            y.add(proj_->forward(x));
        } else {
            y.add(x);
        }
        if (post_relu_) {
            sum_ = y;
            for (std::size_t i = 0; i < y.size(); ++i)
                if (y[i] < T(0)) y[i] = T(0);
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy, bool accum_param_grads = true) override {
        Tensor<T> d = dy;
        if (post_relu_) {
            for (std::size_t i = 0; i < d.size(); ++i)
                if (sum_[i] < T(0)) d[i] = T(0);
        }
        Tensor<T> dx = main_->backward(d, accum_param_grads);
        if (proj_) {
            dx.add(proj_->backward(d, accum_param_grads));
        } else {
            dx.add(d);
        }
        return dx;
    }

    void collect_params(std::vector<Param<T>*>& out) override {
        main_->collect_params(out);
        if (proj_) proj_->collect_params(out);
    }

private:
    std::unique_ptr<Sequential<T>> main_;
    std::unique_ptr<Layer<T>> proj_;
    bool post_relu_;
    Tensor<T> sum_;
};

// Parallel branches whose outputs are summed elementwise (the four-rate
// dilated prediction head).
template <typename T>
class MultiBranchSum : public Layer<T> {
public:
    void add_branch(std::unique_ptr<Layer<T>> branch) { branches_.push_back(std::move(branch)); }

    Tensor<T> forward(const Tensor<T>& x) override {
        Tensor<T> y = branches_.front()->forward(x);
        for (std::size_t b = 1; b < branches_.size(); ++b) y.add(branches_[b]->forward(x));
        return y;
    }

    Tensor<T> backward(const Tensor<T>& dy, bool accum_param_grads = true) override {
        Tensor<T> dx = branches_.front()->backward(dy, accum_param_grads);
        for (std::size_t b = 1; b < branches_.size(); ++b)
            dx.add(branches_[b]->backward(dy, accum_param_grads));
        return dx;
    }

    void collect_params(std::vector<Param<T>*>& out) override {
        for (auto& b : branches_) b->collect_params(out);
    }

private:
    std::vector<std::unique_ptr<Layer<T>>> branches_;
};

}  // namespace seuda::nn
