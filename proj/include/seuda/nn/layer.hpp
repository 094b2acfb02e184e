#pragma once

#include <memory>
#include <string>
#include <vector>

#include "seuda/core/tensor.hpp"

namespace seuda::nn {

// A learnable array plus its gradient accumulator.
template <typename T>
struct Param {
    std::string name;
    std::vector<T> value;
    std::vector<T> grad;

    explicit Param(std::string n, std::size_t size, T fill = T(0))
        : name(std::move(n)), value(size, fill), grad(size, T(0)) {}

    std::size_t size() const { return value.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

// One differentiable op. forward() caches whatever backward() needs;
// backward() consumes the cache of the most recent forward, so a layer
// reused on a second input must be backpropagated before that reuse.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;

    virtual Tensor<T> forward(const Tensor<T>& x) = 0;

    // Returns dL/dx for the last forward. When accum_param_grads is
    // false the layer acts as a frozen function of its input (used for
    // the segmenter inside the semantic loss).
    virtual Tensor<T> backward(const Tensor<T>& dy, bool accum_param_grads = true) = 0;

    virtual void collect_params(std::vector<Param<T>*>& out) {}
};

template <typename T>
class Sequential : public Layer<T> {
public:
    Sequential() = default;

    void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

    Tensor<T> forward(const Tensor<T>& x) override {
        Tensor<T> cur = x;
        for (auto& l : layers_) cur = l->forward(cur);
        return cur;
    }

    Tensor<T> backward(const Tensor<T>& dy, bool accum_param_grads = true) override {
        Tensor<T> cur = dy;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
            cur = (*it)->backward(cur, accum_param_grads);
        return cur;
    }

    void collect_params(std::vector<Param<T>*>& out) override {
        for (auto& l : layers_) l->collect_params(out);
    }

    std::vector<Param<T>*> params() {
        std::vector<Param<T>*> out;
        collect_params(out);
        return out;
    }

    void zero_grad() {
        for (auto* p : params()) p->zero_grad();
    }

    std::size_t param_count() {
        std::size_t n = 0;
        for (auto* p : params()) n += p->size();
        return n;
    }

    // Parameter snapshot/restore, used for best-on-val tracking and
    // trajectory comparisons. Order is the fixed collect_params order.
    std::vector<std::vector<T>> snapshot() {
        std::vector<std::vector<T>> out;
        for (auto* p : params()) out.push_back(p->value);
        return out;
    }
    void restore(const std::vector<std::vector<T>>& snap) {
        auto ps = params();
        if (snap.size() != ps.size()) throw std::runtime_error("restore: parameter count mismatch");
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (snap[i].size() != ps[i]->value.size())
                throw std::runtime_error("restore: parameter size mismatch");
            ps[i]->value = snap[i];
        }
    }

    bool empty() const { return layers_.empty(); }

private:
    std::vector<std::unique_ptr<Layer<T>>> layers_;
};

}  // namespace seuda::nn
