#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace seuda {

// Dense CHW tensor. All network activations and 2-D rasters live in this
// one type; a plain image is a Tensor with c == 1.
template <typename T>
class Tensor {
public:
    Tensor() = default;
    Tensor(int c, int h, int w, T fill = T(0))
        : c_(c), h_(h), w_(w), data_(static_cast<std::size_t>(c) * h * w, fill) {
        if (c <= 0 || h <= 0 || w <= 0) throw std::invalid_argument("Tensor: non-positive shape");
    }

    int channels() const { return c_; }
    int height() const { return h_; }
    int width() const { return w_; }
    std::size_t size() const { return data_.size(); }
    std::size_t plane() const { return static_cast<std::size_t>(h_) * w_; }
    bool empty() const { return data_.empty(); }

    bool same_shape(const Tensor& o) const { return c_ == o.c_ && h_ == o.h_ && w_ == o.w_; }

    T& at(int c, int y, int x) { return data_[(static_cast<std::size_t>(c) * h_ + y) * w_ + x]; }
    const T& at(int c, int y, int x) const {
        return data_[(static_cast<std::size_t>(c) * h_ + y) * w_ + x];
    }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    void add(const Tensor& o) {
        assert(same_shape(o));
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    }

    void scale(T s) {
        for (auto& v : data_) v *= s;
    }

    bool all_finite() const {
        for (const auto& v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(c_, h_, w_);
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return out;
    }

    bool operator==(const Tensor& o) const {
        return c_ == o.c_ && h_ == o.h_ && w_ == o.w_ && data_ == o.data_;
    }

private:
    int c_ = 0, h_ = 0, w_ = 0;
    std::vector<T> data_;
};

}  // namespace seuda
