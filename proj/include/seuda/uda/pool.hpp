#pragma once

#include <vector>

#include "seuda/core/rng.hpp"
#include "seuda/core/tensor.hpp"

namespace seuda::uda {

// History buffer of previously generated images (or mask maps) used for
// discriminator updates. While filling, the fresh input passes straight
// through and is stored; once full, a coin flip either returns the fresh
// input or swaps it with a uniformly chosen stored entry and returns the
// evicted one.
template <typename T>
class ImagePool {
public:
    ImagePool() = default;
    ImagePool(std::size_t capacity, Rng rng) : capacity_(capacity), rng_(rng) {}

    Tensor<T> query(const Tensor<T>& fresh) {
        if (capacity_ == 0) return fresh;
        if (buffer_.size() < capacity_) {
            buffer_.push_back(fresh);
            return fresh;
        }
        if (rng_.uniform() < 0.5) return fresh;
        const std::size_t idx = rng_.uniform_index(buffer_.size());
        Tensor<T> evicted = buffer_[idx];
        buffer_[idx] = fresh;
        return evicted;
    }

    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }

    // checkpoint access
    std::vector<Tensor<T>>& buffer() { return buffer_; }
    const std::vector<Tensor<T>>& buffer() const { return buffer_; }
    Rng& rng() { return rng_; }
    void set_capacity(std::size_t c) { capacity_ = c; }

private:
    std::size_t capacity_ = 0;
    std::vector<Tensor<T>> buffer_;
    Rng rng_;
};

}  // namespace seuda::uda
