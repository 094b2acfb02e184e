#pragma once

#include <stdexcept>

namespace seuda::uda {

// Learning-rate schedule: constant at base_lr for `hold` epochs, then a
// linear ramp to zero over `decay` epochs. Non-increasing everywhere.
inline double lr_at(long long epoch, double base_lr = 0.002, long long hold = 100,
                    long long decay = 100) {
    if (epoch < 0) throw std::invalid_argument("lr_at: negative epoch");
    if (epoch < hold) return base_lr;
    if (epoch >= hold + decay) return 0.0;
    return base_lr * (1.0 - static_cast<double>(epoch - hold) / static_cast<double>(decay));
}

}  // namespace seuda::uda
