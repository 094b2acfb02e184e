#pragma once

#include <stdexcept>
#include <string>

namespace seuda {

// Non-finite loss or other numerical breakdown during training; mapped
// to exit code 2 by the CLI.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace seuda
