#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lvr/nn/tensor.hpp"

namespace lvr::nn {

struct GradCheckOptions {
    double eps = 1e-6;
    double tol = 1e-6;
    /// Entries compared; 0 compares every entry.
    std::size_t max_checks = 20;
    std::uint64_t seed = 1;
    /// Lower bound on the relative-error denominator, so that entries whose
    /// true gradient is ~0 are judged on absolute error instead.
    double denom_floor = 1e-8;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t checked = 0;
    bool passed = true;
    std::string worst; // "tensor[index]: analytic vs numeric"
};

/// Compares reverse-mode gradients of the scalar returned by `loss` against
/// central differences, perturbing entries of `inputs` in place (restored
/// afterwards). `loss` must be deterministic and build its graph on the tape
/// it is given. Throws ConfigError on eps <= 0 or an empty input list.
template <typename T>
GradCheckReport gradient_check(const std::function<Tensor<T>(Tape<T>&)>& loss, std::vector<Tensor<T>> inputs,
                               const GradCheckOptions& options = {});

} // namespace lvr::nn
