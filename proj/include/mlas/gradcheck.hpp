#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlas/fusion.hpp"

namespace mlas {

/// Normalized elementwise error between an analytic and a central
/// finite-difference derivative: |a - n| / max(1, |a|, |n|). Behaves as
/// relative error for large gradients and absolute error near zero.
double normalized_gradient_error(double analytic, double numeric);

struct GradCheckOptions {
    std::uint64_t seed = 1;
    std::size_t instances_per_variant = 10;
    double fd_step = 1e-5;
    /// Test hook: tensors whose name contains this substring get one
    /// analytic gradient entry corrupted, so the check must fail.
    std::string corrupt_tensor;
};

struct GradCheckEntry {
    std::string variant;
    std::string tensor;
    double max_rel_err = 0.0;
};

/// Checks the analytic gradient of the siamese contrastive loss against
/// central finite differences for every parameter tensor of every fusion
/// variant, on randomized small instances. One entry per
/// (variant, tensor), worst case across instances.
std::vector<GradCheckEntry> run_gradient_check(const GradCheckOptions& options);

namespace detail {

/// Same check for the reconstruction pre-training objective (encoder and
/// decoder tensors together); returns the worst normalized error.
double pretrain_gradient_max_rel_err(FusionVariant variant, std::uint64_t seed);

} // namespace detail

} // namespace mlas
