#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlas/data_model.hpp"
#include "mlas/eval.hpp"

namespace mlas {

/// Per-group generating process: Gaussian attributes around a mean, and a
/// Markov walk over items.
struct GroupSpec {
    Vec attr_mean;
    double attr_spread = 1.0;
    Mat transition;    // r x r, row-stochastic
    Vec initial_dist;  // r
};

struct SynthSpec {
    std::vector<GroupSpec> groups;
    std::vector<std::string> items;  // item identifiers, size r
    std::size_t per_group = 50;
    std::size_t t_min = 5;
    std::size_t t_max = 12;
    std::size_t n_feedback = 40;
    std::uint64_t seed = 42;

    void validate() const;
};

struct SynthResult {
    std::vector<DatasetRecord> records;
    Dataset dataset;
    Partition truth;
    std::vector<FeedbackTriplet> feedback;
};

/// Draws attributes and Markov sequences per group and samples feedback:
/// within-group pairs labeled similar, cross-group pairs dissimilar
/// (half of n_feedback each; all similar when only one group exists).
/// Deterministic per spec.seed.
SynthResult generate(const SynthSpec& spec);

/// Builds a SynthSpec with controllable separability: group attribute
/// means are attr_separation apart on alternating coordinates, and each
/// group's walk favors its own item-shift pattern with the given
/// sharpness (0 = uniform transitions, 1 = deterministic cycle).
SynthSpec make_separable_spec(std::size_t n_groups, std::size_t per_group,
                              std::size_t attr_dim, std::size_t vocab_size,
                              std::size_t t_min, std::size_t t_max,
                              double attr_separation, double attr_spread,
                              double transition_sharpness, std::size_t n_feedback,
                              std::uint64_t seed);

} // namespace mlas
