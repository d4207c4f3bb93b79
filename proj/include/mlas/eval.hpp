#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mlas/data_model.hpp"
#include "mlas/fusion.hpp"

namespace mlas {

/// A clustering: every id maps to exactly one index in [0, k).
struct Partition {
    std::unordered_map<std::string, std::size_t> assignment;
    std::size_t k = 0;
};

/// Lloyd iterations with seeded, distance-weighted initial centers.
/// Deterministic per seed; stops when assignments are stable or at
/// max_iters. wcss_trace, when given, receives the within-cluster sum of
/// squares after each assignment pass.
Partition kmeans(const std::vector<std::pair<std::string, Embedding>>& embeddings,
                 std::size_t k, std::uint64_t seed, std::size_t max_iters = 100,
                 std::vector<double>* wcss_trace = nullptr);

/// Normalized mutual information I(X;Y) / max(H(X), H(Y)), in [0, 1].
/// Two identical single-cluster partitions score 1; a zero-entropy
/// argument otherwise scores 0.
double nmi(const Partition& predicted, const Partition& truth);

struct PairDistanceStats {
    std::optional<double> mean_similar;     // mean distance over S
    std::optional<double> mean_dissimilar;  // mean distance over D
};

PairDistanceStats pair_distance_stats(
    const std::vector<std::pair<std::string, Embedding>>& embeddings,
    const std::vector<FeedbackTriplet>& feedback);

struct EvalReport {
    double nmi_value = 0.0;
    std::optional<double> nmi_before;  // pre-feedback embeddings, when given
    std::size_t k = 0;
    PairDistanceStats distances;
    std::string clusterer = "kmeans";
    nlohmann::json config_echo;
};

} // namespace mlas
