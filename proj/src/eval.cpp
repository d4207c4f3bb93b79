#include "mlas/eval.hpp"

#include <algorithm>
#include <cmath>

#include "mlas/metric.hpp"

namespace mlas {

namespace {

double sq_dist(const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

} // namespace

Partition kmeans(const std::vector<std::pair<std::string, Embedding>>& embeddings,
                 std::size_t k, std::uint64_t seed, std::size_t max_iters,
                 std::vector<double>* wcss_trace) {
    std::size_t n = embeddings.size();
    if (k < 1 || k > n) {
        throw ValueError("kmeans: k = " + std::to_string(k) + " is outside [1, " +
                         std::to_string(n) + "]");
    }
    Rng rng(seed);

    // Distance-weighted seeding: each next center is drawn proportionally
    // to its squared distance from the centers chosen so far.
    std::vector<Vec> centers;
    std::vector<bool> chosen(n, false);
    std::size_t first = static_cast<std::size_t>(rng.below(n));
    centers.push_back(embeddings[first].second);
    chosen[first] = true;
    std::vector<double> d2(n, 0.0);
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = sq_dist(embeddings[i].second, centers[0]);
            for (std::size_t c = 1; c < centers.size(); ++c) {
                best = std::min(best, sq_dist(embeddings[i].second, centers[c]));
            }
            d2[i] = best;
            total += best;
        }
        std::size_t pick = n;
        if (total > 0.0) {
            double target = rng.uniform01() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (target < acc) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) pick = n - 1;
        } else {
            // All remaining points coincide with a center; take the first
            // index not already used so duplicate points still split.
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        chosen[pick] = true;
        centers.push_back(embeddings[pick].second);
    }

    std::vector<std::size_t> assign(n, 0);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best_c = 0;
            double best_d = sq_dist(embeddings[i].second, centers[0]);
            for (std::size_t c = 1; c < k; ++c) {
                double d = sq_dist(embeddings[i].second, centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best_c = c;
                }
            }
            wcss += best_d;
            if (assign[i] != best_c) {
                assign[i] = best_c;
                changed = true;
            }
        }
        if (wcss_trace) wcss_trace->push_back(wcss);
        if (!changed && iter > 0) break;

        std::size_t dim = embeddings[0].second.size();
        std::vector<Vec> sums(k, Vec(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            axpy(1.0, embeddings[i].second, sums[assign[i]]);
            ++counts[assign[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its center
            for (std::size_t j = 0; j < dim; ++j) {
                centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
            }
        }
    }

    Partition out;
    out.k = k;
    for (std::size_t i = 0; i < n; ++i) out.assignment[embeddings[i].first] = assign[i];
    return out;
}

double nmi(const Partition& predicted, const Partition& truth) {
    if (predicted.assignment.size() != truth.assignment.size()) {
        throw ReferenceError("nmi: partitions cover different id sets");
    }
    std::size_t n = predicted.assignment.size();
    if (n == 0) throw ReferenceError("nmi: empty partitions");

    std::vector<std::vector<std::size_t>> joint(predicted.k,
                                                std::vector<std::size_t>(truth.k, 0));
    for (const auto& [id, ca] : predicted.assignment) {
        auto it = truth.assignment.find(id);
        if (it == truth.assignment.end()) {
            throw ReferenceError("nmi: id '" + id + "' missing from the other partition");
        }
        ++joint[ca][it->second];
    }

    std::vector<double> pa(predicted.k, 0.0), pb(truth.k, 0.0);
    for (std::size_t i = 0; i < predicted.k; ++i) {
        for (std::size_t j = 0; j < truth.k; ++j) {
            pa[i] += static_cast<double>(joint[i][j]);
            pb[j] += static_cast<double>(joint[i][j]);
        }
    }
    double nd = static_cast<double>(n);
    double h_a = 0.0, h_b = 0.0, mi = 0.0;
    for (double c : pa) {
        if (c > 0) h_a -= (c / nd) * std::log(c / nd);
    }
    for (double c : pb) {
        if (c > 0) h_b -= (c / nd) * std::log(c / nd);
    }
    for (std::size_t i = 0; i < predicted.k; ++i) {
        for (std::size_t j = 0; j < truth.k; ++j) {
            double c = static_cast<double>(joint[i][j]);
            if (c > 0) mi += (c / nd) * std::log(nd * c / (pa[i] * pb[j]));
        }
    }
    double h_max = std::max(h_a, h_b);
    if (h_max == 0.0) {
        // Both partitions are a single cluster over the same ids.
        return 1.0;
    }
    return std::clamp(mi / h_max, 0.0, 1.0);
}

PairDistanceStats pair_distance_stats(
    const std::vector<std::pair<std::string, Embedding>>& embeddings,
    const std::vector<FeedbackTriplet>& feedback) {
    std::unordered_map<std::string, const Embedding*> by_id;
    for (const auto& [id, emb] : embeddings) by_id[id] = &emb;
    auto lookup = [&](const std::string& id) -> const Embedding& {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw ReferenceError("pair_distance_stats: no embedding for id '" + id + "'");
        }
        return *it->second;
    };
    double sum_s = 0.0, sum_d = 0.0;
    std::size_t n_s = 0, n_d = 0;
    for (const auto& t : feedback) {
        double d = euclidean_distance(lookup(t.left), lookup(t.right));
        if (t.label == 0) {
            sum_s += d;
            ++n_s;
        } else {
            sum_d += d;
            ++n_d;
        }
    }
    PairDistanceStats stats;
    if (n_s > 0) stats.mean_similar = sum_s / static_cast<double>(n_s);
    if (n_d > 0) stats.mean_dissimilar = sum_d / static_cast<double>(n_d);
    return stats;
}

} // namespace mlas
