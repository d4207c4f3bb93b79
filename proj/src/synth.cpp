#include "mlas/synth.hpp"

#include <cmath>
#include <set>

namespace mlas {

void SynthSpec::validate() const {
    if (groups.empty()) throw ValidationError("synth spec needs at least one group");
    if (items.empty()) throw ValidationError("synth spec needs at least one item");
    if (t_min < 1 || t_max < t_min) {
        throw ValidationError("synth spec needs 1 <= t_min <= t_max");
    }
    if (per_group < 1) throw ValidationError("per_group must be at least 1");
    std::size_t r = items.size();
    std::size_t u = groups.front().attr_mean.size();
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const GroupSpec& gs = groups[g];
        if (gs.attr_mean.size() != u) {
            throw ValidationError("group " + std::to_string(g) +
                                  ": attribute mean dimension mismatch");
        }
        if (gs.transition.rows != r || gs.transition.cols != r) {
            throw ValidationError("group " + std::to_string(g) +
                                  ": transition matrix must be r x r");
        }
        if (gs.initial_dist.size() != r) {
            throw ValidationError("group " + std::to_string(g) +
                                  ": initial distribution must have length r");
        }
        for (std::size_t i = 0; i < r; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < r; ++j) {
                double p = gs.transition.at(i, j);
                if (p < 0.0) {
                    throw ValidationError("group " + std::to_string(g) +
                                          ": negative transition probability");
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                throw ValidationError("group " + std::to_string(g) + ": transition row " +
                                      std::to_string(i) + " sums to " + std::to_string(sum));
            }
        }
    }
}

namespace {

std::size_t sample_categorical(const double* probs, std::size_t n, Rng& rng) {
    double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return n - 1;
}

} // namespace

SynthResult generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    std::size_t r = spec.items.size();
    std::size_t n_groups = spec.groups.size();

    SynthResult result;
    result.truth.k = n_groups;
    std::vector<std::vector<std::string>> group_ids(n_groups);

    std::size_t counter = 0;
    for (std::size_t g = 0; g < n_groups; ++g) {
        const GroupSpec& gs = spec.groups[g];
        for (std::size_t i = 0; i < spec.per_group; ++i) {
            DatasetRecord rec;
            char buf[16];
            std::snprintf(buf, sizeof(buf), "p%04zu", counter++);
            rec.id = buf;
            rec.attributes.resize(gs.attr_mean.size());
            for (std::size_t j = 0; j < rec.attributes.size(); ++j) {
                rec.attributes[j] = gs.attr_mean[j] + gs.attr_spread * rng.normal();
            }
            std::size_t len = spec.t_min + static_cast<std::size_t>(
                                               rng.below(spec.t_max - spec.t_min + 1));
            std::size_t item = sample_categorical(gs.initial_dist.data(), r, rng);
            rec.steps.push_back(spec.items[item]);
            for (std::size_t t = 1; t < len; ++t) {
                item = sample_categorical(gs.transition.data.data() + item * r, r, rng);
                rec.steps.push_back(spec.items[item]);
            }
            result.truth.assignment[rec.id] = g;
            group_ids[g].push_back(rec.id);
            result.records.push_back(std::move(rec));
        }
    }

    // Feedback: half cross-group (dissimilar) when possible, rest
    // within-group (similar). Unordered pairs are not repeated.
    std::size_t n_dissimilar = n_groups > 1 ? spec.n_feedback / 2 : 0;
    std::size_t n_similar = spec.n_feedback - n_dissimilar;
    std::set<std::pair<std::string, std::string>> used;
    auto try_add = [&](const std::string& a, const std::string& b, int label) {
        auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        if (a == b || !used.insert(key).second) return false;
        result.feedback.push_back(FeedbackTriplet{a, b, label});
        return true;
    };
    std::size_t attempts = 0;
    const std::size_t max_attempts = 1000 * (spec.n_feedback + 1);
    std::size_t made = 0;
    while (made < n_similar) {
        if (++attempts > max_attempts) {
            throw ValueError("cannot sample enough distinct similar pairs");
        }
        std::size_t g = static_cast<std::size_t>(rng.below(n_groups));
        if (group_ids[g].size() < 2) continue;
        const auto& ids = group_ids[g];
        std::size_t i = static_cast<std::size_t>(rng.below(ids.size()));
        std::size_t j = static_cast<std::size_t>(rng.below(ids.size()));
        if (try_add(ids[i], ids[j], 0)) ++made;
    }
    made = 0;
    while (made < n_dissimilar) {
        if (++attempts > max_attempts) {
            throw ValueError("cannot sample enough distinct dissimilar pairs");
        }
        std::size_t g1 = static_cast<std::size_t>(rng.below(n_groups));
        std::size_t g2 = static_cast<std::size_t>(rng.below(n_groups));
        if (g1 == g2) continue;
        const std::string& a = group_ids[g1][rng.below(group_ids[g1].size())];
        const std::string& b = group_ids[g2][rng.below(group_ids[g2].size())];
        if (try_add(a, b, 1)) ++made;
    }

    result.dataset = build_dataset(result.records);
    return result;
}

SynthSpec make_separable_spec(std::size_t n_groups, std::size_t per_group,
                              std::size_t attr_dim, std::size_t vocab_size,
                              std::size_t t_min, std::size_t t_max,
                              double attr_separation, double attr_spread,
                              double transition_sharpness, std::size_t n_feedback,
                              std::uint64_t seed) {
    if (n_groups < 1) throw ValueError("need at least one group");
    if (vocab_size < 2) throw ValueError("need at least two items");
    if (!(transition_sharpness >= 0.0 && transition_sharpness <= 1.0)) {
        throw ValueError("transition sharpness must be in [0, 1]");
    }
    SynthSpec spec;
    spec.per_group = per_group;
    spec.t_min = t_min;
    spec.t_max = t_max;
    spec.n_feedback = n_feedback;
    spec.seed = seed;
    spec.items.reserve(vocab_size);
    for (std::size_t i = 0; i < vocab_size; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "e%03zu", i);
        spec.items.push_back(buf);
    }
    for (std::size_t g = 0; g < n_groups; ++g) {
        GroupSpec gs;
        gs.attr_mean.assign(attr_dim, 0.0);
        for (std::size_t j = 0; j < attr_dim; ++j) {
            if (j % n_groups == g % n_groups) gs.attr_mean[j] = attr_separation;
        }
        gs.attr_spread = attr_spread;
        // Each group walks its own cycle: group g favors a shift of g+1.
        std::size_t shift = (g + 1) % vocab_size;
        if (shift == 0) shift = 1;
        gs.transition = Mat(vocab_size, vocab_size);
        for (std::size_t i = 0; i < vocab_size; ++i) {
            double base = (1.0 - transition_sharpness) / static_cast<double>(vocab_size);
            double row_sum = 0.0;
            for (std::size_t j = 0; j < vocab_size; ++j) {
                double p = base;
                if (j == (i + shift) % vocab_size) p += transition_sharpness;
                gs.transition.at(i, j) = p;
                row_sum += p;
            }
            for (std::size_t j = 0; j < vocab_size; ++j) gs.transition.at(i, j) /= row_sum;
        }
        gs.initial_dist.assign(vocab_size, 1.0 / static_cast<double>(vocab_size));
        spec.groups.push_back(std::move(gs));
    }
    return spec;
}

} // namespace mlas
