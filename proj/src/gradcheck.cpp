#include "mlas/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mlas/metric.hpp"

namespace mlas {

double normalized_gradient_error(double analytic, double numeric) {
    double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
    return std::abs(analytic - numeric) / denom;
}

namespace {

// Random instance with one-hot rows and optional trailing padding.
AttributedSequence random_instance(std::size_t attr_dim, std::size_t vocab_dim,
                                   std::size_t true_len, std::size_t padded_len, Rng& rng) {
    AttributedSequence inst;
    inst.attributes.values.resize(attr_dim);
    for (double& v : inst.attributes.values) v = rng.uniform(-1.0, 1.0);
    inst.sequence.matrix = Mat(padded_len, vocab_dim);
    inst.sequence.true_length = true_len;
    for (std::size_t t = 0; t < true_len; ++t) {
        inst.sequence.matrix.at(t, rng.below(vocab_dim)) = 1.0;
    }
    return inst;
}

FusionParams random_small_model(FusionVariant variant, std::size_t attr_dim,
                                std::size_t vocab_dim, Rng& rng) {
    std::size_t d_s = 2 + rng.below(5);  // <= 6
    std::size_t d_out = 2 + rng.below(5);
    std::vector<std::size_t> widths;
    if (rng.below(2) == 0) widths.push_back(2 + rng.below(5));
    switch (variant) {
        case FusionVariant::Balanced:
        case FusionVariant::AttCentric:
            widths.push_back(d_out);
            break;
        case FusionVariant::SeqCentric:
            widths.push_back(d_s);
            d_out = d_s;
            break;
    }
    return init_fusion(variant, attr_dim, vocab_dim, widths, d_s, d_out,
                       Activation::Tanh, rng);
}

} // namespace

std::vector<GradCheckEntry> run_gradient_check(const GradCheckOptions& options) {
    const FusionVariant variants[] = {FusionVariant::Balanced, FusionVariant::AttCentric,
                                      FusionVariant::SeqCentric};
    std::vector<GradCheckEntry> entries;
    for (FusionVariant variant : variants) {
        std::map<std::string, double> worst;
        for (std::size_t inst = 0; inst < options.instances_per_variant; ++inst) {
            Rng rng = Rng(options.seed).fork(static_cast<std::uint64_t>(variant) * 1000 + inst);
            std::size_t attr_dim = 2 + rng.below(4);   // <= 5
            std::size_t vocab_dim = 2 + rng.below(3);  // <= 4
            FusionParams model = random_small_model(variant, attr_dim, vocab_dim, rng);

            std::size_t len_a = 1 + rng.below(4);  // <= 4 real steps
            std::size_t len_b = 1 + rng.below(4);
            std::size_t pad_a = len_a < 4 ? rng.below(2) : 0;
            std::size_t pad_b = len_b < 4 ? rng.below(2) : 0;
            AttributedSequence a =
                random_instance(attr_dim, vocab_dim, len_a, len_a + pad_a, rng);
            AttributedSequence b =
                random_instance(attr_dim, vocab_dim, len_b, len_b + pad_b, rng);

            int label = static_cast<int>(rng.below(2));
            double base_dist = euclidean_distance(fusion_forward(model, a, nullptr),
                                                  fusion_forward(model, b, nullptr));
            // Keep the hinge boundary away from the operating point so the
            // finite difference never straddles the kink. Half of the
            // dissimilar cases sit in the dead zone on purpose.
            double margin;
            if (label == 1) {
                margin = inst % 2 == 0 ? std::max(base_dist * 1.5, 1e-3)
                                       : base_dist * 0.5 + 1e-9;
            } else {
                margin = 1.0;
            }

            FusionParams grads = zeros_like(model);
            pair_loss(model, a, b, label, margin, &grads);

            auto g_refs = tensor_refs(grads);
            if (!options.corrupt_tensor.empty()) {
                for (auto& ref : g_refs) {
                    if (ref.name.find(options.corrupt_tensor) != std::string::npos &&
                        ref.size > 0) {
                        ref.data[0] += 1e-2;
                    }
                }
            }

            auto p_refs = tensor_refs(model);
            double h = options.fd_step;
            for (std::size_t t = 0; t < p_refs.size(); ++t) {
                double tensor_worst = 0.0;
                for (std::size_t i = 0; i < p_refs[t].size; ++i) {
                    double saved = p_refs[t].data[i];
                    p_refs[t].data[i] = saved + h;
                    double plus = pair_loss(model, a, b, label, margin, nullptr);
                    p_refs[t].data[i] = saved - h;
                    double minus = pair_loss(model, a, b, label, margin, nullptr);
                    p_refs[t].data[i] = saved;
                    double numeric = (plus - minus) / (2.0 * h);
                    tensor_worst = std::max(
                        tensor_worst, normalized_gradient_error(g_refs[t].data[i], numeric));
                }
                auto [it, inserted] = worst.emplace(p_refs[t].name, tensor_worst);
                if (!inserted) it->second = std::max(it->second, tensor_worst);
            }
        }
        for (const auto& [tensor, err] : worst) {
            entries.push_back({to_string(variant), tensor, err});
        }
    }
    return entries;
}

} // namespace mlas
