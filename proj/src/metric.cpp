#include "mlas/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mlas {

namespace {

constexpr std::uint64_t kSaltSplit = 0x53504C4954ULL;
constexpr std::uint64_t kSaltEpoch = 0x45504F4348ULL;
constexpr std::uint64_t kSaltPretrainInit = 0x505245494EULL;
constexpr std::uint64_t kSaltPretrainEpoch = 0x5052455045ULL;

} // namespace

void TrainingConfig::validate() const {
    if (!(margin > 0.0)) throw ConfigError("margin must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(convergence_eps >= 0.0)) throw ConfigError("convergence eps must be non-negative");
    if (!(l2_lambda >= 0.0)) throw ConfigError("l2 lambda must be non-negative");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw ConfigError("validation fraction must be in [0, 1)");
    }
    if (!(pretrain_omega_a >= 0.0 && pretrain_omega_a <= 1.0)) {
        throw ConfigError("pretrain omega_a must be in [0, 1]");
    }
}

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::Converged: return "converged";
        case StopReason::EarlyStopped: return "early_stopped";
        case StopReason::MaxIterations: return "max_iterations";
    }
    return "?";
}

double euclidean_distance(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) throw ShapeError("euclidean_distance: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double mahalanobis_distance(const Embedding& a, const Embedding& b, const Mat& lambda) {
    if (lambda.rows != lambda.cols) throw ShapeError("metric matrix must be square");
    if (a.size() != b.size() || a.size() != lambda.rows) {
        throw ShapeError("mahalanobis_distance: dimension mismatch");
    }
    constexpr double tol = 1e-8;
    for (std::size_t i = 0; i < lambda.rows; ++i) {
        for (std::size_t j = i + 1; j < lambda.cols; ++j) {
            if (std::abs(lambda.at(i, j) - lambda.at(j, i)) > tol) {
                throw ValidationError("metric matrix is not symmetric");
            }
        }
    }
    Vec eig = symmetric_eigenvalues(lambda);
    if (*std::min_element(eig.begin(), eig.end()) < -tol) {
        throw ValidationError("metric matrix is not positive semi-definite");
    }
    Vec diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    double q = 0.0;
    for (std::size_t i = 0; i < lambda.rows; ++i) {
        for (std::size_t j = 0; j < lambda.cols; ++j) {
            q += diff[i] * lambda.at(i, j) * diff[j];
        }
    }
    return std::sqrt(std::max(q, 0.0));
}

double contrastive_loss(double distance, int label, double margin) {
    double hinge = std::max(0.0, margin - distance);
    return 0.5 * (1.0 - label) * distance * distance + 0.5 * label * hinge * hinge;
}

double pair_loss(const FusionParams& model, const AttributedSequence& left,
                 const AttributedSequence& right, int label, double margin,
                 FusionParams* grads) {
    FusionCache cache_l, cache_r;
    Embedding za = fusion_forward(model, left, grads ? &cache_l : nullptr);
    Embedding zb = fusion_forward(model, right, grads ? &cache_r : nullptr);
    double dist = euclidean_distance(za, zb);
    double loss = contrastive_loss(dist, label, margin);
    if (grads) {
        std::size_t d = za.size();
        Vec d_za(d, 0.0), d_zb(d, 0.0);
        if (label == 0) {
            // d/dz of 0.5 D^2: the norm cancels, no division needed.
            for (std::size_t i = 0; i < d; ++i) {
                d_za[i] = za[i] - zb[i];
                d_zb[i] = -d_za[i];
            }
        } else {
            double hinge = margin - dist;
            if (hinge > 0.0 && dist > 0.0) {
                double scale = -hinge / dist;
                for (std::size_t i = 0; i < d; ++i) {
                    d_za[i] = scale * (za[i] - zb[i]);
                    d_zb[i] = -d_za[i];
                }
            }
            // At dist == 0 the norm has no gradient; use the zero subgradient.
        }
        fusion_backward(model, cache_l, d_za, *grads);
        fusion_backward(model, cache_r, d_zb, *grads);
    }
    return loss;
}

namespace {

void sgd_update(FusionParams& model, FusionParams& grads, double lr, double l2) {
    auto p_refs = tensor_refs(model);
    auto g_refs = tensor_refs(grads);
    for (std::size_t t = 0; t < p_refs.size(); ++t) {
        double* p = p_refs[t].data;
        const double* g = g_refs[t].data;
        for (std::size_t i = 0; i < p_refs[t].size; ++i) {
            p[i] -= lr * (g[i] + l2 * p[i]);
        }
    }
}

} // namespace

std::pair<FusionParams, TrainReport> train(FusionParams model,
                                           const std::vector<FeedbackTriplet>& feedback,
                                           const Dataset& dataset,
                                           const TrainingConfig& config) {
    config.validate();
    model.validate();
    if (feedback.empty()) throw ConfigError("training needs a non-empty feedback set");

    auto [train_set, val_set] = split_feedback(
        feedback, config.validation_fraction, Rng(config.seed).fork(kSaltSplit).seed());
    if (train_set.empty()) {
        throw ConfigError("validation split left no training pairs");
    }

    TrainReport report;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> prev_pair_loss(train_set.size(), nan);
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t epochs_without_improvement = 0;

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= config.max_iterations; ++epoch) {
        Rng epoch_rng = Rng(config.seed).fork(kSaltEpoch + epoch);
        shuffle(order, epoch_rng);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t idx : order) {
            const FeedbackTriplet& t = train_set[idx];
            const AttributedSequence& a = dataset.at(t.left);
            const AttributedSequence& b = dataset.at(t.right);
            FusionParams grads = zeros_like(model);
            double loss = pair_loss(model, a, b, t.label, config.margin, &grads);
            if (!std::isfinite(loss)) {
                throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) +
                                      " for pair (" + t.left + ", " + t.right + ")");
            }
            loss_sum += loss;
            ++seen;
            bool pair_converged = config.per_pair_convergence &&
                                  !std::isnan(prev_pair_loss[idx]) &&
                                  std::abs(loss - prev_pair_loss[idx]) < config.convergence_eps;
            prev_pair_loss[idx] = loss;
            if (pair_converged) break;  // literal inner-loop break semantics
            sgd_update(model, grads, config.learning_rate, config.l2_lambda);
        }
        report.train_loss.push_back(loss_sum / static_cast<double>(seen));

        double val = nan;
        if (!val_set.empty()) {
            double vsum = 0.0;
            for (const FeedbackTriplet& t : val_set) {
                vsum += pair_loss(model, dataset.at(t.left), dataset.at(t.right), t.label,
                                  config.margin, nullptr);
            }
            val = vsum / static_cast<double>(val_set.size());
        }
        report.val_loss.push_back(val);
        report.iterations = epoch;

        std::size_t e = report.train_loss.size();
        if (e >= 2 &&
            std::abs(report.train_loss[e - 1] - report.train_loss[e - 2]) <
                config.convergence_eps) {
            report.stop_reason = StopReason::Converged;
            return {std::move(model), std::move(report)};
        }
        if (!val_set.empty()) {
            if (val < best_val) {
                best_val = val;
                epochs_without_improvement = 0;
            } else if (++epochs_without_improvement >= config.patience) {
                report.stop_reason = StopReason::EarlyStopped;
                return {std::move(model), std::move(report)};
            }
        }
    }
    report.stop_reason = StopReason::MaxIterations;
    return {std::move(model), std::move(report)};
}

// -- reconstruction pre-training ---------------------------------------------

namespace {

struct Decoders {
    Mat W_attr;          // u x d, linear head for attribute reconstruction
    Vec b_attr;
    Mat W_proj;          // d_S x d, embedding -> initial hidden state
    Vec b_proj;
    SeqNetParams lstm;   // teacher-forced sequence decoder
    Mat W_out;           // r x d_S, per-step item logits
    Vec b_out;
};

Decoders init_decoders(std::size_t attr_dim, std::size_t vocab_dim, std::size_t seq_hidden,
                       std::size_t embed_dim, Rng& rng) {
    Decoders dec;
    dec.W_attr = glorot_uniform(attr_dim, embed_dim, rng);
    dec.b_attr = Vec(attr_dim, 0.0);
    dec.W_proj = glorot_uniform(seq_hidden, embed_dim, rng);
    dec.b_proj = Vec(seq_hidden, 0.0);
    dec.lstm = init_seqnet(vocab_dim, seq_hidden, rng);
    dec.W_out = glorot_uniform(vocab_dim, seq_hidden, rng);
    dec.b_out = Vec(vocab_dim, 0.0);
    return dec;
}

std::vector<TensorRef> decoder_refs(Decoders& d) {
    std::vector<TensorRef> refs;
    refs.push_back({"dec.W_attr", d.W_attr.data.data(), d.W_attr.data.size()});
    refs.push_back({"dec.b_attr", d.b_attr.data(), d.b_attr.size()});
    refs.push_back({"dec.W_proj", d.W_proj.data.data(), d.W_proj.data.size()});
    refs.push_back({"dec.b_proj", d.b_proj.data(), d.b_proj.size()});
    auto& s = d.lstm;
    refs.push_back({"dec.W_i", s.W_i.data.data(), s.W_i.data.size()});
    refs.push_back({"dec.W_f", s.W_f.data.data(), s.W_f.data.size()});
    refs.push_back({"dec.W_o", s.W_o.data.data(), s.W_o.data.size()});
    refs.push_back({"dec.W_c", s.W_c.data.data(), s.W_c.data.size()});
    refs.push_back({"dec.U_i", s.U_i.data.data(), s.U_i.data.size()});
    refs.push_back({"dec.U_f", s.U_f.data.data(), s.U_f.data.size()});
    refs.push_back({"dec.U_o", s.U_o.data.data(), s.U_o.data.size()});
    refs.push_back({"dec.U_c", s.U_c.data.data(), s.U_c.data.size()});
    refs.push_back({"dec.b_i", s.b_i.data(), s.b_i.size()});
    refs.push_back({"dec.b_f", s.b_f.data(), s.b_f.size()});
    refs.push_back({"dec.b_o", s.b_o.data(), s.b_o.size()});
    refs.push_back({"dec.b_c", s.b_c.data(), s.b_c.size()});
    refs.push_back({"dec.W_out", d.W_out.data.data(), d.W_out.data.size()});
    refs.push_back({"dec.b_out", d.b_out.data(), d.b_out.size()});
    return refs;
}

Decoders zeros_like(const Decoders& d) {
    Decoders z = d;
    auto refs = decoder_refs(z);
    for (auto& r : refs) std::fill(r.data, r.data + r.size, 0.0);
    return z;
}

Vec softmax(const Vec& logits) {
    double m = *std::max_element(logits.begin(), logits.end());
    Vec p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
}

// Reconstruction loss of one instance; encoder and decoder gradients
// accumulate when the accumulators are non-null.
double pretrain_instance(const FusionParams& model, Decoders& dec,
                         const AttributedSequence& inst, double omega_a,
                         FusionParams* enc_grads, Decoders* dec_grads) {
    bool want_grads = enc_grads != nullptr;
    FusionCache cache;
    Embedding z = fusion_forward(model, inst, want_grads ? &cache : nullptr);
    std::size_t u = inst.attributes.values.size();
    std::size_t r = inst.sequence.vocab_size();
    std::size_t steps = inst.sequence.true_length;

    // Attribute head: linear map, mean squared error.
    Vec x_hat = matvec(dec.W_attr, z);
    axpy(1.0, dec.b_attr, x_hat);
    double loss_attr = 0.0;
    Vec d_xhat(u, 0.0);
    for (std::size_t i = 0; i < u; ++i) {
        double diff = x_hat[i] - inst.attributes.values[i];
        loss_attr += diff * diff;
        d_xhat[i] = omega_a * 2.0 * diff / static_cast<double>(u);
    }
    loss_attr /= static_cast<double>(u);

    // Sequence head: teacher-forced LSTM from a learned projection of the
    // embedding, cross-entropy per real step.
    Vec h0 = matvec(dec.W_proj, z);
    axpy(1.0, dec.b_proj, h0);
    LstmState state{Vec(dec.lstm.hidden_dim(), 0.0), h0};
    SeqNetCache seq_cache;
    std::vector<Vec> logits_grads;
    std::vector<Vec> hidden_states;
    double loss_seq = 0.0;
    double omega_s = 1.0 - omega_a;
    for (std::size_t t = 0; t < steps; ++t) {
        Vec x_in(r, 0.0);
        if (t > 0) x_in[inst.sequence.item_index(t - 1)] = 1.0;
        seq_cache.steps.emplace_back();
        state = lstm_step(dec.lstm, x_in, state, &seq_cache.steps.back());
        Vec logits = matvec(dec.W_out, state.h);
        axpy(1.0, dec.b_out, logits);
        Vec p = softmax(logits);
        std::size_t target = inst.sequence.item_index(t);
        loss_seq += -std::log(std::max(p[target], 1e-300));
        if (want_grads) {
            Vec d_logits(r);
            for (std::size_t i = 0; i < r; ++i) {
                d_logits[i] = omega_s * (p[i] - (i == target ? 1.0 : 0.0)) /
                              static_cast<double>(steps);
            }
            logits_grads.push_back(std::move(d_logits));
            hidden_states.push_back(state.h);
        }
    }
    loss_seq /= static_cast<double>(steps);

    if (want_grads) {
        add_outer(dec_grads->W_attr, d_xhat, z);
        axpy(1.0, d_xhat, dec_grads->b_attr);
        Vec d_z = matvec_t(dec.W_attr, d_xhat);

        std::vector<Vec> inject(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            add_outer(dec_grads->W_out, logits_grads[t], hidden_states[t]);
            axpy(1.0, logits_grads[t], dec_grads->b_out);
            inject[t] = matvec_t(dec.W_out, logits_grads[t]);
        }
        SeqBackwardResult res = seqnet_backward(dec.lstm, seq_cache, inject, dec_grads->lstm);
        add_outer(dec_grads->W_proj, res.d_h0, z);
        axpy(1.0, res.d_h0, dec_grads->b_proj);
        axpy(1.0, matvec_t(dec.W_proj, res.d_h0), d_z);

        fusion_backward(model, cache, d_z, *enc_grads);
    }
    return omega_a * loss_attr + omega_s * loss_seq;
}

} // namespace

FusionParams pretrain(FusionParams model, const Dataset& dataset,
                      const TrainingConfig& config) {
    config.validate();
    model.validate();
    if (config.pretrain_epochs == 0) return model;
    if (model.attr_dim() != dataset.attr_dim() || model.vocab_dim() != dataset.vocab_size()) {
        throw ShapeError("model dimensions do not match the dataset");
    }

    Rng init_rng = Rng(config.seed).fork(kSaltPretrainInit);
    Decoders dec = init_decoders(dataset.attr_dim(), dataset.vocab_size(),
                                 model.seqnet.hidden_dim(), model.output_dim(), init_rng);

    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= config.pretrain_epochs; ++epoch) {
        Rng epoch_rng = Rng(config.seed).fork(kSaltPretrainEpoch + epoch);
        shuffle(order, epoch_rng);
        for (std::size_t idx : order) {
            const AttributedSequence& inst = dataset.instances()[idx];
            FusionParams enc_grads = zeros_like(model);
            Decoders dec_grads = zeros_like(dec);
            double loss = pretrain_instance(model, dec, inst, config.pretrain_omega_a,
                                            &enc_grads, &dec_grads);
            if (!std::isfinite(loss)) {
                throw DivergenceError("non-finite reconstruction loss at epoch " +
                                      std::to_string(epoch) + " for '" + inst.id + "'");
            }
            sgd_update(model, enc_grads, config.learning_rate, 0.0);
            auto p_refs = decoder_refs(dec);
            auto g_refs = decoder_refs(dec_grads);
            for (std::size_t t = 0; t < p_refs.size(); ++t) {
                for (std::size_t i = 0; i < p_refs[t].size; ++i) {
                    p_refs[t].data[i] -= config.learning_rate * g_refs[t].data[i];
                }
            }
        }
    }
    return model;
}

std::vector<std::pair<std::string, Embedding>> embed_all(const FusionParams& model,
                                                         const Dataset& dataset) {
    std::vector<std::pair<std::string, Embedding>> out;
    out.reserve(dataset.size());
    for (const auto& inst : dataset.instances()) {
        out.emplace_back(inst.id, fusion_forward(model, inst, nullptr));
    }
    return out;
}

namespace detail {

double pretrain_gradient_max_rel_err(FusionVariant variant, std::uint64_t seed) {
    Rng rng(seed);
    std::size_t attr_dim = 2 + rng.below(3);
    std::size_t vocab_dim = 2 + rng.below(3);
    std::size_t d_s = 2 + rng.below(4);
    std::vector<std::size_t> widths{variant == FusionVariant::SeqCentric ? d_s
                                                                         : 2 + rng.below(4)};
    std::size_t d_out = variant == FusionVariant::SeqCentric ? d_s : widths.back();
    FusionParams model =
        init_fusion(variant, attr_dim, vocab_dim, widths, d_s, d_out, Activation::Tanh, rng);
    Decoders dec = init_decoders(attr_dim, vocab_dim, d_s, model.output_dim(), rng);

    AttributedSequence inst;
    inst.attributes.values.resize(attr_dim);
    for (double& v : inst.attributes.values) v = rng.uniform(-1.0, 1.0);
    std::size_t len = 2 + rng.below(2);
    inst.sequence.matrix = Mat(len + 1, vocab_dim);
    inst.sequence.true_length = len;
    for (std::size_t t = 0; t < len; ++t) {
        inst.sequence.matrix.at(t, rng.below(vocab_dim)) = 1.0;
    }
    double omega_a = rng.uniform(0.1, 0.9);

    FusionParams enc_grads = zeros_like(model);
    Decoders dec_grads = zeros_like(dec);
    pretrain_instance(model, dec, inst, omega_a, &enc_grads, &dec_grads);

    auto check = [&](std::vector<TensorRef> p_refs, std::vector<TensorRef> g_refs) {
        double worst = 0.0;
        const double h = 1e-5;
        for (std::size_t t = 0; t < p_refs.size(); ++t) {
            for (std::size_t i = 0; i < p_refs[t].size; ++i) {
                double saved = p_refs[t].data[i];
                p_refs[t].data[i] = saved + h;
                double plus = pretrain_instance(model, dec, inst, omega_a, nullptr, nullptr);
                p_refs[t].data[i] = saved - h;
                double minus = pretrain_instance(model, dec, inst, omega_a, nullptr, nullptr);
                p_refs[t].data[i] = saved;
                double numeric = (plus - minus) / (2.0 * h);
                double denom = std::max({1.0, std::abs(g_refs[t].data[i]), std::abs(numeric)});
                worst = std::max(worst, std::abs(g_refs[t].data[i] - numeric) / denom);
            }
        }
        return worst;
    };
    double worst = check(tensor_refs(model), tensor_refs(enc_grads));
    worst = std::max(worst, check(decoder_refs(dec), decoder_refs(dec_grads)));
    return worst;
}

} // namespace detail

} // namespace mlas
