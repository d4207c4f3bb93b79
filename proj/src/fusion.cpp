#include "mlas/fusion.hpp"

#include <cmath>

namespace mlas {

std::string to_string(FusionVariant v) {
    switch (v) {
        case FusionVariant::Balanced: return "balanced";
        case FusionVariant::AttCentric: return "att-centric";
        case FusionVariant::SeqCentric: return "seq-centric";
    }
    return "?";
}

FusionVariant fusion_variant_from_string(const std::string& s) {
    if (s == "balanced") return FusionVariant::Balanced;
    if (s == "att-centric") return FusionVariant::AttCentric;
    if (s == "seq-centric") return FusionVariant::SeqCentric;
    throw ConfigError("unknown fusion variant '" + s +
                      "' (valid: balanced, att-centric, seq-centric)");
}

std::size_t FusionParams::output_dim() const {
    switch (variant) {
        case FusionVariant::Balanced: return fusion_layer->W.rows;
        case FusionVariant::AttCentric: return attnet.output_dim();
        case FusionVariant::SeqCentric: return seqnet.hidden_dim();
    }
    return 0;
}

std::size_t FusionParams::attr_dim() const {
    if (variant == FusionVariant::AttCentric) {
        return attnet.input_dim() - seqnet.hidden_dim();
    }
    return attnet.input_dim();
}

void FusionParams::validate() const {
    attnet.validate();
    seqnet.validate();
    std::size_t d_m = attnet.output_dim();
    std::size_t d_s = seqnet.hidden_dim();
    switch (variant) {
        case FusionVariant::Balanced:
            if (!fusion_layer) {
                throw ConfigError("balanced variant needs the fusion layer");
            }
            if (fusion_layer->W.cols != d_m + d_s) {
                throw ConfigError("fusion layer width must be d_M + d_S");
            }
            if (fusion_layer->W.rows != fusion_layer->b.size()) {
                throw ConfigError("fusion layer bias length mismatch");
            }
            break;
        case FusionVariant::AttCentric:
            if (fusion_layer) {
                throw ConfigError("att-centric variant has no fusion layer");
            }
            if (attnet.input_dim() <= d_s) {
                throw ConfigError("att-centric first layer must be wider than d_S");
            }
            break;
        case FusionVariant::SeqCentric:
            if (fusion_layer) {
                throw ConfigError("seq-centric variant has no fusion layer");
            }
            if (d_m != d_s) {
                throw ConfigError("seq-centric needs attnet output width equal to d_S");
            }
            break;
    }
}

namespace {

Vec seq_row(const EncodedSequence& seq, std::size_t t) {
    return Vec(seq.matrix.data.begin() + static_cast<std::ptrdiff_t>(t * seq.matrix.cols),
               seq.matrix.data.begin() + static_cast<std::ptrdiff_t>((t + 1) * seq.matrix.cols));
}

// SeqNet recurrence with the attribute representation added to h^(1).
Vec seqcentric_forward(const FusionParams& params, const EncodedSequence& seq,
                       const Vec& v_m, SeqNetCache* cache) {
    if (seq.true_length == 0) throw ValueError("empty sequence: true_length is zero");
    if (cache) cache->steps.clear();
    LstmState state = LstmState::zero(params.seqnet.hidden_dim());
    for (std::size_t t = 0; t < seq.true_length; ++t) {
        LstmStepCache* step_cache = nullptr;
        if (cache) {
            cache->steps.emplace_back();
            step_cache = &cache->steps.back();
        }
        state = lstm_step(params.seqnet, seq_row(seq, t), state, step_cache);
        if (t == 0) {
            axpy(1.0, v_m, state.h);
            if (step_cache) step_cache->h = state.h;
        }
    }
    return state.h;
}

} // namespace

Embedding fusion_forward(const FusionParams& params, const Vec& attributes,
                         const EncodedSequence& seq, FusionCache* cache) {
    switch (params.variant) {
        case FusionVariant::Balanced: {
            Vec v_m = attnet_forward(params.attnet, attributes, cache ? &cache->att : nullptr);
            Vec h = seqnet_forward(params.seqnet, seq, cache ? &cache->seq : nullptr);
            Vec y = concat(v_m, h);
            Vec pre = matvec(params.fusion_layer->W, y);
            axpy(1.0, params.fusion_layer->b, pre);
            Vec z = apply_activation(params.attnet.activation, pre);
            if (cache) {
                cache->y = std::move(y);
                cache->z_pre = std::move(pre);
                cache->z = z;
            }
            return z;
        }
        case FusionVariant::AttCentric: {
            Vec h = seqnet_forward(params.seqnet, seq, cache ? &cache->seq : nullptr);
            Vec in = concat(attributes, h);
            return attnet_forward(params.attnet, in, cache ? &cache->att : nullptr);
        }
        case FusionVariant::SeqCentric: {
            Vec v_m = attnet_forward(params.attnet, attributes, cache ? &cache->att : nullptr);
            return seqcentric_forward(params, seq, v_m, cache ? &cache->seq : nullptr);
        }
    }
    throw ConfigError("invalid fusion variant");
}

Embedding fusion_forward(const FusionParams& params, const AttributedSequence& p,
                         FusionCache* cache) {
    return fusion_forward(params, p.attributes.values, p.sequence, cache);
}

void fusion_backward(const FusionParams& params, const FusionCache& cache,
                     const Vec& d_embedding, FusionParams& grads) {
    switch (params.variant) {
        case FusionVariant::Balanced: {
            std::size_t d = d_embedding.size();
            Vec d_pre(d);
            for (std::size_t i = 0; i < d; ++i) {
                double g = params.attnet.activation == Activation::Tanh
                               ? 1.0 - cache.z[i] * cache.z[i]
                               : (cache.z_pre[i] > 0.0 ? 1.0 : 0.0);
                d_pre[i] = d_embedding[i] * g;
            }
            add_outer(grads.fusion_layer->W, d_pre, cache.y);
            axpy(1.0, d_pre, grads.fusion_layer->b);
            Vec d_y = matvec_t(params.fusion_layer->W, d_pre);
            std::size_t d_m = params.attnet.output_dim();
            Vec d_vm(d_y.begin(), d_y.begin() + static_cast<std::ptrdiff_t>(d_m));
            Vec d_h(d_y.begin() + static_cast<std::ptrdiff_t>(d_m), d_y.end());
            attnet_backward(params.attnet, cache.att, d_vm, grads.attnet);
            seqnet_backward_last(params.seqnet, cache.seq, d_h, grads.seqnet);
            return;
        }
        case FusionVariant::AttCentric: {
            Vec d_in = attnet_backward(params.attnet, cache.att, d_embedding, grads.attnet);
            std::size_t d_s = params.seqnet.hidden_dim();
            Vec d_h(d_in.end() - static_cast<std::ptrdiff_t>(d_s), d_in.end());
            seqnet_backward_last(params.seqnet, cache.seq, d_h, grads.seqnet);
            return;
        }
        case FusionVariant::SeqCentric: {
            std::vector<Vec> inject(cache.seq.steps.size(),
                                    Vec(params.seqnet.hidden_dim(), 0.0));
            inject.back() = d_embedding;
            SeqBackwardResult res =
                seqnet_backward(params.seqnet, cache.seq, inject, grads.seqnet);
            // h^(1) = o (.) tanh(c) + V^(M), so the V^(M) gradient is the
            // total gradient arriving at h^(1).
            attnet_backward(params.attnet, cache.att, res.d_h_first, grads.attnet);
            return;
        }
    }
    throw ConfigError("invalid fusion variant");
}

FusionParams zeros_like(const FusionParams& params) {
    FusionParams z = params;
    for (auto& layer : z.attnet.layers) {
        layer.W.data.assign(layer.W.data.size(), 0.0);
        layer.b.assign(layer.b.size(), 0.0);
    }
    auto zero_mat = [](Mat& m) { m.data.assign(m.data.size(), 0.0); };
    auto zero_vec = [](Vec& v) { v.assign(v.size(), 0.0); };
    zero_mat(z.seqnet.W_i); zero_mat(z.seqnet.W_f); zero_mat(z.seqnet.W_o); zero_mat(z.seqnet.W_c);
    zero_mat(z.seqnet.U_i); zero_mat(z.seqnet.U_f); zero_mat(z.seqnet.U_o); zero_mat(z.seqnet.U_c);
    zero_vec(z.seqnet.b_i); zero_vec(z.seqnet.b_f); zero_vec(z.seqnet.b_o); zero_vec(z.seqnet.b_c);
    if (z.fusion_layer) {
        zero_mat(z.fusion_layer->W);
        zero_vec(z.fusion_layer->b);
    }
    return z;
}

std::vector<TensorRef> tensor_refs(FusionParams& params) {
    std::vector<TensorRef> refs;
    for (std::size_t m = 0; m < params.attnet.layers.size(); ++m) {
        auto& layer = params.attnet.layers[m];
        std::string base = "attnet.layer" + std::to_string(m + 1);
        refs.push_back({base + ".W", layer.W.data.data(), layer.W.data.size()});
        refs.push_back({base + ".b", layer.b.data(), layer.b.size()});
    }
    auto& s = params.seqnet;
    refs.push_back({"seqnet.W_i", s.W_i.data.data(), s.W_i.data.size()});
    refs.push_back({"seqnet.W_f", s.W_f.data.data(), s.W_f.data.size()});
    refs.push_back({"seqnet.W_o", s.W_o.data.data(), s.W_o.data.size()});
    refs.push_back({"seqnet.W_c", s.W_c.data.data(), s.W_c.data.size()});
    refs.push_back({"seqnet.U_i", s.U_i.data.data(), s.U_i.data.size()});
    refs.push_back({"seqnet.U_f", s.U_f.data.data(), s.U_f.data.size()});
    refs.push_back({"seqnet.U_o", s.U_o.data.data(), s.U_o.data.size()});
    refs.push_back({"seqnet.U_c", s.U_c.data.data(), s.U_c.data.size()});
    refs.push_back({"seqnet.b_i", s.b_i.data(), s.b_i.size()});
    refs.push_back({"seqnet.b_f", s.b_f.data(), s.b_f.size()});
    refs.push_back({"seqnet.b_o", s.b_o.data(), s.b_o.size()});
    refs.push_back({"seqnet.b_c", s.b_c.data(), s.b_c.size()});
    if (params.fusion_layer) {
        auto& f = *params.fusion_layer;
        refs.push_back({"fusion.W_z", f.W.data.data(), f.W.data.size()});
        refs.push_back({"fusion.b_z", f.b.data(), f.b.size()});
    }
    return refs;
}

FusionParams init_fusion(FusionVariant variant, std::size_t attr_dim,
                         std::size_t vocab_dim, const std::vector<std::size_t>& att_widths,
                         std::size_t seq_hidden, std::size_t output_dim, Activation act,
                         Rng& rng) {
    if (att_widths.empty()) throw ConfigError("attnet needs at least one layer width");
    FusionParams params;
    params.variant = variant;
    switch (variant) {
        case FusionVariant::Balanced:
            params.attnet = init_attnet(attr_dim, att_widths, act, rng);
            params.seqnet = init_seqnet(vocab_dim, seq_hidden, rng);
            params.fusion_layer = FusionLayer{
                glorot_uniform(output_dim, att_widths.back() + seq_hidden, rng),
                Vec(output_dim, 0.0)};
            break;
        case FusionVariant::AttCentric:
            if (att_widths.back() != output_dim) {
                throw ConfigError("att-centric output dim must equal the last attnet width");
            }
            params.attnet = init_attnet(attr_dim + seq_hidden, att_widths, act, rng);
            params.seqnet = init_seqnet(vocab_dim, seq_hidden, rng);
            break;
        case FusionVariant::SeqCentric:
            if (output_dim != seq_hidden) {
                throw ConfigError("seq-centric output dim must equal d_S");
            }
            if (att_widths.back() != seq_hidden) {
                throw ConfigError("seq-centric needs attnet output width equal to d_S");
            }
            params.attnet = init_attnet(attr_dim, att_widths, act, rng);
            params.seqnet = init_seqnet(vocab_dim, seq_hidden, rng);
            break;
    }
    params.validate();
    return params;
}

} // namespace mlas
