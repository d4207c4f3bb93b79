#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlas/nn.hpp"

namespace mlas {

/// d-dimensional feature representation of one attributed sequence.
using Embedding = Vec;

enum class FusionVariant { Balanced, AttCentric, SeqCentric };

std::string to_string(FusionVariant v);
FusionVariant fusion_variant_from_string(const std::string& s);

struct FusionLayer {
    Mat W;  // d x (d_M + d_S)
    Vec b;  // d
};

/// Composite encoder combining the attribute and sequence networks.
///
/// Balanced     y = V^(M) (+) h^(T_k), output = act(W y + b)
/// AttCentric   attnet consumes x (+) h^(T_k), output = V^(M)
/// SeqCentric   h^(1) gets V^(M) added, output = h^(T_k)
struct FusionParams {
    FusionVariant variant = FusionVariant::Balanced;
    AttNetParams attnet;
    SeqNetParams seqnet;
    std::optional<FusionLayer> fusion_layer;  // present iff Balanced

    std::size_t output_dim() const;
    std::size_t attr_dim() const;
    std::size_t vocab_dim() const { return seqnet.input_dim(); }

    void validate() const;
};

struct FusionCache {
    AttNetCache att;
    SeqNetCache seq;
    Vec y, z_pre, z;  // balanced only
};

Embedding fusion_forward(const FusionParams& params, const Vec& attributes,
                         const EncodedSequence& seq, FusionCache* cache = nullptr);
Embedding fusion_forward(const FusionParams& params, const AttributedSequence& p,
                         FusionCache* cache = nullptr);

/// Accumulates into `grads`, which must be zeros_like(params) shaped.
void fusion_backward(const FusionParams& params, const FusionCache& cache,
                     const Vec& d_embedding, FusionParams& grads);

/// Same structure as `params` with every tensor zeroed; used as a
/// gradient accumulator.
FusionParams zeros_like(const FusionParams& params);

/// Named view over every tensor, in a fixed order. The names double as
/// serialization keys (attnet.layer1.W, seqnet.W_i, fusion.W_z, ...).
struct TensorRef {
    std::string name;
    double* data;
    std::size_t size;
};
std::vector<TensorRef> tensor_refs(FusionParams& params);

/// Glorot-uniform weights, orthogonal recurrent matrices, zero biases.
/// `att_widths` are d_1..d_M; `output_dim` must agree with the variant's
/// structural output (d_M for AttCentric, d_S for SeqCentric).
FusionParams init_fusion(FusionVariant variant, std::size_t attr_dim,
                         std::size_t vocab_dim, const std::vector<std::size_t>& att_widths,
                         std::size_t seq_hidden, std::size_t output_dim, Activation act,
                         Rng& rng);

} // namespace mlas
