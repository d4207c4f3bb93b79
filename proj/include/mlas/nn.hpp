#pragma once

#include <span>
#include <vector>

#include "mlas/data_model.hpp"
#include "mlas/linalg.hpp"

namespace mlas {

enum class Activation { Tanh, Relu };

double apply_activation(Activation act, double z);
Vec apply_activation(Activation act, const Vec& z);

// -- AttNet: fully connected encoder over attribute vectors ----------------

struct AttNetLayer {
    Mat W;  // d_m x d_{m-1}
    Vec b;  // d_m
};

struct AttNetParams {
    std::vector<AttNetLayer> layers;
    Activation activation = Activation::Tanh;

    std::size_t input_dim() const { return layers.front().W.cols; }
    std::size_t output_dim() const { return layers.back().W.rows; }

    /// Checks that consecutive layer shapes chain and M >= 1.
    void validate() const;
};

struct AttNetCache {
    std::vector<Vec> post;  // post[0] = input, post[m] = V^(m)
    std::vector<Vec> pre;   // pre[m-1] = W V^(m-1) + b
};

Vec attnet_forward(const AttNetParams& params, const Vec& input,
                   AttNetCache* cache = nullptr);

/// Accumulates parameter gradients into `grads` (same shape as params)
/// and returns the gradient with respect to the input.
Vec attnet_backward(const AttNetParams& params, const AttNetCache& cache,
                    const Vec& d_output, AttNetParams& grads);

// -- SeqNet: single-layer LSTM encoder over one-hot sequences --------------

struct SeqNetParams {
    Mat W_i, W_f, W_o, W_c;  // d_S x r
    Mat U_i, U_f, U_o, U_c;  // d_S x d_S
    Vec b_i, b_f, b_o, b_c;  // d_S

    std::size_t hidden_dim() const { return W_i.rows; }
    std::size_t input_dim() const { return W_i.cols; }

    void validate() const;
};

struct LstmState {
    Vec c;
    Vec h;

    static LstmState zero(std::size_t d) { return {Vec(d, 0.0), Vec(d, 0.0)}; }
};

struct LstmStepCache {
    Vec x, h_prev, c_prev;
    Vec i, f, o, g, c, h;
};

/// One step of the LSTM recurrence: gates via sigmoid, candidate via tanh,
/// elementwise combines for cell and hidden state.
LstmState lstm_step(const SeqNetParams& params, const Vec& x_t,
                    const LstmState& prev, LstmStepCache* cache = nullptr);

struct SeqNetCache {
    std::vector<LstmStepCache> steps;
};

/// Runs the recurrence over rows 1..true_length only; padding never
/// reaches the cell. Returns h after the last real step.
Vec seqnet_forward(const SeqNetParams& params, const EncodedSequence& seq,
                   SeqNetCache* cache = nullptr);

struct SeqBackwardResult {
    Vec d_h0;
    Vec d_c0;
    /// Total gradient arriving at h^(1), including contributions from
    /// later steps. Needed where an external vector was added to h^(1).
    Vec d_h_first;
};

/// Backpropagation through time. d_h_inject[t] is the gradient flowing
/// directly into h^(t+1) from outside the recurrence (zeros except the
/// last entry for a plain encoder). Parameter gradients accumulate into
/// `grads`.
SeqBackwardResult seqnet_backward(const SeqNetParams& params, const SeqNetCache& cache,
                                  std::span<const Vec> d_h_inject, SeqNetParams& grads);

/// Convenience wrapper for the encoder case: gradient only at the final
/// hidden state.
SeqBackwardResult seqnet_backward_last(const SeqNetParams& params, const SeqNetCache& cache,
                                       const Vec& d_h_final, SeqNetParams& grads);

// -- initializers ----------------------------------------------------------

/// Glorot-uniform weights, zero biases.
AttNetParams init_attnet(std::size_t input_dim, const std::vector<std::size_t>& widths,
                         Activation act, Rng& rng);

/// Glorot-uniform input weights, orthogonal recurrent matrices, zero biases.
SeqNetParams init_seqnet(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

} // namespace mlas
