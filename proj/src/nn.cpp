#include "mlas/nn.hpp"

#include <cmath>
#include <iostream>
#include <string>

namespace mlas {

double apply_activation(Activation act, double z) {
    return act == Activation::Tanh ? std::tanh(z) : relu(z);
}

Vec apply_activation(Activation act, const Vec& z) {
    return act == Activation::Tanh ? tanh_vec(z) : relu(z);
}

namespace {

// Derivative through the activation, given pre- and post-activation values.
double activation_grad(Activation act, double pre, double post) {
    if (act == Activation::Tanh) return 1.0 - post * post;
    return pre > 0.0 ? 1.0 : 0.0;
}

} // namespace

void AttNetParams::validate() const {
    if (layers.empty()) throw ShapeError("attnet needs at least one layer");
    for (std::size_t m = 0; m < layers.size(); ++m) {
        const auto& l = layers[m];
        if (l.W.rows != l.b.size()) {
            throw ShapeError("attnet layer " + std::to_string(m + 1) +
                             ": bias length does not match weight rows");
        }
        if (m > 0 && l.W.cols != layers[m - 1].W.rows) {
            throw ShapeError("attnet layer " + std::to_string(m + 1) +
                             ": input width does not chain with previous layer");
        }
    }
}

Vec attnet_forward(const AttNetParams& params, const Vec& input, AttNetCache* cache) {
    if (input.size() != params.input_dim()) {
        throw ShapeError("attnet input has length " + std::to_string(input.size()) +
                         ", expected " + std::to_string(params.input_dim()));
    }
    if (cache) {
        cache->post.clear();
        cache->pre.clear();
        cache->post.push_back(input);
    }
    Vec v = input;
    for (const auto& layer : params.layers) {
        Vec pre = matvec(layer.W, v);
        axpy(1.0, layer.b, pre);
        v = apply_activation(params.activation, pre);
        if (cache) {
            cache->pre.push_back(std::move(pre));
            cache->post.push_back(v);
        }
    }
    return v;
}

Vec attnet_backward(const AttNetParams& params, const AttNetCache& cache,
                    const Vec& d_output, AttNetParams& grads) {
    Vec d_post = d_output;
    for (std::size_t m = params.layers.size(); m-- > 0;) {
        const auto& layer = params.layers[m];
        const Vec& pre = cache.pre[m];
        const Vec& post = cache.post[m + 1];
        Vec d_pre(d_post.size());
        for (std::size_t i = 0; i < d_pre.size(); ++i) {
            d_pre[i] = d_post[i] * activation_grad(params.activation, pre[i], post[i]);
        }
        add_outer(grads.layers[m].W, d_pre, cache.post[m]);
        axpy(1.0, d_pre, grads.layers[m].b);
        d_post = matvec_t(layer.W, d_pre);
    }
    return d_post;
}

void SeqNetParams::validate() const {
    std::size_t d = hidden_dim();
    std::size_t r = input_dim();
    auto check_w = [&](const Mat& m, const char* name) {
        if (m.rows != d || m.cols != r) {
            throw ShapeError(std::string("seqnet ") + name + " has wrong shape");
        }
    };
    auto check_u = [&](const Mat& m, const char* name) {
        if (m.rows != d || m.cols != d) {
            throw ShapeError(std::string("seqnet ") + name + " has wrong shape");
        }
    };
    auto check_b = [&](const Vec& v, const char* name) {
        if (v.size() != d) {
            throw ShapeError(std::string("seqnet ") + name + " has wrong length");
        }
    };
    check_w(W_i, "W_i"); check_w(W_f, "W_f"); check_w(W_o, "W_o"); check_w(W_c, "W_c");
    check_u(U_i, "U_i"); check_u(U_f, "U_f"); check_u(U_o, "U_o"); check_u(U_c, "U_c");
    check_b(b_i, "b_i"); check_b(b_f, "b_f"); check_b(b_o, "b_o"); check_b(b_c, "b_c");
}

namespace {

Vec gate_preact(const Mat& w, const Mat& u, const Vec& b, const Vec& x, const Vec& h) {
    Vec a = matvec(w, x);
    Vec uh = matvec(u, h);
    axpy(1.0, uh, a);
    axpy(1.0, b, a);
    return a;
}

} // namespace

LstmState lstm_step(const SeqNetParams& params, const Vec& x_t, const LstmState& prev,
                    LstmStepCache* cache) {
    if (x_t.size() != params.input_dim()) {
        throw ShapeError("lstm input has length " + std::to_string(x_t.size()) +
                         ", expected " + std::to_string(params.input_dim()));
    }
    if (prev.c.size() != params.hidden_dim() || prev.h.size() != params.hidden_dim()) {
        throw ShapeError("lstm state does not match hidden dim");
    }
    Vec i = sigmoid(gate_preact(params.W_i, params.U_i, params.b_i, x_t, prev.h));
    Vec f = sigmoid(gate_preact(params.W_f, params.U_f, params.b_f, x_t, prev.h));
    Vec o = sigmoid(gate_preact(params.W_o, params.U_o, params.b_o, x_t, prev.h));
    Vec g = tanh_vec(gate_preact(params.W_c, params.U_c, params.b_c, x_t, prev.h));
    std::size_t d = params.hidden_dim();
    Vec c(d), h(d);
    for (std::size_t k = 0; k < d; ++k) {
        c[k] = f[k] * prev.c[k] + i[k] * g[k];
        h[k] = o[k] * std::tanh(c[k]);
    }
    if (cache) {
        cache->x = x_t;
        cache->h_prev = prev.h;
        cache->c_prev = prev.c;
        cache->i = i;
        cache->f = f;
        cache->o = o;
        cache->g = g;
        cache->c = c;
        cache->h = h;
    }
    return {std::move(c), std::move(h)};
}

Vec seqnet_forward(const SeqNetParams& params, const EncodedSequence& seq,
                   SeqNetCache* cache) {
    if (seq.true_length == 0) throw ValueError("empty sequence: true_length is zero");
    if (seq.vocab_size() != params.input_dim()) {
        throw ShapeError("sequence row width " + std::to_string(seq.vocab_size()) +
                         " does not match seqnet input dim " +
                         std::to_string(params.input_dim()));
    }
    if (cache) cache->steps.clear();
    LstmState state = LstmState::zero(params.hidden_dim());
    for (std::size_t t = 0; t < seq.true_length; ++t) {
        Vec x(seq.matrix.data.begin() + static_cast<std::ptrdiff_t>(t * seq.matrix.cols),
              seq.matrix.data.begin() + static_cast<std::ptrdiff_t>((t + 1) * seq.matrix.cols));
        if (cache) {
            cache->steps.emplace_back();
            state = lstm_step(params, x, state, &cache->steps.back());
        } else {
            state = lstm_step(params, x, state, nullptr);
        }
    }
    return state.h;
}

SeqBackwardResult seqnet_backward(const SeqNetParams& params, const SeqNetCache& cache,
                                  std::span<const Vec> d_h_inject, SeqNetParams& grads) {
    std::size_t n = cache.steps.size();
    if (d_h_inject.size() != n) {
        throw ShapeError("seqnet_backward: injection count does not match steps");
    }
    std::size_t d = params.hidden_dim();
    Vec d_h_carry(d, 0.0), d_c_carry(d, 0.0);
    SeqBackwardResult result;
    for (std::size_t t = n; t-- > 0;) {
        const LstmStepCache& s = cache.steps[t];
        Vec dh(d), dc(d), di(d), df(d), dO(d), dg(d);
        for (std::size_t k = 0; k < d; ++k) {
            dh[k] = d_h_inject[t][k] + d_h_carry[k];
            double tc = std::tanh(s.c[k]);
            dO[k] = dh[k] * tc;
            dc[k] = d_c_carry[k] + dh[k] * s.o[k] * (1.0 - tc * tc);
            df[k] = dc[k] * s.c_prev[k];
            di[k] = dc[k] * s.g[k];
            dg[k] = dc[k] * s.i[k];
        }
        if (t == 0) result.d_h_first = dh;
        // Through the gate nonlinearities to pre-activations.
        Vec da_i(d), da_f(d), da_o(d), da_g(d);
        for (std::size_t k = 0; k < d; ++k) {
            da_i[k] = di[k] * s.i[k] * (1.0 - s.i[k]);
            da_f[k] = df[k] * s.f[k] * (1.0 - s.f[k]);
            da_o[k] = dO[k] * s.o[k] * (1.0 - s.o[k]);
            da_g[k] = dg[k] * (1.0 - s.g[k] * s.g[k]);
        }
        add_outer(grads.W_i, da_i, s.x);
        add_outer(grads.W_f, da_f, s.x);
        add_outer(grads.W_o, da_o, s.x);
        add_outer(grads.W_c, da_g, s.x);
        add_outer(grads.U_i, da_i, s.h_prev);
        add_outer(grads.U_f, da_f, s.h_prev);
        add_outer(grads.U_o, da_o, s.h_prev);
        add_outer(grads.U_c, da_g, s.h_prev);
        axpy(1.0, da_i, grads.b_i);
        axpy(1.0, da_f, grads.b_f);
        axpy(1.0, da_o, grads.b_o);
        axpy(1.0, da_g, grads.b_c);
        Vec next_dh = matvec_t(params.U_i, da_i);
        axpy(1.0, matvec_t(params.U_f, da_f), next_dh);
        axpy(1.0, matvec_t(params.U_o, da_o), next_dh);
        axpy(1.0, matvec_t(params.U_c, da_g), next_dh);
        d_h_carry = std::move(next_dh);
        for (std::size_t k = 0; k < d; ++k) d_c_carry[k] = dc[k] * s.f[k];
    }
    result.d_h0 = std::move(d_h_carry);
    result.d_c0 = std::move(d_c_carry);
    return result;
}

SeqBackwardResult seqnet_backward_last(const SeqNetParams& params, const SeqNetCache& cache,
                                       const Vec& d_h_final, SeqNetParams& grads) {
    std::vector<Vec> inject(cache.steps.size(), Vec(params.hidden_dim(), 0.0));
    inject.back() = d_h_final;
    return seqnet_backward(params, cache, inject, grads);
}

AttNetParams init_attnet(std::size_t input_dim, const std::vector<std::size_t>& widths,
                         Activation act, Rng& rng) {
    if (widths.empty()) throw ConfigError("attnet needs at least one layer width");
    if (widths.front() >= input_dim) {
        std::cerr << "warning: attnet first layer width " << widths.front()
                  << " is not smaller than its input width " << input_dim << "\n";
    }
    AttNetParams params;
    params.activation = act;
    std::size_t prev = input_dim;
    for (std::size_t w : widths) {
        AttNetLayer layer;
        layer.W = glorot_uniform(w, prev, rng);
        layer.b = Vec(w, 0.0);
        params.layers.push_back(std::move(layer));
        prev = w;
    }
    return params;
}

SeqNetParams init_seqnet(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
    SeqNetParams p;
    p.W_i = glorot_uniform(hidden_dim, input_dim, rng);
    p.W_f = glorot_uniform(hidden_dim, input_dim, rng);
    p.W_o = glorot_uniform(hidden_dim, input_dim, rng);
    p.W_c = glorot_uniform(hidden_dim, input_dim, rng);
    p.U_i = orthogonal_init(hidden_dim, rng);
    p.U_f = orthogonal_init(hidden_dim, rng);
    p.U_o = orthogonal_init(hidden_dim, rng);
    p.U_c = orthogonal_init(hidden_dim, rng);
    p.b_i = Vec(hidden_dim, 0.0);
    p.b_f = Vec(hidden_dim, 0.0);
    p.b_o = Vec(hidden_dim, 0.0);
    p.b_c = Vec(hidden_dim, 0.0);
    return p;
}

} // namespace mlas
