#include "depwise/nn.hpp"

#include <cmath>

#include "depwise/errors.hpp"

namespace depwise {

namespace {

Tensor xavier_matrix(int rows, int cols, std::mt19937_64& rng, bool requires_grad) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto t = zeros({rows, cols}, requires_grad);
    for (auto& v : t->data) v = dist(rng);
    return t;
}

}  // namespace

int FfnWeights::input_dim() const {
    if (layers.empty()) throw ConfigError("feed-forward stack has no layers");
    return layers.front().weight->shape[1];
}

int FfnWeights::output_dim() const {
    if (layers.empty()) throw ConfigError("feed-forward stack has no layers");
    return layers.back().weight->shape[0];
}

std::vector<Tensor> FfnWeights::parameters() const {
    std::vector<Tensor> out;
    for (const auto& l : layers) {
        out.push_back(l.weight);
        out.push_back(l.bias);
    }
    return out;
}

FfnWeights make_ffn(const std::vector<int>& widths, Nonlinearity nl,
                    std::mt19937_64& rng, bool requires_grad) {
    if (widths.size() < 2) throw ArgumentError("feed-forward stack needs at least {in, out} widths");
    FfnWeights w;
    w.nonlinearity = nl;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        LinearLayer layer;
        layer.weight = xavier_matrix(widths[i + 1], widths[i], rng, requires_grad);
        layer.bias = zeros({widths[i + 1]}, requires_grad);
        w.layers.push_back(std::move(layer));
    }
    return w;
}

Tensor apply_nonlinearity(Nonlinearity nl, const Tensor& x) {
    switch (nl) {
        case Nonlinearity::Tanh: return tanh_op(x);
        case Nonlinearity::Relu: return relu_op(x);
        case Nonlinearity::Identity: return x;
    }
    throw ArgumentError("unknown nonlinearity");
}

Tensor linear(const LinearLayer& layer, const Tensor& x) {
    return add(matvec(layer.weight, x), layer.bias);
}

Tensor ffn_forward(const FfnWeights& w, const Tensor& x) {
    if (w.layers.empty()) throw ConfigError("feed-forward stack has no layers");
    if (x->shape.size() != 1 || x->shape[0] != w.input_dim()) {
        throw DimensionError("feed-forward input width mismatch");
    }
    Tensor h = x;
    for (std::size_t i = 0; i < w.layers.size(); ++i) {
        h = linear(w.layers[i], h);
        if (i + 1 < w.layers.size()) h = apply_nonlinearity(w.nonlinearity, h);
    }
    return h;
}

std::vector<Tensor> LayerNormParams::parameters() const { return {gamma, beta}; }

LayerNormParams make_layernorm(int n, bool requires_grad) {
    LayerNormParams p;
    p.gamma = zeros({n}, requires_grad);
    for (auto& v : p.gamma->data) v = 1.0;
    p.beta = zeros({n}, requires_grad);
    return p;
}

Tensor layernorm(const Tensor& x, const LayerNormParams& p) {
    return layernorm(x, p.gamma, p.beta);
}

int LstmWeights::input_dim() const { return w_input->shape[1]; }
int LstmWeights::hidden_dim() const { return w_input->shape[0]; }

std::vector<Tensor> LstmWeights::parameters() const {
    return {w_input, u_input, b_input, w_forget, u_forget, b_forget,
            w_output, u_output, b_output, w_cell, u_cell, b_cell};
}

LstmWeights make_lstm(int input_dim, int hidden_dim, std::mt19937_64& rng,
                      bool requires_grad) {
    LstmWeights w;
    auto gate = [&](Tensor& wx, Tensor& uh, Tensor& b, double bias_fill) {
        wx = xavier_matrix(hidden_dim, input_dim, rng, requires_grad);
        uh = xavier_matrix(hidden_dim, hidden_dim, rng, requires_grad);
        b = zeros({hidden_dim}, requires_grad);
        for (auto& v : b->data) v = bias_fill;
    };
    gate(w.w_input, w.u_input, w.b_input, 0.0);
    gate(w.w_forget, w.u_forget, w.b_forget, 1.0);
    gate(w.w_output, w.u_output, w.b_output, 0.0);
    gate(w.w_cell, w.u_cell, w.b_cell, 0.0);
    return w;
}

LstmState lstm_initial_state(int hidden_dim) {
    return {zeros({hidden_dim}), zeros({hidden_dim})};
}

LstmState lstm_cell(const LstmWeights& w, const Tensor& x, const LstmState& prev) {
    if (x->shape.size() != 1 || x->shape[0] != w.input_dim()) {
        throw DimensionError("recurrent cell input width mismatch");
    }
    auto gate = [&](const Tensor& wx, const Tensor& uh, const Tensor& b) {
        return add(add(matvec(wx, x), matvec(uh, prev.h)), b);
    };
    Tensor i = sigmoid_op(gate(w.w_input, w.u_input, w.b_input));
    Tensor f = sigmoid_op(gate(w.w_forget, w.u_forget, w.b_forget));
    Tensor o = sigmoid_op(gate(w.w_output, w.u_output, w.b_output));
    Tensor g = tanh_op(gate(w.w_cell, w.u_cell, w.b_cell));
    Tensor c = add(mul(f, prev.c), mul(i, g));
    Tensor h = mul(o, tanh_op(c));
    return {h, c};
}

Tensor lstm_last_hidden(const LstmWeights& w, const std::vector<Tensor>& sequence) {
    if (sequence.empty()) throw ArgumentError("recurrent aggregation needs a non-empty sequence");
    LstmState state = lstm_initial_state(w.hidden_dim());
    for (const auto& x : sequence) state = lstm_cell(w, x, state);
    return state.h;
}

}  // namespace depwise
