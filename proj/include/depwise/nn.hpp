#pragma once

#include <random>
#include <vector>

#include "depwise/tensor.hpp"

namespace depwise {

enum class Nonlinearity { Tanh, Relu, Identity };

struct LinearLayer {
    Tensor weight;  // {out, in}
    Tensor bias;    // {out}
};

// Feed-forward stack: affine layers with the nonlinearity between them
// (never after the last layer).
struct FfnWeights {
    std::vector<LinearLayer> layers;
    Nonlinearity nonlinearity = Nonlinearity::Tanh;

    int input_dim() const;
    int output_dim() const;
    std::vector<Tensor> parameters() const;
};

// widths = {in, hidden..., out}; at least one affine layer.
FfnWeights make_ffn(const std::vector<int>& widths, Nonlinearity nl,
                    std::mt19937_64& rng, bool requires_grad = true);

Tensor apply_nonlinearity(Nonlinearity nl, const Tensor& x);
Tensor linear(const LinearLayer& layer, const Tensor& x);
Tensor ffn_forward(const FfnWeights& w, const Tensor& x);

struct LayerNormParams {
    Tensor gamma;
    Tensor beta;

    std::vector<Tensor> parameters() const;
};

LayerNormParams make_layernorm(int n, bool requires_grad = true);
Tensor layernorm(const Tensor& x, const LayerNormParams& p);

// Gated recurrent cell over a hop sequence (standard LSTM equations):
//   i = sigmoid(Wi x + Ui h + bi)      f = sigmoid(Wf x + Uf h + bf)
//   o = sigmoid(Wo x + Uo h + bo)      g = tanh(Wg x + Ug h + bg)
//   c' = f * c + i * g                 h' = o * tanh(c')
struct LstmWeights {
    Tensor w_input, u_input, b_input;
    Tensor w_forget, u_forget, b_forget;
    Tensor w_output, u_output, b_output;
    Tensor w_cell, u_cell, b_cell;

    int input_dim() const;
    int hidden_dim() const;
    std::vector<Tensor> parameters() const;
};

LstmWeights make_lstm(int input_dim, int hidden_dim, std::mt19937_64& rng,
                      bool requires_grad = true);

struct LstmState {
    Tensor h;
    Tensor c;
};

LstmState lstm_initial_state(int hidden_dim);
LstmState lstm_cell(const LstmWeights& w, const Tensor& x, const LstmState& prev);

// Runs the cell over the sequence and returns the final hidden state.
Tensor lstm_last_hidden(const LstmWeights& w, const std::vector<Tensor>& sequence);

}  // namespace depwise
