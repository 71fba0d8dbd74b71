#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "depwise/errors.hpp"

namespace depwise {

// Dense rank-1/rank-2 tensor of 64-bit reals with reverse-mode autodiff.
//
// Every op records its inputs and a pull-back closure on the result node
// when any input requires gradients; backward() replays the recorded tape
// in reverse creation order. Scalars are represented as vectors of length 1.

class TensorNode;
using Tensor = std::shared_ptr<TensorNode>;

enum class OpKind {
    Leaf,
    Add,
    Scale,
    Mul,
    MatVec,
    Outer,
    Concat,
    Tanh,
    Sigmoid,
    Relu,
    Vmax,
    Dot,
    Sum,
    LayerNorm,
    SoftmaxXent,
};

class TensorNode {
public:
    std::vector<int> shape;     // {n} vector or {rows, cols} matrix, row-major
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad;   // empty until first accumulation

    OpKind op = OpKind::Leaf;
    std::vector<Tensor> inputs;          // empty when no gradient is needed
    std::function<void()> backprop;      // pulls this->grad into inputs
    std::uint64_t id = 0;                // creation order, used as tape order

    int rank() const { return static_cast<int>(shape.size()); }
    std::size_t numel() const { return data.size(); }
    bool is_vector() const { return shape.size() == 1; }
    bool is_matrix() const { return shape.size() == 2; }
    bool is_scalar() const { return shape.size() == 1 && shape[0] == 1; }
    int rows() const { return shape[0]; }
    int cols() const { return is_matrix() ? shape[1] : 1; }
    double value() const { return data[0]; }

    // Zero-initialised gradient buffer, allocated on first use.
    std::vector<double>& grad_slot();
    void add_to_grad(const double* g, std::size_t n);
    void zero_grad() { grad.assign(data.size(), 0.0); }
};

Tensor make_tensor(std::vector<double> data, std::vector<int> shape, bool requires_grad = false);
Tensor make_vector(std::vector<double> data, bool requires_grad = false);
Tensor make_scalar(double v, bool requires_grad = false);
Tensor zeros(std::vector<int> shape, bool requires_grad = false);

// Elementwise and linear-algebra primitives. All validate shapes and throw
// DimensionError on mismatch.
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor mul(const Tensor& a, const Tensor& b);          // Hadamard
Tensor matvec(const Tensor& m, const Tensor& v);       // unbinding operator
Tensor outer(const Tensor& u, const Tensor& v);        // binding operator
Tensor concat(const std::vector<Tensor>& parts);       // vectors only
Tensor tanh_op(const Tensor& v);
Tensor sigmoid_op(const Tensor& v);
Tensor relu_op(const Tensor& v);
Tensor vmax(const Tensor& a, const Tensor& b);         // elementwise max; ties route grad to a
Tensor dot(const Tensor& a, const Tensor& b);
Tensor sum(const Tensor& v);

// Zero mean, unit variance (eps = 1e-5 inside the square root), then learned
// scale/shift. x, gamma, beta must be vectors of equal length >= 2.
Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta);
inline constexpr double kLayerNormEps = 1e-5;

// Numerically stabilised cross-entropy of softmax(logits) against a class
// index. Throws IndexError when gold is outside [0, C).
Tensor softmax_xent(const Tensor& logits, int gold);

// Reverse-mode sweep from a scalar loss. Gradients accumulate into the grad
// slots of every reachable tensor that requires them; leaves keep their
// accumulated gradient across calls until zero_grad().
void backward(const Tensor& loss);

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t worst_coordinate = 0;
    std::size_t coordinates = 0;
    bool pass = false;
};

// Central-difference check of d f(x) / dx against the recorded tape.
// f must be scalar-valued. Relative error per coordinate is
// |analytic - numeric| / max(1, |analytic|).
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f,
                           const Tensor& x, double h = 1e-5, double tol = 1e-4);

}  // namespace depwise
