#include "depwise/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <utility>

namespace depwise {

namespace {

std::atomic<std::uint64_t> g_next_id{1};

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

void check_vector(const Tensor& t, const char* what) {
    if (!t || !t->is_vector()) throw DimensionError(std::string(what) + ": expected a vector");
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a->shape != b->shape) throw DimensionError(std::string(what) + ": shape mismatch");
}

Tensor new_node(std::vector<int> shape, std::vector<double> data, OpKind op) {
    auto t = std::make_shared<TensorNode>();
    t->shape = std::move(shape);
    t->data = std::move(data);
    t->op = op;
    t->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
    return t;
}

}  // namespace

std::vector<double>& TensorNode::grad_slot() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    return grad;
}

void TensorNode::add_to_grad(const double* g, std::size_t n) {
    auto& slot = grad_slot();
    for (std::size_t i = 0; i < n; ++i) slot[i] += g[i];
}

Tensor make_tensor(std::vector<double> data, std::vector<int> shape, bool requires_grad) {
    if (shape.empty() || shape.size() > 2)
        throw DimensionError("make_tensor: rank must be 1 or 2");
    for (int d : shape)
        if (d <= 0) throw DimensionError("make_tensor: shape entries must be positive");
    if (data.size() != shape_numel(shape))
        throw DimensionError("make_tensor: data length does not match shape");
    Tensor t = new_node(std::move(shape), std::move(data), OpKind::Leaf);
    t->requires_grad = requires_grad;
    return t;
}

Tensor make_vector(std::vector<double> data, bool requires_grad) {
    int n = static_cast<int>(data.size());
    return make_tensor(std::move(data), {n}, requires_grad);
}

Tensor make_scalar(double v, bool requires_grad) {
    return make_tensor({v}, {1}, requires_grad);
}

Tensor zeros(std::vector<int> shape, bool requires_grad) {
    std::vector<double> data(shape_numel(shape), 0.0);
    return make_tensor(std::move(data), std::move(shape), requires_grad);
}

namespace {

// Attaches inputs + pull-back only when gradients can flow.
template <typename Fn>
void record(const Tensor& out, std::vector<Tensor> ins, Fn&& fn) {
    bool needs = false;
    for (const auto& t : ins) needs = needs || t->requires_grad;
    if (!needs) return;
    out->requires_grad = true;
    out->inputs = std::move(ins);
    out->backprop = std::forward<Fn>(fn);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    std::vector<double> data(a->data.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = a->data[i] + b->data[i];
    Tensor out = new_node(a->shape, std::move(data), OpKind::Add);
    record(out, {a, b}, [o = out.get(), a, b] {
        if (a->requires_grad) a->add_to_grad(o->grad.data(), o->grad.size());
        if (b->requires_grad) b->add_to_grad(o->grad.data(), o->grad.size());
    });
    return out;
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> data(a->data.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = a->data[i] * c;
    Tensor out = new_node(a->shape, std::move(data), OpKind::Scale);
    record(out, {a}, [o = out.get(), a, c] {
        auto& ga = a->grad_slot();
        for (std::size_t i = 0; i < o->grad.size(); ++i) ga[i] += o->grad[i] * c;
    });
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    std::vector<double> data(a->data.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = a->data[i] * b->data[i];
    Tensor out = new_node(a->shape, std::move(data), OpKind::Mul);
    record(out, {a, b}, [o = out.get(), a, b] {
        if (a->requires_grad) {
            auto& ga = a->grad_slot();
            for (std::size_t i = 0; i < o->grad.size(); ++i) ga[i] += o->grad[i] * b->data[i];
        }
        if (b->requires_grad) {
            auto& gb = b->grad_slot();
            for (std::size_t i = 0; i < o->grad.size(); ++i) gb[i] += o->grad[i] * a->data[i];
        }
    });
    return out;
}

Tensor matvec(const Tensor& m, const Tensor& v) {
    if (!m->is_matrix()) throw DimensionError("matvec: first operand must be a matrix");
    check_vector(v, "matvec");
    const int r = m->shape[0], c = m->shape[1];
    if (v->shape[0] != c) throw DimensionError("matvec: inner dimensions disagree");
    std::vector<double> data(static_cast<std::size_t>(r), 0.0);
    const double* md = m->data.data();
    const double* vd = v->data.data();
    for (int i = 0; i < r; ++i) {
        double acc = 0.0;
        const double* row = md + static_cast<std::size_t>(i) * c;
        for (int j = 0; j < c; ++j) acc += row[j] * vd[j];
        data[static_cast<std::size_t>(i)] = acc;
    }
    Tensor out = new_node({r}, std::move(data), OpKind::MatVec);
    record(out, {m, v}, [o = out.get(), m, v, r, c] {
        const double* g = o->grad.data();
        if (m->requires_grad) {
            auto& gm = m->grad_slot();
            for (int i = 0; i < r; ++i) {
                double gi = g[i];
                double* grow = gm.data() + static_cast<std::size_t>(i) * c;
                for (int j = 0; j < c; ++j) grow[j] += gi * v->data[static_cast<std::size_t>(j)];
            }
        }
        if (v->requires_grad) {
            auto& gv = v->grad_slot();
            for (int i = 0; i < r; ++i) {
                double gi = g[i];
                const double* row = m->data.data() + static_cast<std::size_t>(i) * c;
                for (int j = 0; j < c; ++j) gv[static_cast<std::size_t>(j)] += gi * row[j];
            }
        }
    });
    return out;
}

Tensor outer(const Tensor& u, const Tensor& v) {
    check_vector(u, "outer");
    check_vector(v, "outer");
    const int m = u->shape[0], n = v->shape[0];
    std::vector<double> data(static_cast<std::size_t>(m) * n);
    for (int i = 0; i < m; ++i) {
        double ui = u->data[static_cast<std::size_t>(i)];
        double* row = data.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) row[j] = ui * v->data[static_cast<std::size_t>(j)];
    }
    Tensor out = new_node({m, n}, std::move(data), OpKind::Outer);
    record(out, {u, v}, [o = out.get(), u, v, m, n] {
        const double* g = o->grad.data();
        if (u->requires_grad) {
            auto& gu = u->grad_slot();
            for (int i = 0; i < m; ++i) {
                double acc = 0.0;
                const double* grow = g + static_cast<std::size_t>(i) * n;
                for (int j = 0; j < n; ++j) acc += grow[j] * v->data[static_cast<std::size_t>(j)];
                gu[static_cast<std::size_t>(i)] += acc;
            }
        }
        if (v->requires_grad) {
            auto& gv = v->grad_slot();
            for (int i = 0; i < m; ++i) {
                double ui = u->data[static_cast<std::size_t>(i)];
                const double* grow = g + static_cast<std::size_t>(i) * n;
                for (int j = 0; j < n; ++j) gv[static_cast<std::size_t>(j)] += ui * grow[j];
            }
        }
    });
    return out;
}

Tensor concat(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ArgumentError("concat: empty input");
    std::size_t total = 0;
    for (const auto& p : parts) {
        check_vector(p, "concat");
        total += p->numel();
    }
    std::vector<double> data;
    data.reserve(total);
    for (const auto& p : parts) data.insert(data.end(), p->data.begin(), p->data.end());
    Tensor out = new_node({static_cast<int>(total)}, std::move(data), OpKind::Concat);
    record(out, parts, [o = out.get(), parts] {
        std::size_t off = 0;
        for (const auto& p : parts) {
            if (p->requires_grad) p->add_to_grad(o->grad.data() + off, p->numel());
            off += p->numel();
        }
    });
    return out;
}

namespace {

template <typename Fwd, typename Dydx>
Tensor pointwise(const Tensor& v, OpKind kind, Fwd fwd, Dydx dydx) {
    std::vector<double> data(v->data.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = fwd(v->data[i]);
    Tensor out = new_node(v->shape, std::move(data), kind);
    record(out, {v}, [o = out.get(), v, dydx] {
        auto& gv = v->grad_slot();
        for (std::size_t i = 0; i < o->grad.size(); ++i)
            gv[i] += o->grad[i] * dydx(v->data[i], o->data[i]);
    });
    return out;
}

}  // namespace

Tensor tanh_op(const Tensor& v) {
    return pointwise(v, OpKind::Tanh, [](double x) { return std::tanh(x); },
                     [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid_op(const Tensor& v) {
    return pointwise(v, OpKind::Sigmoid, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                     [](double, double y) { return y * (1.0 - y); });
}

Tensor relu_op(const Tensor& v) {
    return pointwise(v, OpKind::Relu, [](double x) { return x > 0.0 ? x : 0.0; },
                     [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor vmax(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "vmax");
    std::vector<double> data(a->data.size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = std::max(a->data[i], b->data[i]);
    Tensor out = new_node(a->shape, std::move(data), OpKind::Vmax);
    record(out, {a, b}, [o = out.get(), a, b] {
        for (std::size_t i = 0; i < o->grad.size(); ++i) {
            if (a->data[i] >= b->data[i]) {
                if (a->requires_grad) a->grad_slot()[i] += o->grad[i];
            } else if (b->requires_grad) {
                b->grad_slot()[i] += o->grad[i];
            }
        }
    });
    return out;
}

Tensor dot(const Tensor& a, const Tensor& b) {
    check_vector(a, "dot");
    check_same_shape(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a->data.size(); ++i) acc += a->data[i] * b->data[i];
    Tensor out = new_node({1}, {acc}, OpKind::Dot);
    record(out, {a, b}, [o = out.get(), a, b] {
        double g = o->grad[0];
        if (a->requires_grad) {
            auto& ga = a->grad_slot();
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * b->data[i];
        }
        if (b->requires_grad) {
            auto& gb = b->grad_slot();
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * a->data[i];
        }
    });
    return out;
}

Tensor sum(const Tensor& v) {
    double acc = 0.0;
    for (double x : v->data) acc += x;
    Tensor out = new_node({1}, {acc}, OpKind::Sum);
    record(out, {v}, [o = out.get(), v] {
        double g = o->grad[0];
        auto& gv = v->grad_slot();
        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += g;
    });
    return out;
}

Tensor layernorm(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
    check_vector(x, "layernorm");
    check_vector(gamma, "layernorm");
    check_vector(beta, "layernorm");
    const int n = x->shape[0];
    if (n < 2) throw DimensionError("layernorm: input length must be >= 2");
    if (gamma->shape[0] != n || beta->shape[0] != n)
        throw DimensionError("layernorm: scale/shift width mismatch");

    double mu = 0.0;
    for (double v : x->data) mu += v;
    mu /= n;
    double var = 0.0;
    for (double v : x->data) var += (v - mu) * (v - mu);
    var /= n;
    const double inv_sigma = 1.0 / std::sqrt(var + kLayerNormEps);

    auto xhat = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n));
    std::vector<double> data(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        (*xhat)[static_cast<std::size_t>(i)] = (x->data[static_cast<std::size_t>(i)] - mu) * inv_sigma;
        data[static_cast<std::size_t>(i)] =
            (*xhat)[static_cast<std::size_t>(i)] * gamma->data[static_cast<std::size_t>(i)] +
            beta->data[static_cast<std::size_t>(i)];
    }
    Tensor out = new_node({n}, std::move(data), OpKind::LayerNorm);
    record(out, {x, gamma, beta}, [o = out.get(), x, gamma, beta, xhat, inv_sigma, n] {
        const double* g = o->grad.data();
        const auto& xh = *xhat;
        if (beta->requires_grad) beta->add_to_grad(g, static_cast<std::size_t>(n));
        if (gamma->requires_grad) {
            auto& gg = gamma->grad_slot();
            for (int i = 0; i < n; ++i) gg[static_cast<std::size_t>(i)] += g[i] * xh[static_cast<std::size_t>(i)];
        }
        if (x->requires_grad) {
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (int i = 0; i < n; ++i) {
                double dxh = g[i] * gamma->data[static_cast<std::size_t>(i)];
                mean_dxhat += dxh;
                mean_dxhat_xhat += dxh * xh[static_cast<std::size_t>(i)];
            }
            mean_dxhat /= n;
            mean_dxhat_xhat /= n;
            auto& gx = x->grad_slot();
            for (int i = 0; i < n; ++i) {
                double dxh = g[i] * gamma->data[static_cast<std::size_t>(i)];
                gx[static_cast<std::size_t>(i)] +=
                    inv_sigma * (dxh - mean_dxhat - xh[static_cast<std::size_t>(i)] * mean_dxhat_xhat);
            }
        }
    });
    return out;
}

Tensor softmax_xent(const Tensor& logits, int gold) {
    check_vector(logits, "softmax_xent");
    const int c = logits->shape[0];
    if (c < 2) throw DimensionError("softmax_xent: need at least 2 classes");
    if (gold < 0 || gold >= c) throw IndexError("softmax_xent: gold class out of range");

    double m = logits->data[0];
    for (double v : logits->data) m = std::max(m, v);
    double z = 0.0;
    auto probs = std::make_shared<std::vector<double>>(static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) {
        (*probs)[static_cast<std::size_t>(i)] = std::exp(logits->data[static_cast<std::size_t>(i)] - m);
        z += (*probs)[static_cast<std::size_t>(i)];
    }
    for (auto& p : *probs) p /= z;
    const double loss = std::log(z) + m - logits->data[static_cast<std::size_t>(gold)];

    Tensor out = new_node({1}, {loss}, OpKind::SoftmaxXent);
    record(out, {logits}, [o = out.get(), logits, probs, gold, c] {
        double g = o->grad[0];
        auto& gl = logits->grad_slot();
        for (int i = 0; i < c; ++i) {
            double ind = (i == gold) ? 1.0 : 0.0;
            gl[static_cast<std::size_t>(i)] += g * ((*probs)[static_cast<std::size_t>(i)] - ind);
        }
    });
    return out;
}

void backward(const Tensor& loss) {
    if (!loss->is_scalar()) throw DimensionError("backward: loss must be scalar");

    // Gather the reachable tape; creation ids reproduce forward order.
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> seen;
    std::vector<TensorNode*> stack{loss.get()};
    seen.insert(loss.get());
    while (!stack.empty()) {
        TensorNode* node = stack.back();
        stack.pop_back();
        order.push_back(node);
        for (const auto& in : node->inputs)
            if (seen.insert(in.get()).second) stack.push_back(in.get());
    }
    std::sort(order.begin(), order.end(),
              [](const TensorNode* a, const TensorNode* b) { return a->id > b->id; });

    loss->grad_slot()[0] += 1.0;
    for (TensorNode* node : order)
        if (node->backprop && !node->grad.empty()) node->backprop();
}

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f,
                           const Tensor& x, double h, double tol) {
    x->requires_grad = true;
    x->zero_grad();
    Tensor loss = f(x);
    if (!loss->is_scalar()) throw DimensionError("grad_check: f must be scalar-valued");
    backward(loss);
    std::vector<double> analytic = x->grad;
    if (analytic.empty()) analytic.assign(x->data.size(), 0.0);

    GradCheckReport report;
    report.coordinates = x->data.size();
    for (std::size_t i = 0; i < x->data.size(); ++i) {
        const double orig = x->data[i];
        x->data[i] = orig + h;
        const double fp = f(x)->value();
        x->data[i] = orig - h;
        const double fm = f(x)->value();
        x->data[i] = orig;
        const double numeric = (fp - fm) / (2.0 * h);
        const double rel = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
        if (rel >= report.max_rel_err) {
            report.max_rel_err = rel;
            report.worst_coordinate = i;
        }
    }
    report.pass = report.max_rel_err <= tol;
    return report;
}

}  // namespace depwise
