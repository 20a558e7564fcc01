#include "aif/diffcore/tape.hpp"

#include <cmath>
#include <string>

namespace aif::diffcore {

namespace {

double softplus_scalar(double x) {
    // max(x,0) + log1p(exp(-|x|)) stays finite for any x
    return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid_scalar(double x) {
    if (x >= 0.0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Var Tape::push(Tensor value, bool requires_grad,
               std::function<void(Tape&, std::size_t)> pullback,
               const char* op_name) {
    if (!value.all_finite())
        fail_runtime(std::string("diffcore: non-finite value produced by ") + op_name);
    nodes_.push_back(Node{std::move(value), requires_grad, std::move(pullback)});
    return Var{nodes_.size() - 1};
}

Var Tape::leaf(Tensor value) {
    return push(std::move(value), true, nullptr, "leaf");
}

Var Tape::constant(Tensor value) {
    return push(std::move(value), false, nullptr, "constant");
}

const Tensor& Tape::value(Var v) const {
    check_arg(v.valid() && v.id < nodes_.size(), "Tape::value: invalid node");
    return nodes_[v.id].value;
}

const Tensor& Tape::grad(Var v) const {
    check_arg(v.valid() && v.id < nodes_.size(), "Tape::grad: invalid node");
    check_runtime(ran_backward_, "Tape::grad: backward has not run");
    return grads_[v.id];
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
    Tensor& dst = grads_[id];
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

void Tape::accumulate_at(std::size_t id, std::size_t flat_index, double g) {
    grads_[id][flat_index] += g;
}

void Tape::backward(Var root) {
    check_runtime(!nodes_.empty(), "Tape::backward: no forward pass recorded");
    check_arg(root.valid() && root.id < nodes_.size(), "Tape::backward: invalid root");
    check_arg(nodes_[root.id].value.size() == 1, "Tape::backward: root must be scalar");

    grads_.clear();
    grads_.reserve(nodes_.size());
    for (const Node& n : nodes_) grads_.push_back(Tensor::zeros(n.value.shape()));
    grads_[root.id][0] = 1.0;

    for (std::size_t i = root.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || !n.pullback) continue;
        n.pullback(*this, i);
    }
    ran_backward_ = true;

    for (std::size_t i = 0; i <= root.id; ++i) {
        if (!nodes_[i].requires_grad) continue;
        if (!grads_[i].all_finite())
            fail_runtime("diffcore: non-finite gradient at node " + std::to_string(i));
    }
}

// ---------------------------------------------------------------- add

Var Tape::add(Var a, Var b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    bool track = tracked(a) || tracked(b);

    if (x.same_shape(y)) {
        Tensor out = x;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
        return push(std::move(out), track,
                    [a, b](Tape& t, std::size_t self) {
                        const Tensor& g = t.grads_[self];
                        if (t.tracked(a)) t.accumulate(a.id, g);
                        if (t.tracked(b)) t.accumulate(b.id, g);
                    },
                    "add");
    }
    if (y.size() == 1) {  // x + scalar node
        Tensor out = x;
        double s = y[0];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += s;
        return push(std::move(out), track,
                    [a, b](Tape& t, std::size_t self) {
                        const Tensor& g = t.grads_[self];
                        if (t.tracked(a)) t.accumulate(a.id, g);
                        if (t.tracked(b)) {
                            double s = 0.0;
                            for (std::size_t i = 0; i < g.size(); ++i) s += g[i];
                            t.accumulate_at(b.id, 0, s);
                        }
                    },
                    "add");
    }
    if (x.rank() == 2 && y.rank() == 1 && x.cols() == y.shape()[0]) {
        // row broadcast: matrix + bias vector
        Tensor out = x;
        std::size_t n = x.rows(), m = x.cols();
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < m; ++c) out.at(r, c) += y[c];
        return push(std::move(out), track,
                    [a, b, n, m](Tape& t, std::size_t self) {
                        const Tensor& g = t.grads_[self];
                        if (t.tracked(a)) t.accumulate(a.id, g);
                        if (t.tracked(b)) {
                            for (std::size_t c = 0; c < m; ++c) {
                                double s = 0.0;
                                for (std::size_t r = 0; r < n; ++r) s += g[r * m + c];
                                t.accumulate_at(b.id, c, s);
                            }
                        }
                    },
                    "add");
    }
    fail_contract("Tape::add: incompatible shapes");
}

Var Tape::sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

// ---------------------------------------------------------------- mul / div

Var Tape::mul(Var a, Var b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    bool track = tracked(a) || tracked(b);

    if (x.same_shape(y)) {
        Tensor out = x;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
        return push(std::move(out), track,
                    [a, b](Tape& t, std::size_t self) {
                        const Tensor& g = t.grads_[self];
                        const Tensor& xv = t.nodes_[a.id].value;
                        const Tensor& yv = t.nodes_[b.id].value;
                        if (t.tracked(a))
                            for (std::size_t i = 0; i < g.size(); ++i)
                                t.accumulate_at(a.id, i, g[i] * yv[i]);
                        if (t.tracked(b))
                            for (std::size_t i = 0; i < g.size(); ++i)
                                t.accumulate_at(b.id, i, g[i] * xv[i]);
                    },
                    "mul");
    }
    if (y.size() == 1) {  // x * scalar node
        Tensor out = x;
        double s = y[0];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
        return push(std::move(out), track,
                    [a, b](Tape& t, std::size_t self) {
                        const Tensor& g = t.grads_[self];
                        const Tensor& xv = t.nodes_[a.id].value;
                        double s = t.nodes_[b.id].value[0];
                        if (t.tracked(a))
                            for (std::size_t i = 0; i < g.size(); ++i)
                                t.accumulate_at(a.id, i, g[i] * s);
                        if (t.tracked(b)) {
                            double acc = 0.0;
                            for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * xv[i];
                            t.accumulate_at(b.id, 0, acc);
                        }
                    },
                    "mul");
    }
    fail_contract("Tape::mul: incompatible shapes");
}

Var Tape::div(Var a, Var b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    bool track = tracked(a) || tracked(b);

    if (x.same_shape(y) || y.size() == 1) {
        Tensor out = x;
        bool scalar_rhs = !x.same_shape(y);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] /= scalar_rhs ? y[0] : y[i];
        return push(std::move(out), track,
                    [a, b, scalar_rhs](Tape& t, std::size_t self) {
                        const Tensor& g = t.grads_[self];
                        const Tensor& xv = t.nodes_[a.id].value;
                        const Tensor& yv = t.nodes_[b.id].value;
                        if (t.tracked(a))
                            for (std::size_t i = 0; i < g.size(); ++i)
                                t.accumulate_at(a.id, i, g[i] / (scalar_rhs ? yv[0] : yv[i]));
                        if (t.tracked(b)) {
                            if (scalar_rhs) {
                                double acc = 0.0, d = yv[0];
                                for (std::size_t i = 0; i < g.size(); ++i)
                                    acc += -g[i] * xv[i] / (d * d);
                                t.accumulate_at(b.id, 0, acc);
                            } else {
                                for (std::size_t i = 0; i < g.size(); ++i)
                                    t.accumulate_at(b.id, i, -g[i] * xv[i] / (yv[i] * yv[i]));
                            }
                        }
                    },
                    "div");
    }
    fail_contract("Tape::div: incompatible shapes");
}

// ---------------------------------------------------------------- matmul

Var Tape::matmul(Var a, Var b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    check_arg(x.rank() == 2 && y.rank() == 2 && x.cols() == y.rows(),
              "Tape::matmul: requires [n,k] x [k,m]");
    std::size_t n = x.rows(), k = x.cols(), m = y.cols();
    Tensor out = Tensor::zeros({n, m});
    for (std::size_t i = 0; i < n; ++i) {
        const double* xrow = x.data() + i * k;
        double* orow = out.data() + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            double xv = xrow[p];
            const double* yrow = y.data() + p * m;
            for (std::size_t j = 0; j < m; ++j) orow[j] += xv * yrow[j];
        }
    }
    bool track = tracked(a) || tracked(b);
    return push(std::move(out), track,
                [a, b, n, k, m](Tape& t, std::size_t self) {
                    const Tensor& g = t.grads_[self];
                    const Tensor& xv = t.nodes_[a.id].value;
                    const Tensor& yv = t.nodes_[b.id].value;
                    if (t.tracked(a)) {
                        // dX = G Y^T
                        Tensor& gx = t.grads_[a.id];
                        for (std::size_t i = 0; i < n; ++i)
                            for (std::size_t p = 0; p < k; ++p) {
                                double acc = 0.0;
                                for (std::size_t j = 0; j < m; ++j)
                                    acc += g[i * m + j] * yv[p * m + j];
                                gx[i * k + p] += acc;
                            }
                    }
                    if (t.tracked(b)) {
                        // dY = X^T G
                        Tensor& gy = t.grads_[b.id];
                        for (std::size_t p = 0; p < k; ++p)
                            for (std::size_t i = 0; i < n; ++i) {
                                double xvi = xv[i * k + p];
                                for (std::size_t j = 0; j < m; ++j)
                                    gy[p * m + j] += xvi * g[i * m + j];
                            }
                    }
                },
                "matmul");
}

// ---------------------------------------------------------------- unary

Var Tape::relu(Var a) {
    Tensor out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out[i] < 0.0) out[i] = 0.0;
    return push(std::move(out), tracked(a),
                [a](Tape& t, std::size_t self) {
                    if (!t.tracked(a)) return;
                    const Tensor& g = t.grads_[self];
                    const Tensor& xv = t.nodes_[a.id].value;
                    for (std::size_t i = 0; i < g.size(); ++i)
                        if (xv[i] > 0.0) t.accumulate_at(a.id, i, g[i]);
                },
                "relu");
}

Var Tape::exp(Var a) {
    Tensor out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
    return push(std::move(out), tracked(a),
                [a](Tape& t, std::size_t self) {
                    if (!t.tracked(a)) return;
                    const Tensor& g = t.grads_[self];
                    const Tensor& ov = t.nodes_[self].value;
                    for (std::size_t i = 0; i < g.size(); ++i)
                        t.accumulate_at(a.id, i, g[i] * ov[i]);
                },
                "exp");
}

Var Tape::log(Var a) {
    Tensor out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
    return push(std::move(out), tracked(a),
                [a](Tape& t, std::size_t self) {
                    if (!t.tracked(a)) return;
                    const Tensor& g = t.grads_[self];
                    const Tensor& xv = t.nodes_[a.id].value;
                    for (std::size_t i = 0; i < g.size(); ++i)
                        t.accumulate_at(a.id, i, g[i] / xv[i]);
                },
                "log");
}

Var Tape::softplus(Var a) {
    Tensor out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = softplus_scalar(out[i]);
    return push(std::move(out), tracked(a),
                [a](Tape& t, std::size_t self) {
                    if (!t.tracked(a)) return;
                    const Tensor& g = t.grads_[self];
                    const Tensor& xv = t.nodes_[a.id].value;
                    for (std::size_t i = 0; i < g.size(); ++i)
                        t.accumulate_at(a.id, i, g[i] * sigmoid_scalar(xv[i]));
                },
                "softplus");
}

Var Tape::sqrt(Var a) {
    Tensor out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(out[i]);
    return push(std::move(out), tracked(a),
                [a](Tape& t, std::size_t self) {
                    if (!t.tracked(a)) return;
                    const Tensor& g = t.grads_[self];
                    const Tensor& ov = t.nodes_[self].value;
                    for (std::size_t i = 0; i < g.size(); ++i)
                        t.accumulate_at(a.id, i, g[i] * 0.5 / ov[i]);
                },
                "sqrt");
}

Var Tape::square(Var a) {
    Tensor out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= out[i];
    return push(std::move(out), tracked(a),
                [a](Tape& t, std::size_t self) {
                    if (!t.tracked(a)) return;
                    const Tensor& g = t.grads_[self];
                    const Tensor& xv = t.nodes_[a.id].value;
                    for (std::size_t i = 0; i < g.size(); ++i)
                        t.accumulate_at(a.id, i, g[i] * 2.0 * xv[i]);
                },
                "square");
}

// ---------------------------------------------------------------- reductions

Var Tape::sum(Var a) {
    const Tensor& x = value(a);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i];
    return push(Tensor::scalar(s), tracked(a),
                [a](Tape& t, std::size_t self) {
                    if (!t.tracked(a)) return;
                    double g = t.grads_[self][0];
                    Tensor& gx = t.grads_[a.id];
                    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
                },
                "sum");
}

Var Tape::mean(Var a) {
    const Tensor& x = value(a);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i];
    double inv_n = 1.0 / static_cast<double>(x.size());
    return push(Tensor::scalar(s * inv_n), tracked(a),
                [a, inv_n](Tape& t, std::size_t self) {
                    if (!t.tracked(a)) return;
                    double g = t.grads_[self][0] * inv_n;
                    Tensor& gx = t.grads_[a.id];
                    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
                },
                "mean");
}

// ---------------------------------------------------------------- shape ops

Var Tape::concat(Var a, Var b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    bool track = tracked(a) || tracked(b);

    if (x.rank() == 1 && y.rank() == 1) {
        std::vector<double> vals(x.values());
        vals.insert(vals.end(), y.values().begin(), y.values().end());
        std::size_t na = x.size();
        return push(Tensor::vector(std::move(vals)), track,
                    [a, b, na](Tape& t, std::size_t self) {
                        const Tensor& g = t.grads_[self];
                        if (t.tracked(a))
                            for (std::size_t i = 0; i < na; ++i)
                                t.accumulate_at(a.id, i, g[i]);
                        if (t.tracked(b))
                            for (std::size_t i = na; i < g.size(); ++i)
                                t.accumulate_at(b.id, i - na, g[i]);
                    },
                    "concat");
    }
    if (x.rank() == 2 && y.rank() == 2 && x.rows() == y.rows()) {
        std::size_t n = x.rows(), p = x.cols(), q = y.cols();
        Tensor out = Tensor::zeros({n, p + q});
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < p; ++c) out.at(r, c) = x.at(r, c);
            for (std::size_t c = 0; c < q; ++c) out.at(r, p + c) = y.at(r, c);
        }
        return push(std::move(out), track,
                    [a, b, n, p, q](Tape& t, std::size_t self) {
                        const Tensor& g = t.grads_[self];
                        std::size_t w = p + q;
                        if (t.tracked(a))
                            for (std::size_t r = 0; r < n; ++r)
                                for (std::size_t c = 0; c < p; ++c)
                                    t.accumulate_at(a.id, r * p + c, g[r * w + c]);
                        if (t.tracked(b))
                            for (std::size_t r = 0; r < n; ++r)
                                for (std::size_t c = 0; c < q; ++c)
                                    t.accumulate_at(b.id, r * q + c, g[r * w + p + c]);
                    },
                    "concat");
    }
    fail_contract("Tape::concat: incompatible shapes");
}

Var Tape::slice_cols(Var a, std::size_t from, std::size_t to) {
    const Tensor& x = value(a);
    check_arg(x.rank() == 2 && from < to && to <= x.cols(),
              "Tape::slice_cols: bad column range");
    std::size_t n = x.rows(), m = x.cols(), w = to - from;
    Tensor out = Tensor::zeros({n, w});
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < w; ++c) out.at(r, c) = x.at(r, from + c);
    return push(std::move(out), tracked(a),
                [a, n, m, w, from](Tape& t, std::size_t self) {
                    if (!t.tracked(a)) return;
                    const Tensor& g = t.grads_[self];
                    for (std::size_t r = 0; r < n; ++r)
                        for (std::size_t c = 0; c < w; ++c)
                            t.accumulate_at(a.id, r * m + from + c, g[r * w + c]);
                },
                "slice_cols");
}

// ---------------------------------------------------------------- affine

Var Tape::scale(Var a, double c) {
    Tensor out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
    return push(std::move(out), tracked(a),
                [a, c](Tape& t, std::size_t self) {
                    if (!t.tracked(a)) return;
                    const Tensor& g = t.grads_[self];
                    for (std::size_t i = 0; i < g.size(); ++i)
                        t.accumulate_at(a.id, i, g[i] * c);
                },
                "scale");
}

Var Tape::add_scalar(Var a, double c) {
    Tensor out = value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c;
    return push(std::move(out), tracked(a),
                [a](Tape& t, std::size_t self) {
                    if (!t.tracked(a)) return;
                    t.accumulate(a.id, t.grads_[self]);
                },
                "add_scalar");
}

}  // namespace aif::diffcore
