#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "aif/diffcore/tensor.hpp"

namespace aif::diffcore {

/// Handle to a node on a Tape.
struct Var {
    std::size_t id = static_cast<std::size_t>(-1);
    bool valid() const { return id != static_cast<std::size_t>(-1); }
};

/// Define-by-run computation tape. Each op evaluates eagerly, records the
/// node in creation order (which is a topological order), and registers a
/// pullback used by backward(). Gradients accumulate additively, so fan-out
/// is handled naturally. A tape is single-writer; share read-only parameter
/// tensors across tapes for concurrent evaluation.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Leaf whose gradient is tracked (parameters, differentiable inputs).
    Var leaf(Tensor value);
    /// Leaf with no gradient tracking (data, frozen values).
    Var constant(Tensor value);

    const Tensor& value(Var v) const;
    /// Gradient of the last backward() root w.r.t. node v.
    const Tensor& grad(Var v) const;

    /// Reverse pass from a scalar root. Visits every node at most once, in
    /// reverse topological order. Throws if the root is not scalar, if no
    /// forward nodes exist, or if a non-finite gradient appears.
    void backward(Var root);

    std::size_t node_count() const { return nodes_.size(); }

    // ---- primitives ----
    Var add(Var a, Var b);       // same shape, [n,m]+[m], or x + scalar
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);       // elementwise; or x * scalar node
    Var div(Var a, Var b);       // elementwise; or x / scalar node
    Var matmul(Var a, Var b);    // [n,k] x [k,m]
    Var relu(Var a);             // subgradient at 0 is 0
    Var exp(Var a);
    Var log(Var a);
    Var softplus(Var a);
    Var sqrt(Var a);
    Var square(Var a);
    Var sum(Var a);              // -> scalar
    Var mean(Var a);             // -> scalar
    Var concat(Var a, Var b);    // rank-1 concat, or rank-2 column concat
    Var slice_cols(Var a, std::size_t from, std::size_t to);  // rank-2

    // affine conveniences (still single tape nodes)
    Var scale(Var a, double c);
    Var add_scalar(Var a, double c);
    Var neg(Var a) { return scale(a, -1.0); }

private:
    struct Node {
        Tensor value;
        bool requires_grad = false;
        // Pullback: reads grads_[self], accumulates into parent grads.
        std::function<void(Tape&, std::size_t)> pullback;
    };

    Var push(Tensor value, bool requires_grad,
             std::function<void(Tape&, std::size_t)> pullback,
             const char* op_name);
    bool tracked(Var v) const { return nodes_[v.id].requires_grad; }
    void accumulate(std::size_t id, const Tensor& g);
    void accumulate_at(std::size_t id, std::size_t flat_index, double g);

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
    bool ran_backward_ = false;

    friend struct TapeGradAccess;
};

}  // namespace aif::diffcore
