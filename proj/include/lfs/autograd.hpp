#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "lfs/tensor.hpp"

namespace lfs::ag {

struct Node;
using Var = std::shared_ptr<Node>;

// Define-by-run graph node. Values are computed eagerly; backward functions
// build new graph nodes out of the same op set, so grad-of-grad (needed by
// the R1 penalty) works without special casing.
struct Node {
    Tensor value;
    bool requires_grad = false;
    std::vector<Var> inputs;
    // (self, upstream grad) -> grads w.r.t. inputs (entries may be null).
    std::function<std::vector<Var>(const Var&, const Var&)> grad_fn;
};

Var constant(Tensor t);
Var param(Tensor t);           // leaf with requires_grad
Var detach(const Var& v);      // value shared, gradient cut

// Elementwise
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var neg(const Var& a);
Var smul(const Var& a, double c);
Var sadd(const Var& a, double c);
Var pow_(const Var& a, double p);
Var leaky_relu(const Var& a, double slope);
Var tanh_(const Var& a);
Var sigmoid_(const Var& a);
Var softplus_(const Var& a);

// Linear algebra
Var matvec(const Var& w, const Var& x);    // w [O,I], x size I -> [O]
Var matvec_t(const Var& w, const Var& g);  // w [O,I], g size O -> [I]
Var outer(const Var& a, const Var& b);     // [O] x [I] -> [O,I]

// Convolution triple (each is the adjoint of another; the set is closed
// under differentiation).
Var conv2d(const Var& x, const Var& w, int stride, int pad);
Var conv2d_dx(const Var& g, const Var& w, int stride, int pad, int h, int w_in);
Var conv2d_dw(const Var& g, const Var& x, int stride, int pad, int k);

// Resampling
Var avgpool2(const Var& x);   // [C,H,W] -> [C,H/2,W/2]
Var upsample2(const Var& x);  // [C,H,W] -> [C,2H,2W]

// Reductions / broadcasts over flattened views
Var row_sum(const Var& x, int r, int m);          // x viewed [r,m] -> [r]
Var row_broadcast(const Var& v, int m);           // [r] -> [r,m]
Var mid_sum(const Var& x, int a, int b, int m);   // x viewed [a,b,m] -> [b]
Var mid_broadcast(const Var& v, int a, int m);    // [b] -> [a,b,m]
// Fused per-row ops; x is viewed as [dim0, rest]. Gradients are built from the
// composable primitives above, so they stay differentiable.
Var row_standardize(const Var& x, double eps);    // (x - mu_row) / sqrt(var_row + eps)
Var row_affine(const Var& x, const Var& s, const Var& b);  // x * s[row] + b[row]
Var sum_all(const Var& x);                        // -> [1]
Var broadcast_full(const Var& s, std::vector<int> shape);
Var reshape(const Var& x, std::vector<int> shape);

// Composites
Var square(const Var& x);
Var mean_all(const Var& x);
Var dot(const Var& a, const Var& b);
Var mse(const Var& a, const Var& b);  // mean of squared differences

using GradMap = std::unordered_map<Node*, Var>;

// Reverse-mode sweep from a scalar root. Returns grads for every reachable
// node with requires_grad set.
GradMap backward(const Var& root);

inline double scalar_of(const Var& v) { return v->value[0]; }

}  // namespace lfs::ag
