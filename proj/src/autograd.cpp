#include "lfs/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lfs/kernels.hpp"

namespace lfs::ag {

namespace {

namespace K = lfs::kernels;

Var make(Tensor value, std::vector<Var> inputs,
         std::function<std::vector<Var>(const Var&, const Var&)> grad_fn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    bool needs = false;
    for (const auto& in : inputs)
        if (in && in->requires_grad) needs = true;
    n->requires_grad = needs;
    if (needs) {
        n->inputs = std::move(inputs);
        n->grad_fn = std::move(grad_fn);
    }
    return n;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (!a->value.same_shape(b->value))
        throw ShapeMismatch(std::string(op) + ": operand shapes differ");
}

int conv_out(int h, int k, int stride, int pad) { return (h + 2 * pad - k) / stride + 1; }

// col is [ci*k*k, ncols] for output positions [pos0, pos0+ncols).
void im2col(const double* x, int ci, int h, int w, int k, int stride, int pad,
            int wo, int pos0, int ncols, double* col) {
    const int kk = k * k;
    for (int c = 0; c < ci; ++c) {
        const double* xc = x + static_cast<int64_t>(c) * h * w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                double* row = col + (static_cast<int64_t>(c) * kk + ky * k + kx) * ncols;
                int oy = pos0 / wo, ox = pos0 % wo;
                for (int j = 0; j < ncols; ++j) {
                    const int iy = oy * stride - pad + ky;
                    const int ix = ox * stride - pad + kx;
                    row[j] = (iy >= 0 && iy < h && ix >= 0 && ix < w)
                                 ? xc[static_cast<int64_t>(iy) * w + ix]
                                 : 0.0;
                    if (++ox == wo) {
                        ox = 0;
                        ++oy;
                    }
                }
            }
        }
    }
}

void col2im_acc(const double* col, int ci, int h, int w, int k, int stride, int pad,
                int wo, int pos0, int ncols, double* dx) {
    const int kk = k * k;
    for (int c = 0; c < ci; ++c) {
        double* xc = dx + static_cast<int64_t>(c) * h * w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const double* row = col + (static_cast<int64_t>(c) * kk + ky * k + kx) * ncols;
                int oy = pos0 / wo, ox = pos0 % wo;
                for (int j = 0; j < ncols; ++j) {
                    const int iy = oy * stride - pad + ky;
                    const int ix = ox * stride - pad + kx;
                    if (iy >= 0 && iy < h && ix >= 0 && ix < w)
                        xc[static_cast<int64_t>(iy) * w + ix] += row[j];
                    if (++ox == wo) {
                        ox = 0;
                        ++oy;
                    }
                }
            }
        }
    }
}

constexpr int kConvStrip = 2048;

Tensor conv_fwd_value(const Tensor& x, const Tensor& w, int stride, int pad) {
    const int ci = x.dim(0), h = x.dim(1), win = x.dim(2);
    const int co = w.dim(0), k = w.dim(2);
    const int ho = conv_out(h, k, stride, pad), wo = conv_out(win, k, stride, pad);
    const int ckk = ci * k * k;
    Tensor y = Tensor::uninit({co, ho, wo});
    const int total = ho * wo;
    detail::Buffer col;
    detail::Buffer ytmp;
    for (int pos0 = 0; pos0 < total; pos0 += kConvStrip) {
        const int ncols = std::min(kConvStrip, total - pos0);
        col.resize(static_cast<size_t>(ckk) * ncols);
        ytmp.resize(static_cast<size_t>(co) * ncols);
        im2col(x.data(), ci, h, win, k, stride, pad, wo, pos0, ncols, col.data());
        K::ops().gemm_nn(co, ncols, ckk, w.data(), col.data(), ytmp.data(), false);
        for (int r = 0; r < co; ++r)
            std::copy_n(ytmp.data() + static_cast<int64_t>(r) * ncols, ncols,
                        y.data() + static_cast<int64_t>(r) * total + pos0);
    }
    return y;
}

Tensor conv_dx_value(const Tensor& g, const Tensor& w, int stride, int pad, int h, int win) {
    const int co = g.dim(0), ho = g.dim(1), wo = g.dim(2);
    const int ci = w.dim(1), k = w.dim(2);
    const int ckk = ci * k * k;
    Tensor dx = Tensor::zeros({ci, h, win});
    const int total = ho * wo;
    detail::Buffer gstrip, dcol;
    for (int pos0 = 0; pos0 < total; pos0 += kConvStrip) {
        const int ncols = std::min(kConvStrip, total - pos0);
        gstrip.resize(static_cast<size_t>(co) * ncols);
        dcol.resize(static_cast<size_t>(ckk) * ncols);
        for (int r = 0; r < co; ++r)
            std::copy_n(g.data() + static_cast<int64_t>(r) * total + pos0, ncols,
                        gstrip.data() + static_cast<int64_t>(r) * ncols);
        K::gemm_tn(ckk, ncols, co, w.data(), gstrip.data(), dcol.data(), false);
        col2im_acc(dcol.data(), ci, h, win, k, stride, pad, wo, pos0, ncols, dx.data());
    }
    return dx;
}

Tensor conv_dw_value(const Tensor& g, const Tensor& x, int stride, int pad, int k) {
    const int co = g.dim(0), ho = g.dim(1), wo = g.dim(2);
    const int ci = x.dim(0), h = x.dim(1), win = x.dim(2);
    const int ckk = ci * k * k;
    Tensor dw = Tensor::zeros({co, ci, k, k});
    const int total = ho * wo;
    detail::Buffer col, gstrip;
    for (int pos0 = 0; pos0 < total; pos0 += kConvStrip) {
        const int ncols = std::min(kConvStrip, total - pos0);
        col.resize(static_cast<size_t>(ckk) * ncols);
        gstrip.resize(static_cast<size_t>(co) * ncols);
        im2col(x.data(), ci, h, win, k, stride, pad, wo, pos0, ncols, col.data());
        for (int r = 0; r < co; ++r)
            std::copy_n(g.data() + static_cast<int64_t>(r) * total + pos0, ncols,
                        gstrip.data() + static_cast<int64_t>(r) * ncols);
        K::gemm_nt(co, ckk, ncols, gstrip.data(), col.data(), dw.data(), true);
    }
    return dw;
}

}  // namespace

Var constant(Tensor t) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    return n;
}

Var param(Tensor t) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    n->requires_grad = true;
    return n;
}

Var detach(const Var& v) { return constant(v->value); }

Var add(const Var& a, const Var& b) {
    check_same_shape(a, b, "add");
    Tensor y = Tensor::uninit(a->value.shape());
    K::ops().add(y.size(), a->value.data(), b->value.data(), y.data());
    return make(std::move(y), {a, b}, [](const Var&, const Var& g) {
        return std::vector<Var>{g, g};
    });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a, b, "sub");
    Tensor y = Tensor::uninit(a->value.shape());
    K::ops().sub(y.size(), a->value.data(), b->value.data(), y.data());
    return make(std::move(y), {a, b}, [](const Var&, const Var& g) {
        return std::vector<Var>{g, neg(g)};
    });
}

Var mul(const Var& a, const Var& b) {
    check_same_shape(a, b, "mul");
    Tensor y = Tensor::uninit(a->value.shape());
    K::ops().mul(y.size(), a->value.data(), b->value.data(), y.data());
    return make(std::move(y), {a, b}, [](const Var& self, const Var& g) {
        return std::vector<Var>{mul(g, self->inputs[1]), mul(g, self->inputs[0])};
    });
}

Var neg(const Var& a) { return smul(a, -1.0); }

Var smul(const Var& a, double c) {
    Tensor y = Tensor::uninit(a->value.shape());
    K::ops().scale(y.size(), c, a->value.data(), y.data());
    return make(std::move(y), {a}, [c](const Var&, const Var& g) {
        return std::vector<Var>{smul(g, c)};
    });
}

Var sadd(const Var& a, double c) {
    Tensor y = Tensor::uninit(a->value.shape());
    const double* x = a->value.data();
    for (int64_t i = 0; i < y.size(); ++i) y[i] = x[i] + c;
    return make(std::move(y), {a}, [](const Var&, const Var& g) {
        return std::vector<Var>{g};
    });
}

Var pow_(const Var& a, double p) {
    Tensor y = Tensor::uninit(a->value.shape());
    const double* x = a->value.data();
    for (int64_t i = 0; i < y.size(); ++i) y[i] = std::pow(x[i], p);
    return make(std::move(y), {a}, [p](const Var& self, const Var& g) {
        return std::vector<Var>{mul(g, smul(pow_(self->inputs[0], p - 1.0), p))};
    });
}

Var leaky_relu(const Var& a, double slope) {
    Tensor y = Tensor::uninit(a->value.shape());
    Tensor mask = Tensor::uninit(a->value.shape());
    const double* x = a->value.data();
    for (int64_t i = 0; i < y.size(); ++i) {
        const double m = x[i] > 0.0 ? 1.0 : slope;
        mask[i] = m;
        y[i] = m * x[i];
    }
    return make(std::move(y), {a}, [mask](const Var&, const Var& g) {
        return std::vector<Var>{mul(g, constant(mask))};
    });
}

Var tanh_(const Var& a) {
    Tensor y = Tensor::uninit(a->value.shape());
    const double* x = a->value.data();
    for (int64_t i = 0; i < y.size(); ++i) y[i] = std::tanh(x[i]);
    return make(std::move(y), {a}, [](const Var& self, const Var& g) {
        // d tanh = 1 - y^2, expressed through the output node so the second
        // derivative flows.
        Var one_minus = sadd(neg(square(self)), 1.0);
        return std::vector<Var>{mul(g, one_minus)};
    });
}

Var sigmoid_(const Var& a) {
    Tensor y = Tensor::uninit(a->value.shape());
    const double* x = a->value.data();
    for (int64_t i = 0; i < y.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
    return make(std::move(y), {a}, [](const Var& self, const Var& g) {
        Var dy = mul(self, sadd(neg(self), 1.0));
        return std::vector<Var>{mul(g, dy)};
    });
}

Var softplus_(const Var& a) {
    Tensor y = Tensor::uninit(a->value.shape());
    const double* x = a->value.data();
    for (int64_t i = 0; i < y.size(); ++i)
        y[i] = std::max(x[i], 0.0) + std::log1p(std::exp(-std::abs(x[i])));
    return make(std::move(y), {a}, [](const Var& self, const Var& g) {
        return std::vector<Var>{mul(g, sigmoid_(self->inputs[0]))};
    });
}

Var matvec(const Var& w, const Var& x) {
    if (w->value.ndim() != 2 || w->value.dim(1) != static_cast<int>(x->value.size()))
        throw ShapeMismatch("matvec: W columns must match x length");
    const int o = w->value.dim(0), i = w->value.dim(1);
    Tensor y = Tensor::uninit({o});
    for (int r = 0; r < o; ++r)
        y[r] = K::ops().dot(i, w->value.data() + static_cast<int64_t>(r) * i, x->value.data());
    return make(std::move(y), {w, x}, [](const Var& self, const Var& g) {
        return std::vector<Var>{outer(g, self->inputs[1]), matvec_t(self->inputs[0], g)};
    });
}

Var matvec_t(const Var& w, const Var& g0) {
    if (w->value.ndim() != 2 || w->value.dim(0) != static_cast<int>(g0->value.size()))
        throw ShapeMismatch("matvec_t: W rows must match g length");
    const int o = w->value.dim(0), i = w->value.dim(1);
    Tensor y = Tensor::zeros({i});
    for (int r = 0; r < o; ++r)
        K::ops().axpy(i, g0->value[r], w->value.data() + static_cast<int64_t>(r) * i, y.data());
    return make(std::move(y), {w, g0}, [](const Var& self, const Var& u) {
        return std::vector<Var>{outer(self->inputs[1], u), matvec(self->inputs[0], u)};
    });
}

Var outer(const Var& a, const Var& b) {
    const int o = static_cast<int>(a->value.size()), i = static_cast<int>(b->value.size());
    Tensor y = Tensor::uninit({o, i});
    for (int r = 0; r < o; ++r)
        K::ops().scale(i, a->value[r], b->value.data(), y.data() + static_cast<int64_t>(r) * i);
    return make(std::move(y), {a, b}, [](const Var& self, const Var& u) {
        return std::vector<Var>{matvec(u, self->inputs[1]), matvec_t(u, self->inputs[0])};
    });
}

Var conv2d(const Var& x, const Var& w, int stride, int pad) {
    if (x->value.ndim() != 3 || w->value.ndim() != 4 || x->value.dim(0) != w->value.dim(1))
        throw ShapeMismatch("conv2d: expected x [Ci,H,W] and w [Co,Ci,K,K]");
    const int h = x->value.dim(1), win = x->value.dim(2), k = w->value.dim(2);
    Tensor y = conv_fwd_value(x->value, w->value, stride, pad);
    return make(std::move(y), {x, w},
                [stride, pad, h, win, k](const Var& self, const Var& g) {
                    return std::vector<Var>{
                        conv2d_dx(g, self->inputs[1], stride, pad, h, win),
                        conv2d_dw(g, self->inputs[0], stride, pad, k)};
                });
}

Var conv2d_dx(const Var& g, const Var& w, int stride, int pad, int h, int w_in) {
    Tensor y = conv_dx_value(g->value, w->value, stride, pad, h, w_in);
    const int k = w->value.dim(2);
    return make(std::move(y), {g, w},
                [stride, pad, k](const Var& self, const Var& u) {
                    return std::vector<Var>{
                        conv2d(u, self->inputs[1], stride, pad),
                        conv2d_dw(self->inputs[0], u, stride, pad, k)};
                });
}

Var conv2d_dw(const Var& g, const Var& x, int stride, int pad, int k) {
    Tensor y = conv_dw_value(g->value, x->value, stride, pad, k);
    const int h = x->value.dim(1), win = x->value.dim(2);
    return make(std::move(y), {g, x},
                [stride, pad, h, win](const Var& self, const Var& u) {
                    return std::vector<Var>{
                        conv2d(self->inputs[1], u, stride, pad),
                        conv2d_dx(self->inputs[0], u, stride, pad, h, win)};
                });
}

Var avgpool2(const Var& x) {
    if (x->value.ndim() != 3 || x->value.dim(1) % 2 || x->value.dim(2) % 2)
        throw ShapeMismatch("avgpool2: expected [C,H,W] with even H,W");
    const int c = x->value.dim(0), h = x->value.dim(1), w = x->value.dim(2);
    Tensor y = Tensor::uninit({c, h / 2, w / 2});
    const double* xd = x->value.data();
    for (int ch = 0; ch < c; ++ch)
        for (int i = 0; i < h / 2; ++i)
            for (int j = 0; j < w / 2; ++j) {
                const int64_t base = (static_cast<int64_t>(ch) * h + 2 * i) * w + 2 * j;
                y[(static_cast<int64_t>(ch) * (h / 2) + i) * (w / 2) + j] =
                    0.25 * (xd[base] + xd[base + 1] + xd[base + w] + xd[base + w + 1]);
            }
    return make(std::move(y), {x}, [](const Var&, const Var& g) {
        return std::vector<Var>{smul(upsample2(g), 0.25)};
    });
}

Var upsample2(const Var& x) {
    if (x->value.ndim() != 3) throw ShapeMismatch("upsample2: expected [C,H,W]");
    const int c = x->value.dim(0), h = x->value.dim(1), w = x->value.dim(2);
    Tensor y = Tensor::uninit({c, 2 * h, 2 * w});
    const double* xd = x->value.data();
    for (int ch = 0; ch < c; ++ch)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const double v = xd[(static_cast<int64_t>(ch) * h + i) * w + j];
                const int64_t base = (static_cast<int64_t>(ch) * 2 * h + 2 * i) * 2 * w + 2 * j;
                y[base] = v;
                y[base + 1] = v;
                y[base + 2 * w] = v;
                y[base + 2 * w + 1] = v;
            }
    return make(std::move(y), {x}, [](const Var&, const Var& g) {
        return std::vector<Var>{smul(avgpool2(g), 4.0)};
    });
}

Var row_sum(const Var& x, int r, int m) {
    if (x->value.size() != static_cast<int64_t>(r) * m)
        throw ShapeMismatch("row_sum: size mismatch");
    Tensor y = Tensor::uninit({r});
    for (int i = 0; i < r; ++i)
        y[i] = K::ops().sum(m, x->value.data() + static_cast<int64_t>(i) * m);
    return make(std::move(y), {x}, [r, m](const Var& self, const Var& g) {
        return std::vector<Var>{reshape(row_broadcast(g, m), self->inputs[0]->value.shape())};
    });
}

Var row_broadcast(const Var& v, int m) {
    const int r = static_cast<int>(v->value.size());
    Tensor y = Tensor::uninit({r, m});
    for (int i = 0; i < r; ++i)
        std::fill_n(y.data() + static_cast<int64_t>(i) * m, m, v->value[i]);
    return make(std::move(y), {v}, [r, m](const Var& self, const Var& g) {
        return std::vector<Var>{reshape(row_sum(g, r, m), self->inputs[0]->value.shape())};
    });
}

Var mid_sum(const Var& x, int a, int b, int m) {
    if (x->value.size() != static_cast<int64_t>(a) * b * m)
        throw ShapeMismatch("mid_sum: size mismatch");
    Tensor y = Tensor::zeros({b});
    const double* xd = x->value.data();
    for (int ia = 0; ia < a; ++ia)
        for (int ib = 0; ib < b; ++ib)
            y[ib] += K::ops().sum(m, xd + (static_cast<int64_t>(ia) * b + ib) * m);
    return make(std::move(y), {x}, [a, m](const Var& self, const Var& g) {
        return std::vector<Var>{reshape(mid_broadcast(g, a, m), self->inputs[0]->value.shape())};
    });
}

Var mid_broadcast(const Var& v, int a, int m) {
    const int b = static_cast<int>(v->value.size());
    Tensor y = Tensor::uninit({a, b, m});
    for (int ia = 0; ia < a; ++ia)
        for (int ib = 0; ib < b; ++ib)
            std::fill_n(y.data() + (static_cast<int64_t>(ia) * b + ib) * m, m, v->value[ib]);
    return make(std::move(y), {v}, [a, b, m](const Var& self, const Var& g) {
        return std::vector<Var>{reshape(mid_sum(g, a, b, m), self->inputs[0]->value.shape())};
    });
}

Var row_standardize(const Var& x, double eps) {
    if (x->value.ndim() < 1 || x->value.dim(0) <= 0)
        throw ShapeMismatch("row_standardize: need a leading row dimension");
    const int c = x->value.dim(0);
    const int m = static_cast<int>(x->value.size() / c);
    Tensor y = Tensor::uninit(x->value.shape());
    const double* xd = x->value.data();
    for (int r = 0; r < c; ++r) {
        const double* row = xd + static_cast<int64_t>(r) * m;
        double* out = y.data() + static_cast<int64_t>(r) * m;
        const double mu = K::ops().sum(m, row) / m;
        double var = 0.0;
        for (int j = 0; j < m; ++j) {
            const double d = row[j] - mu;
            out[j] = d;
            var += d * d;
        }
        const double inv = 1.0 / std::sqrt(var / m + eps);
        K::ops().scale(m, inv, out, out);
    }
    return make(std::move(y), {x}, [c, m, eps](const Var& self, const Var& g) {
        // dx = r * (g - mean(g) - xhat * mean(g*xhat)), rebuilt from primitive
        // ops so higher derivatives stay available.
        const Var& x0 = self->inputs[0];
        const auto& sh = x0->value.shape();
        auto bcast = [&](const Var& v) { return reshape(row_broadcast(v, m), sh); };
        Var mu = smul(row_sum(x0, c, m), 1.0 / m);
        Var xc = sub(x0, bcast(mu));
        Var var = smul(row_sum(square(xc), c, m), 1.0 / m);
        Var rinv = pow_(sadd(var, eps), -0.5);
        Var m1 = smul(row_sum(g, c, m), 1.0 / m);
        Var m2 = smul(row_sum(mul(g, self), c, m), 1.0 / m);
        Var dx = mul(bcast(rinv), sub(sub(g, bcast(m1)), mul(self, bcast(m2))));
        return std::vector<Var>{dx};
    });
}

Var row_affine(const Var& x, const Var& s, const Var& b) {
    if (x->value.ndim() < 1 || x->value.dim(0) <= 0)
        throw ShapeMismatch("row_affine: need a leading row dimension");
    const int c = x->value.dim(0);
    const int m = static_cast<int>(x->value.size() / c);
    if (s && static_cast<int>(s->value.size()) != c)
        throw ShapeMismatch("row_affine: scale length must match rows");
    if (b && static_cast<int>(b->value.size()) != c)
        throw ShapeMismatch("row_affine: bias length must match rows");
    Tensor y = Tensor::uninit(x->value.shape());
    const double* xd = x->value.data();
    for (int r = 0; r < c; ++r) {
        const double sc = s ? s->value[r] : 1.0;
        const double off = b ? b->value[r] : 0.0;
        const double* row = xd + static_cast<int64_t>(r) * m;
        double* out = y.data() + static_cast<int64_t>(r) * m;
        for (int j = 0; j < m; ++j) out[j] = row[j] * sc + off;
    }
    return make(std::move(y), {x, s, b}, [c, m](const Var& self, const Var& g) {
        const Var& x0 = self->inputs[0];
        const Var& s0 = self->inputs[1];
        const Var& b0 = self->inputs[2];
        const auto& sh = x0->value.shape();
        Var dx = s0 ? mul(g, reshape(row_broadcast(s0, m), sh)) : g;
        Var ds = s0 ? reshape(row_sum(mul(g, x0), c, m), s0->value.shape()) : Var{};
        Var db = b0 ? reshape(row_sum(g, c, m), b0->value.shape()) : Var{};
        return std::vector<Var>{dx, ds, db};
    });
}

Var sum_all(const Var& x) {
    Tensor y = Tensor::uninit({1});
    y[0] = K::ops().sum(x->value.size(), x->value.data());
    return make(std::move(y), {x}, [](const Var& self, const Var& g) {
        return std::vector<Var>{broadcast_full(g, self->inputs[0]->value.shape())};
    });
}

Var broadcast_full(const Var& s, std::vector<int> shape) {
    if (s->value.size() != 1) throw ShapeMismatch("broadcast_full: source must be scalar");
    Tensor y = Tensor::full(shape, s->value[0]);
    return make(std::move(y), {s}, [](const Var&, const Var& g) {
        return std::vector<Var>{sum_all(g)};
    });
}

Var reshape(const Var& x, std::vector<int> shape) {
    Tensor y = x->value.reshaped(std::move(shape));
    return make(std::move(y), {x}, [](const Var& self, const Var& g) {
        return std::vector<Var>{reshape(g, self->inputs[0]->value.shape())};
    });
}

Var square(const Var& x) { return mul(x, x); }

Var mean_all(const Var& x) {
    return smul(sum_all(x), 1.0 / static_cast<double>(x->value.size()));
}

Var dot(const Var& a, const Var& b) { return sum_all(mul(a, b)); }

Var mse(const Var& a, const Var& b) { return mean_all(square(sub(a, b))); }

GradMap backward(const Var& root) {
    if (root->value.size() != 1)
        throw ShapeMismatch("backward: root must be a scalar");
    // Topological order via iterative DFS over grad-requiring nodes.
    std::vector<Var> order;
    std::unordered_map<Node*, int> state;  // 0 unseen, 1 open, 2 done
    std::vector<std::pair<Var, size_t>> stack;
    if (root->requires_grad) stack.emplace_back(root, 0);
    while (!stack.empty()) {
        auto& [v, idx] = stack.back();
        if (idx == 0) {
            int& st = state[v.get()];
            if (st != 0) {
                stack.pop_back();
                continue;
            }
            st = 1;
        }
        if (idx < v->inputs.size()) {
            Var in = v->inputs[idx++];
            if (in && in->requires_grad && state[in.get()] == 0) stack.emplace_back(in, 0);
        } else {
            state[v.get()] = 2;
            order.push_back(v);
            stack.pop_back();
        }
    }
    GradMap grads;
    if (order.empty()) return grads;
    grads[root.get()] = constant(Tensor::ones({1}));
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const Var& v = *it;
        auto git = grads.find(v.get());
        if (git == grads.end() || !v->grad_fn) continue;
        std::vector<Var> igrads = v->grad_fn(v, git->second);
        for (size_t i = 0; i < igrads.size(); ++i) {
            const Var& in = v->inputs[i];
            if (!in || !in->requires_grad || !igrads[i]) continue;
            auto [pos, inserted] = grads.try_emplace(in.get(), igrads[i]);
            if (!inserted) pos->second = add(pos->second, igrads[i]);
        }
    }
    return grads;
}

}  // namespace lfs::ag
