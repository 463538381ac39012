#include "lfs/kernels.hpp"

#include <vector>

namespace lfs::kernels {

namespace {

void gemm_nn_scalar(int m, int n, int k, const double* a, const double* b,
                    double* c, bool acc) {
    for (int i = 0; i < m; ++i) {
        double* ci = c + static_cast<int64_t>(i) * n;
        if (!acc)
            for (int j = 0; j < n; ++j) ci[j] = 0.0;
        const double* ai = a + static_cast<int64_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            const double* bp = b + static_cast<int64_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
}

void add_scalar(int64_t n, const double* a, const double* b, double* y) {
    for (int64_t i = 0; i < n; ++i) y[i] = a[i] + b[i];
}
void sub_scalar(int64_t n, const double* a, const double* b, double* y) {
    for (int64_t i = 0; i < n; ++i) y[i] = a[i] - b[i];
}
void mul_scalar(int64_t n, const double* a, const double* b, double* y) {
    for (int64_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}
void axpy_scalar(int64_t n, double alpha, const double* x, double* y) {
    for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}
void scale_scalar(int64_t n, double alpha, const double* x, double* y) {
    for (int64_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}
double dot_scalar(int64_t n, const double* a, const double* b) {
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}
double sum_scalar(int64_t n, const double* a) {
    double s = 0.0;
    for (int64_t i = 0; i < n; ++i) s += a[i];
    return s;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {gemm_nn_scalar, add_scalar, sub_scalar, mul_scalar,
                            axpy_scalar,    scale_scalar, dot_scalar, sum_scalar};
    return ops;
}

void gemm_tn(int m, int n, int k, const double* a, const double* b, double* c, bool acc) {
    // a stored [k x m]
    std::vector<double> at(static_cast<size_t>(m) * k);
    for (int p = 0; p < k; ++p)
        for (int i = 0; i < m; ++i)
            at[static_cast<size_t>(i) * k + p] = a[static_cast<size_t>(p) * m + i];
    ops().gemm_nn(m, n, k, at.data(), b, c, acc);
}

void gemm_nt(int m, int n, int k, const double* a, const double* b, double* c, bool acc) {
    // b stored [n x k]
    std::vector<double> bt(static_cast<size_t>(k) * n);
    for (int j = 0; j < n; ++j)
        for (int p = 0; p < k; ++p)
            bt[static_cast<size_t>(p) * n + j] = b[static_cast<size_t>(j) * k + p];
    ops().gemm_nn(m, n, k, a, bt.data(), c, acc);
}

}  // namespace lfs::kernels
