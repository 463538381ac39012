#pragma once

#include <cstdint>

namespace lfs::kernels {

// Hot inner loops behind function pointers. A scalar reference build is
// always available; an AVX2/FMA build is selected at runtime when the CPU
// supports it. All variants must agree to rounding-order tolerance (the
// equivalence tests pin this down).
struct Ops {
    // Row-major C[MxN] = A[MxK] * B[KxN]; accumulates into C when acc is set.
    void (*gemm_nn)(int m, int n, int k, const double* a, const double* b,
                    double* c, bool acc);
    void (*add)(int64_t n, const double* a, const double* b, double* y);
    void (*sub)(int64_t n, const double* a, const double* b, double* y);
    void (*mul)(int64_t n, const double* a, const double* b, double* y);
    // y += alpha * x
    void (*axpy)(int64_t n, double alpha, const double* x, double* y);
    // y = alpha * x
    void (*scale)(int64_t n, double alpha, const double* x, double* y);
    double (*dot)(int64_t n, const double* a, const double* b);
    double (*sum)(int64_t n, const double* a);
};

const Ops& scalar_ops();
const Ops& avx2_ops();  // valid only if avx2_supported()

bool avx2_supported();

// The runtime-selected implementation ("avx2" or "scalar").
const Ops& ops();
const char* active_backend();

// C[MxN] = A^T * B with A stored [KxM]; and C[MxN] = A * B^T with B stored
// [NxK]. Implemented by transposing into scratch and calling gemm_nn; these
// run only on backward paths where shapes are small.
void gemm_tn(int m, int n, int k, const double* a, const double* b, double* c, bool acc);
void gemm_nt(int m, int n, int k, const double* a, const double* b, double* c, bool acc);

}  // namespace lfs::kernels
