// Compiled with -mavx2 -mfma (see CMakeLists); only dispatched to when the
// CPU reports AVX2 support.
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <vector>

#include "lfs/kernels.hpp"

namespace lfs::kernels {

namespace {

// 4x8 register tile: 8 ymm accumulators, broadcast from A, two loads from B.
void gemm_nn_small(int m, int n, int k, const double* a, const double* b,
                   double* c, bool acc) {
    const int64_t lda = k, ldb = n, ldc = n;
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* a0 = a + (i + 0) * lda;
        const double* a1 = a + (i + 1) * lda;
        const double* a2 = a + (i + 2) * lda;
        const double* a3 = a + (i + 3) * lda;
        int j = 0;
        for (; j + 8 <= n; j += 8) {
            __m256d c00, c01, c10, c11, c20, c21, c30, c31;
            if (acc) {
                c00 = _mm256_loadu_pd(c + (i + 0) * ldc + j);
                c01 = _mm256_loadu_pd(c + (i + 0) * ldc + j + 4);
                c10 = _mm256_loadu_pd(c + (i + 1) * ldc + j);
                c11 = _mm256_loadu_pd(c + (i + 1) * ldc + j + 4);
                c20 = _mm256_loadu_pd(c + (i + 2) * ldc + j);
                c21 = _mm256_loadu_pd(c + (i + 2) * ldc + j + 4);
                c30 = _mm256_loadu_pd(c + (i + 3) * ldc + j);
                c31 = _mm256_loadu_pd(c + (i + 3) * ldc + j + 4);
            } else {
                c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_pd();
            }
            for (int p = 0; p < k; ++p) {
                const __m256d b0 = _mm256_loadu_pd(b + p * ldb + j);
                const __m256d b1 = _mm256_loadu_pd(b + p * ldb + j + 4);
                __m256d av = _mm256_set1_pd(a0[p]);
                c00 = _mm256_fmadd_pd(av, b0, c00);
                c01 = _mm256_fmadd_pd(av, b1, c01);
                av = _mm256_set1_pd(a1[p]);
                c10 = _mm256_fmadd_pd(av, b0, c10);
                c11 = _mm256_fmadd_pd(av, b1, c11);
                av = _mm256_set1_pd(a2[p]);
                c20 = _mm256_fmadd_pd(av, b0, c20);
                c21 = _mm256_fmadd_pd(av, b1, c21);
                av = _mm256_set1_pd(a3[p]);
                c30 = _mm256_fmadd_pd(av, b0, c30);
                c31 = _mm256_fmadd_pd(av, b1, c31);
            }
            _mm256_storeu_pd(c + (i + 0) * ldc + j, c00);
            _mm256_storeu_pd(c + (i + 0) * ldc + j + 4, c01);
            _mm256_storeu_pd(c + (i + 1) * ldc + j, c10);
            _mm256_storeu_pd(c + (i + 1) * ldc + j + 4, c11);
            _mm256_storeu_pd(c + (i + 2) * ldc + j, c20);
            _mm256_storeu_pd(c + (i + 2) * ldc + j + 4, c21);
            _mm256_storeu_pd(c + (i + 3) * ldc + j, c30);
            _mm256_storeu_pd(c + (i + 3) * ldc + j + 4, c31);
        }
        for (; j < n; ++j) {
            for (int r = 0; r < 4; ++r) {
                const double* ar = a + (i + r) * lda;
                double s = acc ? c[(i + r) * ldc + j] : 0.0;
                for (int p = 0; p < k; ++p) s += ar[p] * b[p * ldb + j];
                c[(i + r) * ldc + j] = s;
            }
        }
    }
    for (; i < m; ++i) {
        const double* ai = a + i * lda;
        for (int j = 0; j < n; ++j) {
            double s = acc ? c[i * ldc + j] : 0.0;
            for (int p = 0; p < k; ++p) s += ai[p] * b[p * ldb + j];
            c[i * ldc + j] = s;
        }
    }
}

// Packed-panel path for larger products. The naive kernel strides through B
// by 8*n bytes every k step, which turns into a cache-latency bound walk for
// the convolution-sized products; packing B into sequential 8-column panels
// keeps the microkernel streaming.
constexpr int kKc = 256;  // k block
constexpr int kNc = 512;  // n block (packed panel: kKc*kNc doubles = 1 MiB)
constexpr int kMr = 6, kNr = 8;

// C[6,8] tile += A(6 rows, kb) * packed B panel (kb x 8, contiguous).
inline void microkernel_6x8(int kb, const double* const a[kMr], const double* bp,
                            __m256d acc_[2 * kMr]) {
    __m256d c00 = acc_[0], c01 = acc_[1], c10 = acc_[2], c11 = acc_[3];
    __m256d c20 = acc_[4], c21 = acc_[5], c30 = acc_[6], c31 = acc_[7];
    __m256d c40 = acc_[8], c41 = acc_[9], c50 = acc_[10], c51 = acc_[11];
    const double *a0 = a[0], *a1 = a[1], *a2 = a[2], *a3 = a[3], *a4 = a[4], *a5 = a[5];
    for (int p = 0; p < kb; ++p) {
        const __m256d b0 = _mm256_load_pd(bp + p * kNr);
        const __m256d b1 = _mm256_load_pd(bp + p * kNr + 4);
        __m256d av = _mm256_set1_pd(a0[p]);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_set1_pd(a1[p]);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_set1_pd(a2[p]);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_set1_pd(a3[p]);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
        av = _mm256_set1_pd(a4[p]);
        c40 = _mm256_fmadd_pd(av, b0, c40);
        c41 = _mm256_fmadd_pd(av, b1, c41);
        av = _mm256_set1_pd(a5[p]);
        c50 = _mm256_fmadd_pd(av, b0, c50);
        c51 = _mm256_fmadd_pd(av, b1, c51);
    }
    acc_[0] = c00; acc_[1] = c01; acc_[2] = c10; acc_[3] = c11;
    acc_[4] = c20; acc_[5] = c21; acc_[6] = c30; acc_[7] = c31;
    acc_[8] = c40; acc_[9] = c41; acc_[10] = c50; acc_[11] = c51;
}

void gemm_nn_packed(int m, int n, int k, const double* a, const double* b,
                    double* c, bool acc) {
    thread_local std::vector<double> packed;
    packed.resize(static_cast<size_t>(kKc) * kNc + 4);
    double* pack = packed.data();
    // align to 32 bytes for _mm256_load_pd
    while (reinterpret_cast<uintptr_t>(pack) % 32 != 0) ++pack;

    for (int jc = 0; jc < n; jc += kNc) {
        const int nb = std::min(kNc, n - jc);
        for (int pc = 0; pc < k; pc += kKc) {
            const int kb = std::min(kKc, k - pc);
            const bool first = pc == 0 && !acc;
            // pack B(kb x nb) into kNr-wide, zero-padded panels
            for (int j = 0; j < nb; j += kNr) {
                const int jw = std::min(kNr, nb - j);
                double* dst = pack + static_cast<int64_t>(j) * kb;
                const double* src = b + static_cast<int64_t>(pc) * n + jc + j;
                for (int p = 0; p < kb; ++p) {
                    int q = 0;
                    for (; q < jw; ++q) dst[p * kNr + q] = src[static_cast<int64_t>(p) * n + q];
                    for (; q < kNr; ++q) dst[p * kNr + q] = 0.0;
                }
            }
            for (int i = 0; i < m; i += kMr) {
                const int ib = std::min(kMr, m - i);
                const double* arow[kMr];
                for (int r = 0; r < kMr; ++r)
                    arow[r] = a + static_cast<int64_t>(std::min(i + r, m - 1)) * k + pc;
                for (int j = 0; j < nb; j += kNr) {
                    const int jw = std::min(kNr, nb - j);
                    const double* bp = pack + static_cast<int64_t>(j) * kb;
                    __m256d tile[2 * kMr];
                    for (auto& t : tile) t = _mm256_setzero_pd();
                    microkernel_6x8(kb, arow, bp, tile);
                    if (ib == kMr && jw == kNr) {
                        for (int r = 0; r < kMr; ++r) {
                            double* crow = c + static_cast<int64_t>(i + r) * n + jc + j;
                            __m256d lo = tile[2 * r], hi = tile[2 * r + 1];
                            if (!first) {
                                lo = _mm256_add_pd(lo, _mm256_loadu_pd(crow));
                                hi = _mm256_add_pd(hi, _mm256_loadu_pd(crow + 4));
                            }
                            _mm256_storeu_pd(crow, lo);
                            _mm256_storeu_pd(crow + 4, hi);
                        }
                    } else {
                        alignas(32) double buf[kMr * kNr];
                        for (int r = 0; r < kMr; ++r) {
                            _mm256_store_pd(buf + r * kNr, tile[2 * r]);
                            _mm256_store_pd(buf + r * kNr + 4, tile[2 * r + 1]);
                        }
                        for (int r = 0; r < ib; ++r) {
                            double* crow = c + static_cast<int64_t>(i + r) * n + jc + j;
                            for (int q = 0; q < jw; ++q)
                                crow[q] = first ? buf[r * kNr + q] : crow[q] + buf[r * kNr + q];
                        }
                    }
                }
            }
        }
    }
}

void gemm_nn_avx2(int m, int n, int k, const double* a, const double* b,
                  double* c, bool acc) {
    if (static_cast<int64_t>(m) * n * k < (1 << 16) || n < kNr) {
        gemm_nn_small(m, n, k, a, b, c, acc);
        return;
    }
    gemm_nn_packed(m, n, k, a, b, c, acc);
}

void add_avx2(int64_t n, const double* a, const double* b, double* y) {
    int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) y[i] = a[i] + b[i];
}
void sub_avx2(int64_t n, const double* a, const double* b, double* y) {
    int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) y[i] = a[i] - b[i];
}
void mul_avx2(int64_t n, const double* a, const double* b, double* y) {
    int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) y[i] = a[i] * b[i];
}
void axpy_avx2(int64_t n, double alpha, const double* x, double* y) {
    const __m256d av = _mm256_set1_pd(alpha);
    int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}
void scale_avx2(int64_t n, double alpha, const double* x, double* y) {
    const __m256d av = _mm256_set1_pd(alpha);
    int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = alpha * x[i];
}
double dot_avx2(int64_t n, const double* a, const double* b) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
    }
    s0 = _mm256_add_pd(s0, s1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, s0);
    double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}
double sum_avx2(int64_t n, const double* a) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        s0 = _mm256_add_pd(s0, _mm256_loadu_pd(a + i));
        s1 = _mm256_add_pd(s1, _mm256_loadu_pd(a + i + 4));
    }
    s0 = _mm256_add_pd(s0, s1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, s0);
    double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) s += a[i];
    return s;
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops = {gemm_nn_avx2, add_avx2, sub_avx2, mul_avx2,
                            axpy_avx2,    scale_avx2, dot_avx2, sum_avx2};
    return ops;
}

}  // namespace lfs::kernels

#else

#include "lfs/kernels.hpp"

namespace lfs::kernels {
const Ops& avx2_ops() { return scalar_ops(); }
}  // namespace lfs::kernels

#endif
