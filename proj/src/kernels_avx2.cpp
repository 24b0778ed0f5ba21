// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; only reachable
// after the dispatcher has confirmed CPU support.

#include "rsaloc/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace rsaloc::kern {
namespace avx2 {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i];
    return s;
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double* x, double alpha, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

void matvec(const double* w, std::size_t rows, std::size_t cols,
            const double* x, const double* bias, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        double s = dot(w + r * cols, x, cols);
        if (bias) s += bias[r];
        out[r] = s;
    }
}

void matvec_t(const double* w, std::size_t rows, std::size_t cols,
              const double* v, double* out) {
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) _mm256_storeu_pd(out + c, _mm256_setzero_pd());
    for (; c < cols; ++c) out[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) axpy(out, v[r], w + r * cols, cols);
}

void ger(double* w, std::size_t rows, std::size_t cols, double alpha,
         const double* u, const double* v) {
    for (std::size_t r = 0; r < rows; ++r) axpy(w + r * cols, alpha * u[r], v, cols);
}

void relu(const double* x, double* out, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad(const double* upstream, const double* pre, double* out,
               std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(out + i, _mm256_and_pd(mask, _mm256_loadu_pd(upstream + i)));
    }
    for (; i < n; ++i) out[i] = pre[i] > 0.0 ? upstream[i] : 0.0;
}

void norm_affine(const double* x, double mu, double inv_sigma,
                 const double* gain, const double* bias, double* out,
                 std::size_t n) {
    const __m256d vmu = _mm256_set1_pd(mu);
    const __m256d vis = _mm256_set1_pd(inv_sigma);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xh =
            _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), vmu), vis);
        const __m256d r =
            _mm256_fmadd_pd(_mm256_loadu_pd(gain + i), xh, _mm256_loadu_pd(bias + i));
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i)
        out[i] = gain[i] * ((x[i] - mu) * inv_sigma) + bias[i];
}

void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double inv_bc1, double inv_bc2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vcb1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d vcb2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vibc1 = _mm256_set1_pd(inv_bc1);
    const __m256d vibc2 = _mm256_set1_pd(inv_bc2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        __m256d vm = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        vm = _mm256_fmadd_pd(vb1, vm, _mm256_mul_pd(vcb1, vg));
        vv = _mm256_fmadd_pd(vb2, vv, _mm256_mul_pd(vcb2, _mm256_mul_pd(vg, vg)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_mul_pd(vm, vibc1);
        const __m256d vhat = _mm256_mul_pd(vv, vibc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] * inv_bc1) / (std::sqrt(v[i] * inv_bc2) + eps);
    }
}

}  // namespace avx2

const Ops& avx2_ops() {
    static const Ops table{
        avx2::dot,     avx2::sum,       avx2::axpy,
        avx2::scale,   avx2::matvec,    avx2::matvec_t,
        avx2::ger,     avx2::relu,      avx2::relu_grad,
        avx2::norm_affine, avx2::adam_update,
    };
    return table;
}

}  // namespace rsaloc::kern

#endif  // x86
