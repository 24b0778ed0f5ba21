#pragma once

#include <cstddef>
#include <string_view>

namespace rsaloc::kern {

/// Dense double-precision primitives used by the training and evaluation
/// inner loops. Each entry has a scalar reference implementation and, on
/// x86-64, an AVX2+FMA variant; the active table is chosen at runtime from
/// CPU capabilities and the two are equivalence-tested against each other.
struct Ops {
    /// sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// sum_i a[i]
    double (*sum)(const double* a, std::size_t n);
    /// y[i] += alpha * x[i]
    void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
    /// x[i] *= alpha
    void (*scale)(double* x, double alpha, std::size_t n);
    /// out = W x (+ bias); W is rows x cols, row-major; bias may be null
    void (*matvec)(const double* w, std::size_t rows, std::size_t cols,
                   const double* x, const double* bias, double* out);
    /// out = W^T v; out has length cols
    void (*matvec_t)(const double* w, std::size_t rows, std::size_t cols,
                     const double* v, double* out);
    /// W += alpha * u v^T (rank-one update)
    void (*ger)(double* w, std::size_t rows, std::size_t cols, double alpha,
                const double* u, const double* v);
    /// out[i] = max(x[i], 0)
    void (*relu)(const double* x, double* out, std::size_t n);
    /// out[i] = upstream[i] * (pre[i] > 0 ? 1 : 0)
    void (*relu_grad)(const double* upstream, const double* pre, double* out,
                      std::size_t n);
    /// out[i] = gain[i] * ((x[i] - mu) * inv_sigma) + bias[i]
    void (*norm_affine)(const double* x, double mu, double inv_sigma,
                        const double* gain, const double* bias, double* out,
                        std::size_t n);
    /// In-place Adam update of a parameter block. inv_bc1 / inv_bc2 are the
    /// reciprocal bias corrections 1/(1-beta1^t), 1/(1-beta2^t).
    void (*adam_update)(double* p, double* m, double* v, const double* g,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double inv_bc1, double inv_bc2);
};

enum class Backend { Scalar, Avx2 };

/// Active kernel table. Auto-selects the widest supported backend on first
/// use; later select_backend() calls override it.
const Ops& ops();

Backend active_backend();
bool backend_supported(Backend b);

/// Forces a specific backend. Throws ConfigError if unsupported here.
void select_backend(Backend b);

/// Reference implementations, always available (used by equivalence tests).
const Ops& scalar_ops();

std::string_view backend_name(Backend b);

}  // namespace rsaloc::kern
