#include <cmath>
#include <cstddef>

#include "rsaloc/kernels.hpp"

namespace rsaloc::kern {
namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double* x, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void matvec(const double* w, std::size_t rows, std::size_t cols,
            const double* x, const double* bias, double* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        double s = bias ? bias[r] : 0.0;
        const double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
        out[r] = s;
    }
}

void matvec_t(const double* w, std::size_t rows, std::size_t cols,
              const double* v, double* out) {
    for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        const double vr = v[r];
        for (std::size_t c = 0; c < cols; ++c) out[c] += vr * row[c];
    }
}

void ger(double* w, std::size_t rows, std::size_t cols, double alpha,
         const double* u, const double* v) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = w + r * cols;
        const double au = alpha * u[r];
        for (std::size_t c = 0; c < cols; ++c) row[c] += au * v[c];
    }
}

void relu(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad(const double* upstream, const double* pre, double* out,
               std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = pre[i] > 0.0 ? upstream[i] : 0.0;
}

void norm_affine(const double* x, double mu, double inv_sigma,
                 const double* gain, const double* bias, double* out,
                 std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = gain[i] * ((x[i] - mu) * inv_sigma) + bias[i];
}

void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double inv_bc1, double inv_bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] * inv_bc1;
        const double vhat = v[i] * inv_bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace scalar

const Ops& scalar_ops() {
    static const Ops table{
        scalar::dot,     scalar::sum,       scalar::axpy,
        scalar::scale,   scalar::matvec,    scalar::matvec_t,
        scalar::ger,     scalar::relu,      scalar::relu_grad,
        scalar::norm_affine, scalar::adam_update,
    };
    return table;
}

}  // namespace rsaloc::kern
