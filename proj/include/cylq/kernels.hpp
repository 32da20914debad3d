#pragma once

#include <complex>
#include <cstddef>
#include <string>

// Inner loops for shift-diagonal operator application and power iteration:
// contiguous complex multiply-accumulate and reductions. A scalar reference
// implementation always exists; an AVX2+FMA variant is selected at runtime
// when the CPU supports it. Both compute the same sums in the same order up
// to FMA contraction, and are equivalence-tested against each other.

namespace cylq::kernels {

using cplx = std::complex<double>;

struct Dispatch {
    // out[i] += d[i] * x[i]
    void (*cmul_acc)(cplx* out, const cplx* d, const cplx* x, std::size_t n);
    // out[i] += alpha * x[i]
    void (*caxpy)(cplx* out, cplx alpha, const cplx* x, std::size_t n);
    // sum_i |x[i]|^2
    double (*cnorm2sq)(const cplx* x, std::size_t n);
    // sum_i conj(x[i]) * y[i]
    cplx (*cdot)(const cplx* x, const cplx* y, std::size_t n);
    const char* name;
};

// Active implementation (runtime CPU probe, done once).
const Dispatch& active();
// Forced variants, for equivalence tests.
const Dispatch& scalar();
const Dispatch& best_simd();  // falls back to scalar when unsupported
bool simd_available();

inline void cmul_acc(cplx* out, const cplx* d, const cplx* x, std::size_t n) {
    active().cmul_acc(out, d, x, n);
}
inline void caxpy(cplx* out, cplx alpha, const cplx* x, std::size_t n) {
    active().caxpy(out, alpha, x, n);
}
inline double cnorm2sq(const cplx* x, std::size_t n) { return active().cnorm2sq(x, n); }
inline cplx cdot(const cplx* x, const cplx* y, std::size_t n) { return active().cdot(x, y, n); }

}  // namespace cylq::kernels
