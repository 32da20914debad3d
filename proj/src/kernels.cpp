#include "cylq/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define CYLQ_X86 1
#endif

namespace cylq::kernels {

namespace {

void cmul_acc_scalar(cplx* out, const cplx* d, const cplx* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += d[i] * x[i];
}

void caxpy_scalar(cplx* out, cplx alpha, const cplx* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += alpha * x[i];
}

double cnorm2sq_scalar(const cplx* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return acc;
}

cplx cdot_scalar(const cplx* x, const cplx* y, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

const Dispatch kScalar{cmul_acc_scalar, caxpy_scalar, cnorm2sq_scalar, cdot_scalar, "scalar"};

#ifdef CYLQ_X86

// Complex product of two interleaved (re,im) pairs per 256-bit lane:
// (ar*br - ai*bi, ar*bi + ai*br).
__attribute__((target("avx2,fma"))) inline __m256d cmul256(__m256d a, __m256d b) {
    __m256d b_re = _mm256_movedup_pd(b);                     // br br
    __m256d b_im = _mm256_permute_pd(b, 0xF);                // bi bi
    __m256d a_sw = _mm256_permute_pd(a, 0x5);                // ai ar
    return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

__attribute__((target("avx2,fma"))) void cmul_acc_avx2(cplx* out, const cplx* d, const cplx* x,
                                                       std::size_t n) {
    double* o = reinterpret_cast<double*>(out);
    const double* dd = reinterpret_cast<const double*>(d);
    const double* xx = reinterpret_cast<const double*>(x);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d a = _mm256_loadu_pd(dd + 2 * i);
        __m256d b = _mm256_loadu_pd(xx + 2 * i);
        __m256d acc = _mm256_loadu_pd(o + 2 * i);
        _mm256_storeu_pd(o + 2 * i, _mm256_add_pd(acc, cmul256(a, b)));
    }
    for (; i < n; ++i) out[i] += d[i] * x[i];
}

__attribute__((target("avx2,fma"))) void caxpy_avx2(cplx* out, cplx alpha, const cplx* x,
                                                    std::size_t n) {
    double* o = reinterpret_cast<double*>(out);
    const double* xx = reinterpret_cast<const double*>(x);
    __m256d a = _mm256_setr_pd(alpha.real(), alpha.imag(), alpha.real(), alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d b = _mm256_loadu_pd(xx + 2 * i);
        __m256d acc = _mm256_loadu_pd(o + 2 * i);
        _mm256_storeu_pd(o + 2 * i, _mm256_add_pd(acc, cmul256(b, a)));
    }
    for (; i < n; ++i) out[i] += alpha * x[i];
}

__attribute__((target("avx2,fma"))) double cnorm2sq_avx2(const cplx* x, std::size_t n) {
    const double* xx = reinterpret_cast<const double*>(x);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d v = _mm256_loadu_pd(xx + 2 * i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

__attribute__((target("avx2,fma"))) cplx cdot_avx2(const cplx* x, const cplx* y, std::size_t n) {
    const double* xx = reinterpret_cast<const double*>(x);
    const double* yy = reinterpret_cast<const double*>(y);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d a = _mm256_loadu_pd(xx + 2 * i);  // xr xi
        __m256d b = _mm256_loadu_pd(yy + 2 * i);  // yr yi
        acc_re = _mm256_fmadd_pd(a, b, acc_re);   // xr*yr, xi*yi
        __m256d b_sw = _mm256_permute_pd(b, 0x5);  // yi yr
        acc_im = _mm256_fmadd_pd(a, b_sw, acc_im);  // xr*yi, xi*yr
    }
    alignas(32) double re4[4], im4[4];
    _mm256_store_pd(re4, acc_re);
    _mm256_store_pd(im4, acc_im);
    double re = re4[0] + re4[1] + re4[2] + re4[3];
    double im = (im4[0] - im4[1]) + (im4[2] - im4[3]);
    for (; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

const Dispatch kAvx2{cmul_acc_avx2, caxpy_avx2, cnorm2sq_avx2, cdot_avx2, "avx2"};

bool cpu_has_avx2_fma() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#endif  // CYLQ_X86

}  // namespace

const Dispatch& scalar() { return kScalar; }

bool simd_available() {
#ifdef CYLQ_X86
    static const bool ok = cpu_has_avx2_fma();
    return ok;
#else
    return false;
#endif
}

const Dispatch& best_simd() {
#ifdef CYLQ_X86
    if (simd_available()) return kAvx2;
#endif
    return kScalar;
}

const Dispatch& active() {
    static const Dispatch& chosen = best_simd();
    return chosen;
}

}  // namespace cylq::kernels
