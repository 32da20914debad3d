#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "cylq/kernels.hpp"
#include "cylq/util.hpp"

using namespace cylq;
namespace k = cylq::kernels;

namespace {

std::vector<cplx> random_vec(Rng& rng, size_t n) {
    std::vector<cplx> v(n);
    for (auto& z : v) z = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
    return v;
}

}  // namespace

TEST_CASE("scalar and simd kernels agree") {
    const auto& ref = k::scalar();
    const auto& simd = k::best_simd();
    INFO("active kernel: ", k::active().name);
    Rng rng(2024);
    for (size_t n : {size_t(0), size_t(1), size_t(2), size_t(3), size_t(17), size_t(256),
                     size_t(1001)}) {
        auto d = random_vec(rng, n);
        auto x = random_vec(rng, n);
        auto out_a = random_vec(rng, n);
        auto out_b = out_a;

        ref.cmul_acc(out_a.data(), d.data(), x.data(), n);
        simd.cmul_acc(out_b.data(), d.data(), x.data(), n);
        for (size_t i = 0; i < n; ++i) CHECK(std::abs(out_a[i] - out_b[i]) <= 1e-14);

        cplx alpha{0.3, -0.7};
        auto y_a = out_a, y_b = out_a;
        ref.caxpy(y_a.data(), alpha, x.data(), n);
        simd.caxpy(y_b.data(), alpha, x.data(), n);
        for (size_t i = 0; i < n; ++i) CHECK(std::abs(y_a[i] - y_b[i]) <= 1e-14);

        double na = ref.cnorm2sq(x.data(), n);
        double nb = simd.cnorm2sq(x.data(), n);
        CHECK(std::abs(na - nb) <= 1e-12 * (1.0 + na));

        cplx da = ref.cdot(d.data(), x.data(), n);
        cplx db = simd.cdot(d.data(), x.data(), n);
        CHECK(std::abs(da - db) <= 1e-12 * (1.0 + std::abs(da)));
    }
}

TEST_CASE("kernel reference values") {
    // cdot conjugates its first argument.
    cplx x[1] = {{0.0, 1.0}};
    cplx y[1] = {{0.0, 1.0}};
    CHECK(std::abs(k::scalar().cdot(x, y, 1) - cplx{1.0, 0.0}) <= 1e-15);
    cplx out[1] = {{1.0, 0.0}};
    cplx d[1] = {{0.0, 1.0}};
    k::scalar().cmul_acc(out, d, x, 1);  // 1 + i*i = 0
    CHECK(std::abs(out[0]) <= 1e-15);
}
