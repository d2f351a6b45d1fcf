#include <doctest.h>

#include <vector>

#include "fleetobs/kernels.hpp"
#include "fleetobs/rng.hpp"

using namespace fleetobs;

namespace {

std::vector<double> random_vec(RngStream& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
    return v;
}

struct BackendGuard {
    kernels::Backend saved = kernels::active_backend();
    ~BackendGuard() { kernels::set_backend(saved); }
};

}  // namespace

TEST_CASE("scalar and dispatched kernels agree") {
    BackendGuard guard;
    RngStream rng(7101);
    const kernels::Backend best = kernels::detected_backend();

    for (std::size_t n : {0ul, 1ul, 3ul, 4ul, 7ul, 8ul, 13ul, 64ul, 1001ul}) {
        auto a = random_vec(rng, n);
        auto b = random_vec(rng, n);
        auto y0 = random_vec(rng, n);

        kernels::set_backend(kernels::Backend::scalar);
        const double dot_s = kernels::dot(a.data(), b.data(), n);
        const double ss_s = kernels::sum_sq(a.data(), n);
        auto y_s = y0;
        kernels::axpy(0.37, a.data(), y_s.data(), n);
        auto x_s = a;
        kernels::scal(-1.25, x_s.data(), n);

        kernels::set_backend(best);
        const double dot_v = kernels::dot(a.data(), b.data(), n);
        const double ss_v = kernels::sum_sq(a.data(), n);
        auto y_v = y0;
        kernels::axpy(0.37, a.data(), y_v.data(), n);
        auto x_v = a;
        kernels::scal(-1.25, x_v.data(), n);

        CHECK(dot_s == doctest::Approx(dot_v).epsilon(1e-13));
        CHECK(ss_s == doctest::Approx(ss_v).epsilon(1e-13));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(y_s[i] == doctest::Approx(y_v[i]).epsilon(1e-13));
            CHECK(x_s[i] == x_v[i]);
        }
    }
}

TEST_CASE("gemv and gemm match naive evaluation") {
    BackendGuard guard;
    RngStream rng(7102);
    const std::size_t r = 9, c = 13, q = 5;
    auto a = random_vec(rng, r * c);
    auto b = random_vec(rng, c * q);
    auto x = random_vec(rng, c);

    std::vector<double> y_naive(r, 0.0), c_naive(r * q, 0.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t k = 0; k < c; ++k) {
            y_naive[i] += a[i * c + k] * x[k];
            for (std::size_t j = 0; j < q; ++j)
                c_naive[i * q + j] += a[i * c + k] * b[k * q + j];
        }

    for (auto backend : {kernels::Backend::scalar, kernels::detected_backend()}) {
        kernels::set_backend(backend);
        std::vector<double> y(r, 0.0), cc(r * q, 0.0);
        kernels::gemv(a.data(), r, c, x.data(), y.data());
        kernels::gemm_acc(a.data(), r, c, b.data(), q, cc.data());
        for (std::size_t i = 0; i < r; ++i)
            CHECK(y[i] == doctest::Approx(y_naive[i]).epsilon(1e-12));
        for (std::size_t i = 0; i < r * q; ++i)
            CHECK(cc[i] == doctest::Approx(c_naive[i]).epsilon(1e-12));
    }
}

TEST_CASE("forcing an unsupported backend throws") {
    if (kernels::detected_backend() == kernels::Backend::scalar)
        CHECK_THROWS(kernels::set_backend(kernels::Backend::avx2));
    else
        CHECK(kernels::backend_name(kernels::detected_backend()) == "avx2");
}
