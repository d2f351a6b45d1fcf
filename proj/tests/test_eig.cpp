#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "fleetobs/eig.hpp"
#include "fleetobs/rng.hpp"

using namespace fleetobs;

namespace {

Matrix random_square(RngStream& rng, std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = rng.uniform() * 2.0 - 1.0;
    return m;
}

}  // namespace

TEST_CASE("spectral radius of simple matrices") {
    CHECK(spectral_radius(Matrix::identity(3)) == doctest::Approx(1.0));
    CHECK(spectral_radius(Matrix{{0.5, 0.0}, {0.0, -0.3}}) ==
          doctest::Approx(0.5));
    // upper-triangular: eigenvalues on the diagonal
    CHECK(spectral_radius(Matrix{{1.0, 0.05}, {0.0, 1.0}}) ==
          doctest::Approx(1.0));
}

TEST_CASE("two_norm of simple matrices") {
    CHECK(two_norm(Matrix::identity(4)) == doctest::Approx(1.0));
    CHECK(two_norm(Matrix{{3.0, 0.0}, {0.0, -4.0}}) == doctest::Approx(4.0));
    CHECK(two_norm(Matrix{{0.0, 1.0}, {0.0, 0.0}}) == doctest::Approx(1.0));
}

TEST_CASE("eigenvalues of a rotation-scale block are complex") {
    const double r = 0.9, th = 0.7;
    const Matrix m{{r * std::cos(th), -r * std::sin(th)},
                   {r * std::sin(th), r * std::cos(th)}};
    const auto ev = eigenvalues(m);
    REQUIRE(ev.size() == 2);
    CHECK(std::abs(ev[0]) == doctest::Approx(r).epsilon(1e-10));
    CHECK(std::abs(ev[0].imag()) == doctest::Approx(r * std::sin(th)).epsilon(1e-9));
    CHECK(spectral_radius(m) == doctest::Approx(r).epsilon(1e-10));
}

TEST_CASE("companion matrix recovers known roots") {
    // p(z) = (z-1)(z-2)(z-3) = z^3 - 6z^2 + 11z - 6
    const Matrix m{{6.0, -11.0, 6.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
    auto ev = eigenvalues(m);
    std::vector<double> roots;
    for (auto& e : ev) {
        CHECK(std::abs(e.imag()) < 1e-8);
        roots.push_back(e.real());
    }
    std::sort(roots.begin(), roots.end());
    CHECK(roots[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(roots[1] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(roots[2] == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("trace equals eigenvalue sum on random matrices") {
    RngStream rng(911);
    for (std::size_t n : {5ul, 12ul, 33ul}) {
        const Matrix m = random_square(rng, n);
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) tr += m(i, i);
        std::complex<double> sum = 0.0;
        for (const auto& e : eigenvalues(m)) sum += e;
        CHECK(sum.real() == doctest::Approx(tr).epsilon(1e-8));
        CHECK(std::abs(sum.imag()) < 1e-8);
    }
}

TEST_CASE("eigenvalues invariant under similarity") {
    RngStream rng(912);
    const std::size_t n = 8;
    const Matrix m = random_square(rng, n);
    // similarity by a well-conditioned random perturbation of I
    Matrix p = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            p(i, j) += 0.1 * (rng.uniform() - 0.5);
    // invert p by Gauss-Jordan (small test-only helper)
    Matrix inv = Matrix::identity(n);
    Matrix a = p;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r2 = col + 1; r2 < n; ++r2)
            if (std::abs(a(r2, col)) > std::abs(a(piv, col))) piv = r2;
        for (std::size_t c2 = 0; c2 < n; ++c2) {
            std::swap(a(col, c2), a(piv, c2));
            std::swap(inv(col, c2), inv(piv, c2));
        }
        const double d = a(col, col);
        for (std::size_t c2 = 0; c2 < n; ++c2) {
            a(col, c2) /= d;
            inv(col, c2) /= d;
        }
        for (std::size_t r2 = 0; r2 < n; ++r2) {
            if (r2 == col) continue;
            const double f = a(r2, col);
            for (std::size_t c2 = 0; c2 < n; ++c2) {
                a(r2, c2) -= f * a(col, c2);
                inv(r2, c2) -= f * inv(col, c2);
            }
        }
    }
    const Matrix sim = p * m * inv;
    auto e1 = eigenvalues(m);
    auto e2 = eigenvalues(sim);
    auto key = [](const std::complex<double>& z) {
        return std::make_pair(z.real(), z.imag());
    };
    std::sort(e1.begin(), e1.end(),
              [&](auto& a2, auto& b2) { return key(a2) < key(b2); });
    std::sort(e2.begin(), e2.end(),
              [&](auto& a2, auto& b2) { return key(a2) < key(b2); });
    for (std::size_t i = 0; i < e1.size(); ++i)
        CHECK(std::abs(e1[i] - e2[i]) < 1e-7);
}

TEST_CASE("spectral radius bounded by two_norm on 200 random matrices") {
    RngStream rng(913);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 9);
        const Matrix m = random_square(rng, n);
        CHECK(spectral_radius(m) <= two_norm(m) + 1e-9);
    }
}

TEST_CASE("hessenberg preserves eigenvalues and zeroes the lower part") {
    RngStream rng(914);
    const Matrix m = random_square(rng, 10);
    const Matrix h = hessenberg(m);
    for (std::size_t i = 2; i < 10; ++i)
        for (std::size_t j = 0; j + 1 < i; ++j) CHECK(h(i, j) == 0.0);
    double tr_m = 0.0, tr_h = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        tr_m += m(i, i);
        tr_h += h(i, i);
    }
    CHECK(tr_m == doctest::Approx(tr_h).epsilon(1e-10));
}
