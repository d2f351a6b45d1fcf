#include <doctest.h>

#include "fleetobs/matrix.hpp"
#include "fleetobs/rng.hpp"

using namespace fleetobs;

namespace {

Matrix random_matrix(RngStream& rng, std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            m(i, j) = rng.uniform() * 2.0 - 1.0;
    return m;
}

}  // namespace

TEST_CASE("kronecker of identities is the identity") {
    const Matrix k = kronecker(Matrix::identity(2), Matrix::identity(3));
    CHECK(max_abs_diff(k, Matrix::identity(6)) == 0.0);
}

TEST_CASE("kronecker with a 1x1 scales") {
    RngStream rng(42);
    const Matrix m = random_matrix(rng, 3, 4);
    const Matrix two{{2.0}};
    const Matrix k = kronecker(two, m);
    CHECK(max_abs_diff(k, m * 2.0) == 0.0);
}

TEST_CASE("kronecker entry of the consensus/model product") {
    // 4-cycle uniform consensus matrix (self + two ring neighbours)
    Matrix w(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        w(i, i) = w(i, (i + 1) % 4) = w(i, (i + 3) % 4) = 1.0 / 3.0;
    }
    const Matrix a{{1.0, 0.05}, {0.0, 1.0}};
    const Matrix k = kronecker(w, a);
    CHECK(k.rows() == 8);
    CHECK(k(0, 1) == doctest::Approx((1.0 / 3.0) * 0.05).epsilon(1e-15));
}

TEST_CASE("kronecker mixed-product property") {
    RngStream rng(43);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix a = random_matrix(rng, 3, 2);
        const Matrix b = random_matrix(rng, 2, 4);
        const Matrix c = random_matrix(rng, 2, 3);
        const Matrix d = random_matrix(rng, 4, 2);
        const Matrix lhs = kronecker(a, b) * kronecker(c, d);
        const Matrix rhs = kronecker(a * c, b * d);
        CHECK(max_abs_diff(lhs, rhs) < 1e-10);
    }
}

TEST_CASE("block_diag assembles shapes and entries") {
    const Matrix b1{{1.0, 2.0}, {3.0, 4.0}};
    const Matrix b2{{5.0}};
    const Matrix m = Matrix::block_diag({b1, b2});
    CHECK(m.rows() == 3);
    CHECK(m(0, 1) == 2.0);
    CHECK(m(2, 2) == 5.0);
    CHECK(m(2, 0) == 0.0);
}

TEST_CASE("matrix vector product and shape checks") {
    const Matrix m{{1.0, 2.0}, {3.0, 4.0}};
    const Vec x{1.0, 1.0};
    const Vec y = m * x;
    CHECK(y[0] == 3.0);
    CHECK(y[1] == 7.0);
    CHECK_THROWS(m * Vec{1.0});
    CHECK_THROWS(Matrix(2, 2) + Matrix(3, 3));
}
