#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fleetobs {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. All entries are expected finite;
// operations that cannot be performed (shape mismatch) throw
// std::invalid_argument.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t rows, std::size_t cols);
    // Block-diagonal assembly from equally or unequally shaped blocks.
    static Matrix block_diag(const std::vector<Matrix>& blocks);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) {
        return d_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        return d_[i * cols_ + j];
    }

    double* data() { return d_.data(); }
    const double* data() const { return d_.data(); }
    std::span<double> row(std::size_t i) { return {d_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const {
        return {d_.data() + i * cols_, cols_};
    }

    Matrix transpose() const;

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double s);

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b);
    friend Vec operator*(const Matrix& a, const Vec& x);

    bool same_shape(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

    double max_abs() const;
    double frobenius_norm() const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> d_;
};

// Standard Kronecker product, (ra*rb) x (ca*cb).
Matrix kronecker(const Matrix& a, const Matrix& b);

double max_abs_diff(const Matrix& a, const Matrix& b);

// Small vector helpers shared across modules.
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
double norm_inf(const Vec& v);
void axpy(double alpha, const Vec& x, Vec& y);

}  // namespace fleetobs
