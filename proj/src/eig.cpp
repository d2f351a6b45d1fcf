#include "fleetobs/eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fleetobs/kernels.hpp"

namespace fleetobs {

Matrix hessenberg(Matrix a) {
    if (!a.square()) throw std::invalid_argument("hessenberg: square required");
    const std::size_t n = a.rows();
    if (n < 3) return a;
    std::vector<double> v(n), w(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        // Householder vector for column k, rows k+1..n-1.
        const std::size_t m = n - k - 1;
        double scale = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            scale = std::max(scale, std::abs(a(k + 1 + i, k)));
        if (scale == 0.0) continue;
        double ssq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            v[i] = a(k + 1 + i, k) / scale;
            ssq += v[i] * v[i];
        }
        double alpha = std::sqrt(ssq);
        if (v[0] > 0) alpha = -alpha;
        v[0] -= alpha;
        double vv = 0.0;
        for (std::size_t i = 0; i < m; ++i) vv += v[i] * v[i];
        if (vv == 0.0) continue;
        const double tau = 2.0 / vv;

        // Left update rows k+1..n-1: A <- (I - tau v v^T) A.
        std::fill(w.begin(), w.begin() + n, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            kernels::axpy(v[i], &a(k + 1 + i, 0), w.data(), n);
        for (std::size_t i = 0; i < m; ++i)
            kernels::axpy(-tau * v[i], w.data(), &a(k + 1 + i, 0), n);

        // Right update columns k+1..n-1: A <- A (I - tau v v^T).
        for (std::size_t r = 0; r < n; ++r) {
            double s = kernels::dot(&a(r, k + 1), v.data(), m);
            kernels::axpy(-tau * s, v.data(), &a(r, k + 1), m);
        }
        // Column k is now (alpha*scale, 0, ..., 0) below the diagonal.
        a(k + 1, k) = alpha * scale;
        for (std::size_t i = 2; i <= m; ++i) a(k + i, k) = 0.0;
    }
    return a;
}

namespace {

// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
// Classic hqr scheme (Wilkinson shifts, deflation from the bottom).
std::vector<std::complex<double>> hqr(Matrix& h) {
    const int n = static_cast<int>(h.rows());
    std::vector<std::complex<double>> eig(n);
    if (n == 0) return eig;

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j)
            anorm += std::abs(h(i, j));
    if (anorm == 0.0) anorm = 1.0;

    const double eps = std::numeric_limits<double>::epsilon();
    int nn = n - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        int l;
        for (;;) {
            // Look for a negligible subdiagonal element.
            for (l = nn; l >= 1; --l) {
                double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(h(l, l - 1)) <= eps * s) {
                    h(l, l - 1) = 0.0;
                    break;
                }
            }
            double x = h(nn, nn);
            if (l == nn) {  // one real eigenvalue
                eig[nn] = x + t;
                nn -= 1;
                break;
            }
            double y = h(nn - 1, nn - 1);
            double w = h(nn, nn - 1) * h(nn - 1, nn);
            if (l == nn - 1) {  // 2x2 block
                double p = 0.5 * (y - x);
                double q = p * p + w;
                double z = std::sqrt(std::abs(q));
                x += t;
                if (q >= 0.0) {  // real pair
                    z = p + (p >= 0.0 ? z : -z);
                    eig[nn - 1] = eig[nn] = x + z;
                    if (z != 0.0) eig[nn] = x - w / z;
                } else {  // complex pair
                    eig[nn - 1] = {x + p, z};
                    eig[nn] = {x + p, -z};
                }
                nn -= 2;
                break;
            }
            if (its == 30) throw std::runtime_error("eigenvalues: QR failed to converge");
            double p = 0, q = 0, z = 0, r = 0, s = 0;
            if (its == 10 || its == 20) {
                // exceptional shift
                t += x;
                for (int i = 0; i <= nn; ++i) h(i, i) -= x;
                s = std::abs(h(nn, nn - 1)) + std::abs(h(nn - 1, nn - 2));
                x = y = 0.75 * s;
                w = -0.4375 * s * s;
            }
            ++its;
            int m;
            for (m = nn - 2; m >= l; --m) {
                z = h(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / h(m + 1, m) + h(m, m + 1);
                q = h(m + 1, m + 1) - z - r - s;
                r = h(m + 2, m + 1);
                s = std::abs(p) + std::abs(q) + std::abs(r);
                p /= s;
                q /= s;
                r /= s;
                if (m == l) break;
                double u = std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r));
                double v = std::abs(p) * (std::abs(h(m - 1, m - 1)) +
                                          std::abs(z) + std::abs(h(m + 1, m + 1)));
                if (u <= eps * v) break;
            }
            for (int i = m + 2; i <= nn; ++i) {
                h(i, i - 2) = 0.0;
                if (i != m + 2) h(i, i - 3) = 0.0;
            }
            // Double QR step on rows/cols l..nn.
            for (int k = m; k <= nn - 1; ++k) {
                if (k != m) {
                    p = h(k, k - 1);
                    q = h(k + 1, k - 1);
                    r = (k != nn - 1) ? h(k + 2, k - 1) : 0.0;
                    x = std::abs(p) + std::abs(q) + std::abs(r);
                    if (x != 0.0) {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                s = std::sqrt(p * p + q * q + r * r);
                if (p < 0.0) s = -s;
                if (s == 0.0) continue;
                if (k == m) {
                    if (l != m) h(k, k - 1) = -h(k, k - 1);
                } else {
                    h(k, k - 1) = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;
                // Row modification.
                for (int j = k; j <= nn; ++j) {
                    p = h(k, j) + q * h(k + 1, j);
                    if (k != nn - 1) {
                        p += r * h(k + 2, j);
                        h(k + 2, j) -= p * z;
                    }
                    h(k + 1, j) -= p * y;
                    h(k, j) -= p * x;
                }
                // Column modification.
                const int mmin = std::min(nn, k + 3);
                for (int i = l; i <= mmin; ++i) {
                    p = x * h(i, k) + y * h(i, k + 1);
                    if (k != nn - 1) {
                        p += z * h(i, k + 2);
                        h(i, k + 2) -= p * r;
                    }
                    h(i, k + 1) -= p * q;
                    h(i, k) -= p;
                }
            }
        }
    }
    return eig;
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
    if (!a.square()) throw std::invalid_argument("eigenvalues: square required");
    Matrix h = hessenberg(a);
    return hqr(h);
}

double spectral_radius(const Matrix& a) {
    double r = 0.0;
    for (const auto& ev : eigenvalues(a)) r = std::max(r, std::abs(ev));
    return r;
}

double two_norm(const Matrix& a) {
    if (a.empty()) throw std::invalid_argument("two_norm: empty matrix");
    // Gram matrix A^T A; its eigenvalues are the squared singular values.
    Matrix g = a.transpose() * a;
    double lmax = 0.0;
    for (const auto& ev : eigenvalues(g)) lmax = std::max(lmax, ev.real());
    return std::sqrt(std::max(lmax, 0.0));
}

}  // namespace fleetobs
