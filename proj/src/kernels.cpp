#include "fleetobs/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace fleetobs::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double sum_sq_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return s;
}

#if defined(__x86_64__) || defined(_M_X64)
#define FLEETOBS_HAVE_AVX2_TU 1
// Implemented in kernels_avx2.cpp (compiled with -mavx2 -mfma).
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scal_avx2(double alpha, double* x, std::size_t n);
double sum_sq_avx2(const double* a, std::size_t n);
#else
#define FLEETOBS_HAVE_AVX2_TU 0
#endif

struct Dispatch {
    double (*dot)(const double*, const double*, std::size_t) = &dot_scalar;
    void (*axpy)(double, const double*, double*, std::size_t) = &axpy_scalar;
    void (*scal)(double, double*, std::size_t) = &scal_scalar;
    double (*sum_sq)(const double*, std::size_t) = &sum_sq_scalar;
    Backend backend = Backend::scalar;
};

bool host_has_avx2() {
#if FLEETOBS_HAVE_AVX2_TU
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Dispatch make_dispatch(Backend b) {
    Dispatch d;
    d.backend = b;
#if FLEETOBS_HAVE_AVX2_TU
    if (b == Backend::avx2) {
        d.dot = &dot_avx2;
        d.axpy = &axpy_avx2;
        d.scal = &scal_avx2;
        d.sum_sq = &sum_sq_avx2;
    }
#endif
    return d;
}

Backend initial_backend() {
    Backend b = host_has_avx2() ? Backend::avx2 : Backend::scalar;
    if (const char* env = std::getenv("FLEET_OBSERVER_KERNELS")) {
        std::string v(env);
        if (v == "scalar") b = Backend::scalar;
        else if (v == "avx2" && host_has_avx2()) b = Backend::avx2;
    }
    return b;
}

Dispatch& dispatch() {
    static Dispatch d = make_dispatch(initial_backend());
    return d;
}

}  // namespace detail

Backend active_backend() { return detail::dispatch().backend; }

Backend detected_backend() {
    return detail::host_has_avx2() ? Backend::avx2 : Backend::scalar;
}

void set_backend(Backend b) {
    if (b == Backend::avx2 && !detail::host_has_avx2())
        throw std::runtime_error("avx2 backend not supported on this host");
    detail::dispatch() = detail::make_dispatch(b);
}

std::string backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
    return detail::dispatch().dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    detail::dispatch().axpy(alpha, x, y, n);
}

void scal(double alpha, double* x, std::size_t n) {
    detail::dispatch().scal(alpha, x, n);
}

double sum_sq(const double* a, std::size_t n) {
    return detail::dispatch().sum_sq(a, n);
}

void gemv(const double* m, std::size_t rows, std::size_t cols,
          const double* x, double* y) {
    auto* f = detail::dispatch().dot;
    for (std::size_t i = 0; i < rows; ++i) y[i] = f(m + i * cols, x, cols);
}

void gemm_acc(const double* a, std::size_t ar, std::size_t ac,
              const double* b, std::size_t bc, double* c) {
    // saxpy form: C[i,:] += A[i,k] * B[k,:]; rows stay contiguous.
    auto* f = detail::dispatch().axpy;
    for (std::size_t i = 0; i < ar; ++i) {
        const double* arow = a + i * ac;
        double* crow = c + i * bc;
        for (std::size_t k = 0; k < ac; ++k) {
            if (arow[k] != 0.0) f(arow[k], b + k * bc, crow, bc);
        }
    }
}

}  // namespace fleetobs::kernels
