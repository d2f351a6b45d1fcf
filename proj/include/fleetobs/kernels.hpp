#pragma once

#include <cstddef>
#include <string>

// Dense arithmetic kernels used by the matrix layer and the simulation
// inner loops. Every kernel has a scalar reference implementation and,
// on x86-64 hardware with AVX2/FMA, a vectorized variant. The backend is
// chosen once at startup (cpuid probe, overridable through the
// FLEET_OBSERVER_KERNELS environment variable or set_backend()).
//
// The scalar and SIMD paths are equivalence-tested against each other;
// they may differ by FMA rounding only.

namespace fleetobs::kernels {

enum class Backend {
    scalar,
    avx2,
};

// Backend currently in use.
Backend active_backend();

// Force a backend (tests use this to compare paths). Requesting avx2 on a
// machine without it throws std::runtime_error.
void set_backend(Backend b);

// Best backend the host supports.
Backend detected_backend();

std::string backend_name(Backend b);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x[i] *= alpha
void scal(double alpha, double* x, std::size_t n);

// sum_i a[i]^2
double sum_sq(const double* a, std::size_t n);

// y = M x with M row-major (rows x cols), y of length rows.
void gemv(const double* m, std::size_t rows, std::size_t cols,
          const double* x, double* y);

// C += A * B, all row-major: A is ar x ac, B is ac x bc, C is ar x bc.
void gemm_acc(const double* a, std::size_t ar, std::size_t ac,
              const double* b, std::size_t bc, double* c);

}  // namespace fleetobs::kernels
