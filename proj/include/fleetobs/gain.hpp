#pragma once

#include <string>
#include <vector>

#include "fleetobs/matrix.hpp"
#include "fleetobs/topology.hpp"

namespace fleetobs {

// Block-diagonal observer gain with its certificates. Blocks are diagonal
// within each CAV (one gain per state coordinate, supported on the
// coordinates measured inside that CAV's neighborhood).
struct GainDesign {
    std::vector<Matrix> k_blocks;  // n blocks, state_dim x state_dim
    double epsilon = 0.0;          // isolation scale the design was checked at
    double rho = 0.0;              // certified spectral radius of A_hat
    double beta = 0.0;             // certified ||A_hat||_2
    double ratio = 0.0;            // achieved max isolation ratio
    double position_gain = 0.0;
    double velocity_gain = 0.0;

    std::string to_json() const;
    static GainDesign from_json(const std::string& text);
};

// A_hat = W (x) A - K D_C (W (x) A), the closed-loop error matrix.
Matrix closed_loop(const Matrix& w, const Matrix& a,
                   const std::vector<Matrix>& k_blocks,
                   const std::vector<Matrix>& d_blocks);

// Max over i != j, j in N(i), channel pairs of
// |C_i K_i C_j^T| / |C_j K_j C_j^T - 1| (scalar per channel pair).
// Throws std::runtime_error when a denominator is within 1e-12 of zero.
double isolation_ratio(const std::vector<Matrix>& k_blocks,
                       const std::vector<Matrix>& c_rows,
                       const std::vector<std::vector<int>>& in_neighbors);

struct GainSearchGrid {
    std::vector<double> position_gains;
    std::vector<double> velocity_gains;
    bool refine = false;  // golden-section refinement per axis
};

// Structured search over diagonal gains: K_i = diag with position_gain on
// measured position coordinates and velocity_gain on measured velocity
// coordinates (coordinates measured within N(i)). Picks the candidate
// minimizing rho(A_hat) subject to isolation_ratio <= epsilon; ties go to
// the smaller gains. Checks distributed observability first and throws if
// it fails or if no candidate is Schur stable.
GainDesign synthesize_gain(const Matrix& w, const Matrix& a,
                           const std::vector<Matrix>& c_rows,
                           const std::vector<std::vector<int>>& in_neighbors,
                           double epsilon, const GainSearchGrid& grid);

// Covariance bound chain. All quantities follow the norm inequalities of
// the threshold design:
//   Q_bound = alpha1 * n * ||G||_2 + alpha2 * ||Rbar||_2
//   Theta   = Q_bound / (n * (1 - beta^2))
//   Phi     = c * Theta + R   (per measurement channel, with that channel's R)
struct BoundChain {
    double alpha1 = 0.0;     // ||I - K D_C||_2^2
    double alpha2 = 0.0;     // ||K||_2^2
    double g_norm = 0.0;     // ||G||_2
    double rbar_norm = 0.0;  // ||Rbar||_2
    double theta = 0.0;
    double c = 1.0;

    double phi(double measurement_noise_var) const {
        return c * theta + measurement_noise_var;
    }
};

// Throws std::runtime_error when design.beta >= 1 (bound undefined).
BoundChain bound_chain(const GainDesign& design, const Matrix& g,
                       const std::vector<double>& noise_var_per_cav,
                       const std::vector<Matrix>& c_rows,
                       const std::vector<std::vector<int>>& in_neighbors,
                       double n_cavs, double measurement_gain_c);

// Sample steady-state error variance per CAV: for each CAV the maximum
// per-coordinate variance of e_k^i over the window. Throws if the window
// has fewer than 50 samples. errors[k][i] is the error vector of CAV i at
// window sample k.
std::vector<double> empirical_error_cov(
    const std::vector<std::vector<Vec>>& errors);

}  // namespace fleetobs
