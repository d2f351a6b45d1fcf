#pragma once

#include <cstddef>
#include <vector>

#include "fleetobs/gain.hpp"
#include "fleetobs/matrix.hpp"
#include "fleetobs/topology.hpp"

namespace fleetobs {

// Per-CAV state estimates plus the per-step message accounting. One
// simulation step is a synchronous round: predict() for everyone, then
// innovate() for everyone.
struct ObserverBank {
    std::vector<Vec> estimates;  // n vectors of length state_dim
    std::size_t consensus_messages = 0;
    std::size_t measurement_messages = 0;

    static ObserverBank zeros(std::size_t n, std::size_t state_dim);
};

// Prediction-consensus step: for each CAV, the weighted consensus of the
// neighbors' propagated a-posteriori estimates. Counts one estimate
// exchange per directed edge.
std::vector<Vec> predict(ObserverBank& bank, const Matrix& w, const Matrix& a,
                         const std::vector<std::vector<int>>& in_neighbors);

// Innovation update with the neighborhood's shared measurements. Counts one
// measurement exchange per directed edge and writes the a-posteriori
// estimates back into the bank.
void innovate(ObserverBank& bank, const std::vector<Vec>& aprioris,
              const std::vector<Vec>& measurements,
              const std::vector<Matrix>& c_rows,
              const std::vector<Matrix>& k_blocks,
              const std::vector<std::vector<int>>& in_neighbors);

// Per-channel absolute residual |y_i - C_i x_hat^i|.
Vec residual(const Vec& estimate, const Vec& own_measurement,
             const Matrix& c_i);

// Multi time-scale baseline step: local model propagation, innovation with
// the CAV's own measurement only, then inner_loops consensus averaging
// sweeps of the estimates over W. Message counters grow inner_loops-fold
// on the consensus side and not at all on the measurement side.
void baseline_inner_loop_step(ObserverBank& bank, const Matrix& w,
                              const Matrix& a,
                              const std::vector<Vec>& measurements,
                              const std::vector<Matrix>& c_rows,
                              const std::vector<Matrix>& k_blocks,
                              const std::vector<std::vector<int>>& in_neighbors,
                              int inner_loops);

// Inputs to the error-dynamics identity check, recorded during a run:
//   errors[k][i]      e_k^i = x_k - xhat_k^i   (k = 0..H, k=0 initial)
//   model_defect[k]   nu_{k-1} = x_k - A x_{k-1}  (k = 1..H)
//   meas_noise[k][i]  mu_{i,k} per channel         (k = 1..H)
//   fault[k][i]       f_{i,k} per channel          (k = 1..H)
struct ErrorDynamicsInputs {
    const std::vector<std::vector<Vec>>* errors = nullptr;
    const std::vector<Vec>* model_defect = nullptr;
    const std::vector<std::vector<Vec>>* meas_noise = nullptr;
    const std::vector<std::vector<Vec>>* fault = nullptr;
};

// Max over k of || e_k - A_hat e_{k-1} - eta_k ||_inf with
// eta_k = (I - K D_C)(1_n (x) nu_{k-1}) - K Dbar (mu_k + f_k).
// Faults are folded into eta exactly like measurement noise.
double error_dynamics_check(const ErrorDynamicsInputs& in, const Matrix& a_hat,
                            const std::vector<Matrix>& k_blocks,
                            const SharedObservation& so);

}  // namespace fleetobs
