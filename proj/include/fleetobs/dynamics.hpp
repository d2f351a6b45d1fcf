#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fleetobs/matrix.hpp"
#include "fleetobs/rng.hpp"

namespace fleetobs {

// ---------------------------------------------------------------------------
// Assumed kinematic models (what the CAV observers use).

enum class ModelKind { ncv, nca };

// [[1, dt], [0, 1]]
Matrix ncv_block(double sampling_dt);

// 3x3 integrator chain: superdiagonal dt, corner dt^2/2.
Matrix nca_block(double sampling_dt);

std::size_t coords_per_hdv(ModelKind kind);  // 2 for NCV, 3 for NCA

struct AssumedModel {
    ModelKind kind = ModelKind::ncv;
    double sampling_dt = 0.0;
    std::size_t hdv_count = 0;
    Matrix a;  // block-diagonal, hdv_count identical blocks
    Matrix g;  // process-noise covariance, same shape as a

    std::size_t state_dim() const { return a.rows(); }
};

// per_coord_var holds one variance per model coordinate (position, velocity
// [, acceleration]); it is replicated across HDVs on the diagonal of G.
AssumedModel build_assumed_model(ModelKind kind, double sampling_dt,
                                 std::size_t hdv_count,
                                 const std::vector<double>& per_coord_var);

// ---------------------------------------------------------------------------
// Truth models (what the HDVs actually do).

struct HdvModelParams {
    double follow_rate = 0.2;        // free-flow approach coefficient
    int reaction_delay_steps = 10;   // tau, in steps
    double a1 = 0.4;                 // Helly velocity-difference gain
    double a2 = 0.1;                 // Helly spacing-error gain
    double headway_base_m = 10.0;    // b1
    double headway_per_speed_s = 0.5;  // b2
    double free_flow_noise_var = 0.0;  // sigma(k) variance
};

// Piecewise-constant desired speed v_d(k).
struct DesiredSpeedProfile {
    struct Piece {
        int from_step = 0;
        double value_mps = 0.0;
    };
    std::vector<Piece> pieces;  // sorted by from_step, first at 0

    double at(int step) const;
};

// Position/velocity history of one HDV; index k covers 0..steps-recorded.
// Delayed lookups clamp to step 0 (pre-horizon history holds the initial
// state constant).
struct TruthState {
    std::vector<double> position;
    std::vector<double> velocity;

    double pos_delayed(int k, int delay) const {
        return position[static_cast<std::size_t>(std::max(0, k - delay))];
    }
    double vel_delayed(int k, int delay) const {
        return velocity[static_cast<std::size_t>(std::max(0, k - delay))];
    }
};

// Free-flow velocity recursion (forward-Euler step of the follow law, plus
// the additive velocity noise) and explicit-Euler position integration.
// Appends entry k+1; requires history through k.
void step_free_flow(TruthState& state, const HdvModelParams& p,
                    const DesiredSpeedProfile& profile, int k,
                    double sampling_dt, RngStream& rng);

// Helly car-following step against the front vehicle's history.
void step_car_following(TruthState& state, const TruthState& front,
                        const HdvModelParams& p, int k, double sampling_dt);

// ---------------------------------------------------------------------------
// Sensors.

enum class Channel { position = 0, velocity = 1, acceleration = 2 };

struct FaultProfile {
    int onset_step = 0;
    double bias_mean = 0.0;
    double bias_var = 0.0;
    bool active = true;
};

struct SensorSpec {
    int cav_id = 0;
    int hdv_id = 0;
    std::vector<Channel> channels;  // one selector row per channel
    double noise_var = 0.0;
    std::optional<FaultProfile> fault;
};

// Selector rows C_i (l_i x state_dim) for a sensor under the given model.
Matrix selector_rows(const SensorSpec& spec, ModelKind kind,
                     std::size_t hdv_count);

// y = C_i x + noise (+ fault bias when active and k >= onset).
Vec measure(const SensorSpec& spec, const Matrix& c_rows, const Vec& x, int k,
            RngStream& rng);

}  // namespace fleetobs
