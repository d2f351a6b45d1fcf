#include "fleetobs/dynamics.hpp"

#include <algorithm>
#include <stdexcept>

namespace fleetobs {

Matrix ncv_block(double sampling_dt) {
    if (!(sampling_dt > 0.0))
        throw std::invalid_argument("ncv_block: sampling_dt must be > 0");
    return Matrix{{1.0, sampling_dt}, {0.0, 1.0}};
}

Matrix nca_block(double sampling_dt) {
    if (!(sampling_dt > 0.0))
        throw std::invalid_argument("nca_block: sampling_dt must be > 0");
    const double t = sampling_dt;
    return Matrix{{1.0, t, 0.5 * t * t}, {0.0, 1.0, t}, {0.0, 0.0, 1.0}};
}

std::size_t coords_per_hdv(ModelKind kind) {
    return kind == ModelKind::ncv ? 2u : 3u;
}

AssumedModel build_assumed_model(ModelKind kind, double sampling_dt,
                                 std::size_t hdv_count,
                                 const std::vector<double>& per_coord_var) {
    const std::size_t m = coords_per_hdv(kind);
    if (per_coord_var.size() != m)
        throw std::invalid_argument(
            "build_assumed_model: one process-noise variance per coordinate required");
    AssumedModel model;
    model.kind = kind;
    model.sampling_dt = sampling_dt;
    model.hdv_count = hdv_count;
    const Matrix blk =
        kind == ModelKind::ncv ? ncv_block(sampling_dt) : nca_block(sampling_dt);
    model.a = Matrix::block_diag(std::vector<Matrix>(hdv_count, blk));
    model.g = Matrix(hdv_count * m, hdv_count * m);
    for (std::size_t h = 0; h < hdv_count; ++h)
        for (std::size_t c = 0; c < m; ++c)
            model.g(h * m + c, h * m + c) = per_coord_var[c];
    return model;
}

double DesiredSpeedProfile::at(int step) const {
    if (pieces.empty())
        throw std::logic_error("desired speed profile is empty");
    double v = pieces.front().value_mps;
    for (const auto& p : pieces) {
        if (step >= p.from_step) v = p.value_mps;
        else break;
    }
    return v;
}

void step_free_flow(TruthState& state, const HdvModelParams& p,
                    const DesiredSpeedProfile& profile, int k,
                    double sampling_dt, RngStream& rng) {
    if (static_cast<int>(state.velocity.size()) <= k)
        throw std::invalid_argument("step_free_flow: history does not cover k");
    const double v = state.velocity[k];
    const double v_del = state.vel_delayed(k, p.reaction_delay_steps);
    const double sigma =
        p.free_flow_noise_var > 0.0 ? rng.gaussian(0.0, p.free_flow_noise_var) : 0.0;
    const double v_next =
        v + sampling_dt * p.follow_rate * (profile.at(k) - v_del) + sigma;
    state.velocity.push_back(v_next);
    state.position.push_back(state.position[k] + sampling_dt * v);
}

void step_car_following(TruthState& state, const TruthState& front,
                        const HdvModelParams& p, int k, double sampling_dt) {
    if (static_cast<int>(state.velocity.size()) <= k ||
        static_cast<int>(front.velocity.size()) <= k)
        throw std::invalid_argument("step_car_following: history does not cover k");
    const int tau = p.reaction_delay_steps;
    const double dv = front.vel_delayed(k, tau) - state.vel_delayed(k, tau);
    const double dx = front.pos_delayed(k, tau) - state.pos_delayed(k, tau);
    const double desired = p.headway_base_m +
                           p.headway_per_speed_s * state.vel_delayed(k, tau);
    const double v_next = state.velocity[k] +
                          sampling_dt * (p.a1 * dv + p.a2 * (dx - desired));
    state.velocity.push_back(v_next);
    state.position.push_back(state.position[k] + sampling_dt * state.velocity[k]);
}

Matrix selector_rows(const SensorSpec& spec, ModelKind kind,
                     std::size_t hdv_count) {
    const std::size_t m = coords_per_hdv(kind);
    Matrix c(spec.channels.size(), hdv_count * m);
    for (std::size_t r = 0; r < spec.channels.size(); ++r) {
        const auto coord = static_cast<std::size_t>(spec.channels[r]);
        if (coord >= m)
            throw std::invalid_argument("selector_rows: channel not in model");
        c(r, static_cast<std::size_t>(spec.hdv_id) * m + coord) = 1.0;
    }
    return c;
}

Vec measure(const SensorSpec& spec, const Matrix& c_rows, const Vec& x, int k,
            RngStream& rng) {
    if (c_rows.cols() != x.size())
        throw std::invalid_argument("measure: state dimension mismatch");
    Vec y = c_rows * x;
    for (double& v : y) v += rng.gaussian(0.0, spec.noise_var);
    if (spec.fault && spec.fault->active && k >= spec.fault->onset_step) {
        for (double& v : y)
            v += rng.gaussian(spec.fault->bias_mean, spec.fault->bias_var);
    }
    return y;
}

}  // namespace fleetobs
