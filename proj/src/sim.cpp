#include "fleetobs/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "fleetobs/kernels.hpp"

#include "fleetobs/fdi.hpp"
#include "fleetobs/specfun.hpp"

namespace fleetobs {

namespace {

std::string join_errors(const std::vector<ValidationError>& errs) {
    std::ostringstream ss;
    ss << "scenario validation failed:";
    for (const auto& e : errs) ss << "\n  " << e.path << ": " << e.message;
    return ss.str();
}

}  // namespace

ValidationFailure::ValidationFailure(std::vector<ValidationError> errs)
    : std::runtime_error(join_errors(errs)), errors(std::move(errs)) {}

std::uint64_t derive_trial_seed(std::uint64_t base_seed, std::uint64_t trial) {
    // splitmix64 mix of (seed, trial); matches RngStream::child.
    auto mix = [](std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    };
    return mix(base_seed ^ mix(trial + 1));
}

PreparedRun prepare_run(const Scenario& s) {
    auto errs = validate_scenario(s);
    if (!errs.empty()) throw ValidationFailure(std::move(errs));

    PreparedRun run;
    run.scenario = s;

    if (s.network.kind == NetworkSpec::Kind::explicit_adjacency) {
        run.net = make_network(s.network.adjacency, s.consensus_rule);
    } else {
        RngStream net_rng = RngStream::child(s.seed, 1);
        try {
            run.net = erdos_renyi(s.cav_count(), s.network.edge_prob, net_rng,
                                  s.network.require_strongly_connected,
                                  s.consensus_rule, s.network.max_attempts);
        } catch (const std::runtime_error& e) {
            throw CertificationFailure(e.what());
        }
    }

    run.model = build_assumed_model(s.model_kind, s.sampling_dt_s, s.hdv_count(),
                                    s.model_noise_var);
    run.c_rows.reserve(s.sensors.size());
    for (const auto& spec : s.sensors)
        run.c_rows.push_back(selector_rows(spec, s.model_kind, s.hdv_count()));
    run.so = build_shared_observation(run.c_rows, run.net.in_neighbors);

    const auto obs =
        check_distributed_observability(run.net.w, run.model.a, run.so.d_blocks);
    if (!obs.observable)
        throw CertificationFailure(
            "distributed observability fails: rank " + std::to_string(obs.rank) +
            " of " + std::to_string(obs.dim));

    try {
        run.gain = synthesize_gain(run.net.w, run.model.a, run.c_rows,
                                   run.net.in_neighbors, s.gain_epsilon,
                                   s.gain_grid);
    } catch (const std::runtime_error& e) {
        throw CertificationFailure(e.what());
    }
    run.a_hat = closed_loop(run.net.w, run.model.a, run.gain.k_blocks,
                            run.so.d_blocks);

    run.certs.rho = run.gain.rho;
    run.certs.beta = run.gain.beta;
    run.certs.ratio = run.gain.ratio;
    run.certs.epsilon = run.gain.epsilon;
    run.certs.position_gain = run.gain.position_gain;
    run.certs.velocity_gain = run.gain.velocity_gain;
    run.certs.measurement_gain_c = s.fdi.measurement_gain_c;
    run.certs.observability_rank = obs.rank;

    if (s.fdi.enabled()) {
        std::vector<double> noise_vars;
        noise_vars.reserve(s.sensors.size());
        for (const auto& spec : s.sensors) noise_vars.push_back(spec.noise_var);
        try {
            const BoundChain bc =
                bound_chain(run.gain, run.model.g, noise_vars, run.c_rows,
                            run.net.in_neighbors,
                            static_cast<double>(s.cav_count()),
                            s.fdi.measurement_gain_c);
            run.certs.theta = bc.theta;
        } catch (const std::runtime_error& e) {
            throw CertificationFailure(e.what());
        }
    }
    return run;
}

TruthRealization realize_truth(const PreparedRun& run, RngStream& rng) {
    const Scenario& s = run.scenario;
    const int h = s.horizon_steps;
    const std::size_t n_hdv = s.hdv_count();
    const std::size_t m = coords_per_hdv(s.model_kind);
    const double dt = s.sampling_dt_s;

    std::vector<TruthState> hdv_states(n_hdv);
    for (std::size_t i = 0; i < n_hdv; ++i) {
        hdv_states[i].position.reserve(h + 1);
        hdv_states[i].velocity.reserve(h + 1);
        hdv_states[i].position.push_back(s.hdvs[i].initial_position_m);
        hdv_states[i].velocity.push_back(s.hdvs[i].initial_speed_mps);
    }

    const bool pos_noise = s.truth_process_noise_var[0] > 0.0;
    const bool vel_noise = s.truth_process_noise_var[1] > 0.0;
    for (int k = 0; k < h; ++k) {
        for (std::size_t i = 0; i < n_hdv; ++i) {
            const auto& hs = s.hdvs[i];
            if (hs.model == TruthModel::free_flow) {
                step_free_flow(hdv_states[i], s.hdv_params, hs.desired_speed, k,
                               dt, rng);
            } else {
                step_car_following(hdv_states[i],
                                   hdv_states[static_cast<std::size_t>(
                                       *hs.front_hdv_id)],
                                   s.hdv_params, k, dt);
            }
        }
        if (pos_noise || vel_noise) {
            for (std::size_t i = 0; i < n_hdv; ++i) {
                if (pos_noise)
                    hdv_states[i].position[k + 1] +=
                        rng.gaussian(0.0, s.truth_process_noise_var[0]);
                if (vel_noise)
                    hdv_states[i].velocity[k + 1] +=
                        rng.gaussian(0.0, s.truth_process_noise_var[1]);
            }
        }
    }

    TruthRealization tr;
    tr.state.assign(h + 1, Vec(n_hdv * m, 0.0));
    for (int k = 0; k <= h; ++k) {
        for (std::size_t i = 0; i < n_hdv; ++i) {
            tr.state[k][i * m + 0] = hdv_states[i].position[k];
            tr.state[k][i * m + 1] = hdv_states[i].velocity[k];
            if (m > 2) {
                const double prev = k > 0 ? hdv_states[i].velocity[k - 1]
                                          : hdv_states[i].velocity[0];
                tr.state[k][i * m + 2] =
                    (hdv_states[i].velocity[k] - prev) / dt;
            }
        }
    }

    const std::size_t n = s.cav_count();
    tr.meas.assign(h + 1, {});
    tr.meas_noise.assign(h + 1, {});
    tr.fault.assign(h + 1, {});
    for (int k = 1; k <= h; ++k) {
        tr.meas[k].resize(n);
        tr.meas_noise[k].resize(n);
        tr.fault[k].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& spec = s.sensors[i];
            const Matrix& ci = run.c_rows[i];
            Vec y = ci * tr.state[k];
            Vec mu(y.size(), 0.0), f(y.size(), 0.0);
            for (std::size_t r = 0; r < y.size(); ++r)
                mu[r] = rng.gaussian(0.0, spec.noise_var);
            if (spec.fault && spec.fault->active && k >= spec.fault->onset_step) {
                for (std::size_t r = 0; r < y.size(); ++r)
                    f[r] = rng.gaussian(spec.fault->bias_mean, spec.fault->bias_var);
            }
            for (std::size_t r = 0; r < y.size(); ++r) y[r] += mu[r] + f[r];
            tr.meas[k][i] = std::move(y);
            tr.meas_noise[k][i] = std::move(mu);
            tr.fault[k][i] = std::move(f);
        }
    }

    tr.model_defect.assign(h + 1, Vec());
    for (int k = 1; k <= h; ++k) {
        Vec ax = run.model.a * tr.state[k - 1];
        Vec nu(ax.size());
        for (std::size_t q = 0; q < ax.size(); ++q)
            nu[q] = tr.state[k][q] - ax[q];
        tr.model_defect[k] = std::move(nu);
    }
    return tr;
}

namespace {

double mann_kendall_z_batches(const std::vector<double>& series,
                              std::size_t batches) {
    if (series.size() < batches * 2) return 0.0;
    std::vector<double> means(batches, 0.0);
    const std::size_t len = series.size() / batches;
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t t = 0; t < len; ++t) s += series[b * len + t];
        means[b] = s / static_cast<double>(len);
    }
    long s = 0;
    for (std::size_t i = 0; i < batches; ++i)
        for (std::size_t j = i + 1; j < batches; ++j) {
            if (means[j] > means[i]) ++s;
            else if (means[j] < means[i]) --s;
        }
    const double nb = static_cast<double>(batches);
    const double var = nb * (nb - 1.0) * (2.0 * nb + 5.0) / 18.0;
    double sc = static_cast<double>(s);
    if (sc > 0) sc -= 1.0;
    else if (sc < 0) sc += 1.0;
    return sc / std::sqrt(var);
}

struct DetectorSetup {
    std::string mode;
    std::size_t window_steps = 0;        // 0 = stateless
    std::optional<double> decay_weight;
    std::vector<double> threshold_per_cav;  // per-CAV thresholds (Phi varies with R_i)
};

}  // namespace

RunResult run_prepared(const PreparedRun& run, std::uint64_t seed) {
    const Scenario& s = run.scenario;
    const int h = s.horizon_steps;
    const std::size_t n = s.cav_count();
    const std::size_t state_dim = run.model.state_dim();

    RngStream rng = RngStream::child(seed, 2);
    const TruthRealization tr = realize_truth(run, rng);

    RunResult rr;
    rr.scenario_name = s.name;
    rr.seed = seed;
    rr.horizon_steps = h;
    rr.sampling_dt_s = s.sampling_dt_s;
    rr.n_cavs = n;
    rr.n_hdvs = s.hdv_count();
    rr.coords = coords_per_hdv(s.model_kind);
    rr.own_hdv.reserve(n);
    for (const auto& spec : s.sensors)
        rr.own_hdv.push_back(spec.channels.empty() ? -1 : spec.hdv_id);
    rr.cav_channels.reserve(n);
    for (const auto& spec : s.sensors) {
        std::vector<int> chans;
        for (Channel ch : spec.channels) chans.push_back(static_cast<int>(ch));
        rr.cav_channels.push_back(std::move(chans));
    }
    rr.certs = run.certs;
    rr.truth = tr.state;

    // Detector configurations.
    std::vector<DetectorSetup> detectors;
    if (s.fdi.stateless_detection_level_m) {
        DetectorSetup d;
        d.mode = "stateless";
        d.threshold_per_cav.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            d.threshold_per_cav[i] =
                stateless_threshold(*s.fdi.stateless_detection_level_m,
                                    rr.certs.phi(s.sensors[i].noise_var))
                    .threshold;
        detectors.push_back(std::move(d));
    }
    for (const auto& st : s.fdi.stateful) {
        DetectorSetup d;
        d.mode = st.decay_weight ? "stateful_weighted" : "stateful";
        d.window_steps = st.window_steps;
        d.decay_weight = st.decay_weight;
        const double thr =
            st.decay_weight
                ? weighted_stateful_threshold(st.target_far, st.window_steps,
                                              *st.decay_weight)
                : stateful_threshold(st.target_far, st.window_steps);
        d.threshold_per_cav.assign(n, thr);
        detectors.push_back(std::move(d));
    }

    // Sliding windows per detector x cav x channel.
    std::vector<std::vector<std::vector<ResidualWindow>>> windows(
        detectors.size());
    for (std::size_t d = 0; d < detectors.size(); ++d) {
        if (detectors[d].window_steps == 0) continue;
        windows[d].resize(n);
        for (std::size_t i = 0; i < n; ++i)
            windows[d][i].assign(run.c_rows[i].rows(),
                                 ResidualWindow(detectors[d].window_steps));
    }

    ObserverBank bank = ObserverBank::zeros(n, state_dim);
    rr.estimates.assign(h + 1, bank.estimates);
    rr.residuals.assign(h + 1, {});
    rr.residuals[0].resize(n);
    for (std::size_t i = 0; i < n; ++i)
        rr.residuals[0][i] = Vec(run.c_rows[i].rows(), 0.0);

    // per detector x cav: alarm flags per step (union over channels)
    std::vector<std::vector<std::vector<char>>> alarm_flags(
        detectors.size(),
        std::vector<std::vector<char>>(n, std::vector<char>(h + 1, 0)));

    for (int k = 1; k <= h; ++k) {
        const auto aprioris = predict(bank, run.net.w, run.model.a,
                                      run.net.in_neighbors);
        innovate(bank, aprioris, tr.meas[k], run.c_rows, run.gain.k_blocks,
                 run.net.in_neighbors);
        rr.estimates[k] = bank.estimates;
        rr.residuals[k].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            rr.residuals[k][i] =
                residual(bank.estimates[i], tr.meas[k][i], run.c_rows[i]);
        }

        for (std::size_t d = 0; d < detectors.size(); ++d) {
            auto& det = detectors[d];
            for (std::size_t i = 0; i < n; ++i) {
                const auto& res = rr.residuals[k][i];
                for (std::size_t ch = 0; ch < res.size(); ++ch) {
                    AlarmRecord rec;
                    rec.step = k;
                    rec.cav_id = static_cast<int>(i);
                    rec.channel = static_cast<int>(s.sensors[i].channels[ch]);
                    rec.mode = det.mode;
                    rec.window_steps = det.window_steps;
                    rec.decay_weight = det.decay_weight;
                    rec.threshold = det.threshold_per_cav[i];
                    if (det.window_steps == 0) {
                        rec.statistic = res[ch];
                        const double phi = rr.certs.phi(s.sensors[i].noise_var);
                        rec.implied_far =
                            phi > 0.0
                                ? 1.0 - erf(res[ch] / (std::sqrt(2.0) * phi))
                                : 0.0;
                        rec.alarm = stateless_detect(res[ch], rec.threshold) ==
                                    Hypothesis::fault_alarm;
                    } else {
                        auto& win = windows[d][i][ch];
                        win.push(res[ch]);
                        if (!win.full()) continue;
                        const double phi = rr.certs.phi(s.sensors[i].noise_var);
                        rec.statistic =
                            det.decay_weight
                                ? weighted_distance_measure(win.ordered(),
                                                            *det.decay_weight,
                                                            phi)
                                : distance_measure(win.ordered(), phi);
                        rec.implied_far = far_of_statistic(
                            rec.statistic, det.window_steps, det.decay_weight);
                        rec.alarm = stateful_detect(rec.statistic,
                                                    rec.threshold) ==
                                    Hypothesis::fault_alarm;
                    }
                    if (rec.alarm) alarm_flags[d][i][k] = 1;
                    rr.alarms.push_back(std::move(rec));
                }
            }
        }
    }

    // ---- metrics ----------------------------------------------------------
    Metrics& mm = rr.metrics;
    mm.consensus_messages_per_step = run.net.directed_edge_count();
    mm.measurement_messages_per_step = run.net.directed_edge_count();

    const int wbegin = static_cast<int>(
        std::ceil(static_cast<double>(h) * (1.0 - s.steady_window_fraction)));
    mm.steady_window_begin = wbegin;

    mm.mse_trace.assign(h + 1, 0.0);
    for (int k = 0; k <= h; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e2 = 0.0;
            for (std::size_t q = 0; q < state_dim; ++q) {
                const double d = tr.state[k][q] - rr.estimates[k][i][q];
                e2 += d * d;
            }
            acc += e2 / static_cast<double>(state_dim);
        }
        mm.mse_trace[k] = acc / static_cast<double>(n);
    }
    const MseMetrics mse = mse_metrics(rr.truth, rr.estimates, wbegin, h);
    mm.mse_per_cav = mse.per_cav;
    mm.mse_avg = mse.average;

    {
        std::vector<std::vector<Vec>> window_errors;
        window_errors.reserve(h - wbegin + 1);
        for (int k = wbegin; k <= h; ++k) {
            std::vector<Vec> row(n, Vec(state_dim));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t q = 0; q < state_dim; ++q)
                    row[i][q] = tr.state[k][q] - rr.estimates[k][i][q];
            window_errors.push_back(std::move(row));
        }
        if (window_errors.size() >= 50)
            mm.empirical_error_var_per_cav = empirical_error_cov(window_errors);

        double disag = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double acc = 0.0;
                for (const auto& row : window_errors)
                    for (std::size_t q = 0; q < state_dim; ++q) {
                        const double d = row[i][q] - row[j][q];
                        acc += d * d;
                    }
                acc /= static_cast<double>(window_errors.size() * state_dim);
                disag = std::max(disag, std::sqrt(acc));
            }
        mm.max_pairwise_disagreement_rms = disag;

        double floor_acc = 0.0;
        for (const auto& row : window_errors)
            for (std::size_t i = 0; i < n; ++i)
                floor_acc += kernels::sum_sq(row[i].data(), row[i].size());
        floor_acc /= static_cast<double>(window_errors.size() * n * state_dim);
        mm.noise_floor_std = std::sqrt(floor_acc);
    }

    {
        std::vector<double> steady(mm.mse_trace.begin() + wbegin,
                                   mm.mse_trace.end());
        mm.mann_kendall_z = mann_kendall_z_batches(steady, 10);
    }

    int onset = -1;
    for (const auto& spec : s.sensors)
        if (spec.fault && spec.fault->active)
            onset = onset < 0 ? spec.fault->onset_step
                              : std::min(onset, spec.fault->onset_step);
    mm.onset_step = onset;

    for (std::size_t d = 0; d < detectors.size(); ++d) {
        const auto& det = detectors[d];
        ModeAlarmStats st;
        st.mode = det.mode;
        st.window_steps = det.window_steps;
        st.decay_weight = det.decay_weight;
        st.threshold = det.threshold_per_cav.empty() ? 0.0
                                                     : det.threshold_per_cav[0];
        st.pre_onset_fraction.assign(n, 0.0);
        st.post_onset_fraction.assign(n, 0.0);
        st.detection_delay_steps.assign(n, std::nullopt);

        const int mode_start = det.window_steps == 0
                                   ? 1
                                   : static_cast<int>(det.window_steps);
        const int split = onset >= 0 ? onset : wbegin;
        const int post_start =
            det.window_steps == 0
                ? split
                : split + static_cast<int>(det.window_steps);
        for (std::size_t i = 0; i < n; ++i) {
            int pre_n = 0, pre_a = 0, post_n = 0, post_a = 0;
            for (int k = mode_start; k <= h; ++k) {
                const bool a = alarm_flags[d][i][k] != 0;
                if (k < split) {
                    ++pre_n;
                    pre_a += a;
                } else if (k >= post_start) {
                    ++post_n;
                    post_a += a;
                }
                if (onset >= 0 && k >= onset && a &&
                    !st.detection_delay_steps[i])
                    st.detection_delay_steps[i] = k - onset;
            }
            st.pre_onset_fraction[i] =
                pre_n ? static_cast<double>(pre_a) / pre_n : 0.0;
            st.post_onset_fraction[i] =
                post_n ? static_cast<double>(post_a) / post_n : 0.0;
        }
        mm.alarm_stats.push_back(std::move(st));
    }

    {
        std::vector<std::vector<Vec>> errors(h + 1, std::vector<Vec>(n));
        for (int k = 0; k <= h; ++k)
            for (std::size_t i = 0; i < n; ++i) {
                Vec e(state_dim);
                for (std::size_t q = 0; q < state_dim; ++q)
                    e[q] = tr.state[k][q] - rr.estimates[k][i][q];
                errors[k][i] = std::move(e);
            }
        ErrorDynamicsInputs in;
        in.errors = &errors;
        in.model_defect = &tr.model_defect;
        in.meas_noise = &tr.meas_noise;
        in.fault = &tr.fault;
        mm.error_dynamics_defect =
            error_dynamics_check(in, run.a_hat, run.gain.k_blocks, run.so);
    }

    return rr;
}

RunResult run_scenario(const Scenario& s) {
    const PreparedRun run = prepare_run(s);
    return run_prepared(run, s.seed);
}

MseMetrics mse_metrics(const std::vector<Vec>& truth,
                       const std::vector<std::vector<Vec>>& estimates,
                       int window_begin, int window_end) {
    if (window_end < window_begin)
        throw std::invalid_argument("mse_metrics: empty window");
    if (window_end >= static_cast<int>(truth.size()))
        throw std::invalid_argument("mse_metrics: window outside horizon");
    const std::size_t n = estimates.front().size();
    const std::size_t dim = truth.front().size();
    MseMetrics out;
    out.per_cav.assign(n, 0.0);
    for (int k = window_begin; k <= window_end; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            double e2 = 0.0;
            for (std::size_t q = 0; q < dim; ++q) {
                const double d = truth[k][q] - estimates[k][i][q];
                e2 += d * d;
            }
            out.per_cav[i] += e2 / static_cast<double>(dim);
        }
    }
    const double cnt = static_cast<double>(window_end - window_begin + 1);
    for (auto& v : out.per_cav) v /= cnt;
    for (double v : out.per_cav) out.average += v;
    out.average /= static_cast<double>(n);
    return out;
}

BaselineComparison compare_baseline(const Scenario& s,
                                    const std::vector<int>& inner_loop_counts) {
    const PreparedRun run = prepare_run(s);
    RngStream rng = RngStream::child(s.seed, 2);
    const TruthRealization tr = realize_truth(run, rng);
    const int h = s.horizon_steps;
    const std::size_t n = s.cav_count();
    const std::size_t state_dim = run.model.state_dim();

    auto mse_of = [&](const std::vector<Vec>& ests, int k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e2 = 0.0;
            for (std::size_t q = 0; q < state_dim; ++q) {
                const double d = tr.state[k][q] - ests[i][q];
                e2 += d * d;
            }
            acc += e2 / static_cast<double>(state_dim);
        }
        return acc / static_cast<double>(n);
    };

    BaselineComparison cmp;

    {
        ObserverBank bank = ObserverBank::zeros(n, state_dim);
        cmp.proposed_mse.assign(h + 1, 0.0);
        cmp.proposed_mse[0] = mse_of(bank.estimates, 0);
        for (int k = 1; k <= h; ++k) {
            const auto ap = predict(bank, run.net.w, run.model.a,
                                    run.net.in_neighbors);
            innovate(bank, ap, tr.meas[k], run.c_rows, run.gain.k_blocks,
                     run.net.in_neighbors);
            cmp.proposed_mse[k] = mse_of(bank.estimates, k);
        }
        cmp.proposed_consensus_per_step = bank.consensus_messages / h;
        cmp.proposed_measurement_per_step = bank.measurement_messages / h;
    }

    for (int L : inner_loop_counts) {
        ObserverBank bank = ObserverBank::zeros(n, state_dim);
        BaselineComparison::Entry entry;
        entry.inner_loops = L;
        entry.mse.assign(h + 1, 0.0);
        entry.mse[0] = mse_of(bank.estimates, 0);
        for (int k = 1; k <= h; ++k) {
            baseline_inner_loop_step(bank, run.net.w, run.model.a, tr.meas[k],
                                     run.c_rows, run.gain.k_blocks,
                                     run.net.in_neighbors, L);
            entry.mse[k] = mse_of(bank.estimates, k);
        }
        entry.consensus_per_step = bank.consensus_messages / h;
        entry.message_ratio =
            static_cast<double>(entry.consensus_per_step) /
            static_cast<double>(cmp.proposed_consensus_per_step);
        cmp.baselines.push_back(std::move(entry));
    }
    return cmp;
}

Aggregate aggregate(const std::vector<double>& xs) {
    Aggregate a;
    if (xs.empty()) return a;
    double s = 0.0;
    a.min = xs.front();
    a.max = xs.front();
    for (double x : xs) {
        s += x;
        a.min = std::min(a.min, x);
        a.max = std::max(a.max, x);
    }
    a.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double var = 0.0;
        for (double x : xs) var += (x - a.mean) * (x - a.mean);
        var /= static_cast<double>(xs.size() - 1);
        a.half_ci95 = 1.96 * std::sqrt(var / static_cast<double>(xs.size()));
    }
    return a;
}

MonteCarloResult monte_carlo(const Scenario& s, int trials) {
    if (trials < 1) throw std::invalid_argument("monte_carlo: trials must be >= 1");
    const PreparedRun run = prepare_run(s);

    MonteCarloResult mc;
    mc.trials = trials;
    mc.per_trial.resize(trials);
    mc.trial_seeds.resize(trials);
    for (int t = 0; t < trials; ++t)
        mc.trial_seeds[t] = derive_trial_seed(s.seed, static_cast<std::uint64_t>(t));

    unsigned max_threads = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("FLEET_OBSERVER_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) max_threads = static_cast<unsigned>(v);
    }
    max_threads = std::max(1u, std::min<unsigned>(max_threads, trials));

    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int t = next.fetch_add(1);
            if (t >= trials) break;
            mc.per_trial[t] = run_prepared(run, mc.trial_seeds[t]).metrics;
        }
    };
    for (unsigned w = 0; w < max_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::vector<double> mses;
    for (const auto& m : mc.per_trial) mses.push_back(m.mse_avg);
    mc.mse = aggregate(mses);

    if (!mc.per_trial.empty()) {
        const auto& first = mc.per_trial.front();
        for (std::size_t d = 0; d < first.alarm_stats.size(); ++d) {
            const auto& st0 = first.alarm_stats[d];
            std::ostringstream modekey;
            modekey << st0.mode;
            if (st0.window_steps) modekey << " T=" << st0.window_steps;
            if (st0.decay_weight) modekey << " l=" << *st0.decay_weight;
            for (std::size_t i = 0; i < st0.post_onset_fraction.size(); ++i) {
                std::vector<double> post, pre, delay;
                for (const auto& m : mc.per_trial) {
                    post.push_back(m.alarm_stats[d].post_onset_fraction[i]);
                    pre.push_back(m.alarm_stats[d].pre_onset_fraction[i]);
                    if (m.alarm_stats[d].detection_delay_steps[i])
                        delay.push_back(static_cast<double>(
                            *m.alarm_stats[d].detection_delay_steps[i]));
                }
                const std::string key =
                    modekey.str() + "/cav" + std::to_string(i);
                mc.post_onset_alarm_fraction[key] = aggregate(post);
                mc.pre_onset_alarm_fraction[key] = aggregate(pre);
                if (!delay.empty()) mc.detection_delay[key] = aggregate(delay);
            }
        }
    }
    return mc;
}

}  // namespace fleetobs
