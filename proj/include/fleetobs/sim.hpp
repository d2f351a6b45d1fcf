#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fleetobs/dynamics.hpp"
#include "fleetobs/gain.hpp"
#include "fleetobs/observer.hpp"
#include "fleetobs/scenario.hpp"
#include "fleetobs/topology.hpp"

namespace fleetobs {

// Scenario-level failures map onto CLI exit codes: validation -> 2,
// certification (observability / gain synthesis / bound chain) -> 3.
struct ValidationFailure : std::runtime_error {
    std::vector<ValidationError> errors;
    explicit ValidationFailure(std::vector<ValidationError> errs);
};

struct CertificationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Certificates {
    double rho = 0.0;
    double beta = 0.0;
    double ratio = 0.0;
    double epsilon = 0.0;
    double position_gain = 0.0;
    double velocity_gain = 0.0;
    std::optional<double> theta;  // absent when no FDI is configured
    double measurement_gain_c = 1.0;
    std::size_t observability_rank = 0;

    double phi(double noise_var) const {
        return measurement_gain_c * theta.value() + noise_var;
    }
};

// Everything derived from the scenario that does not depend on the noise
// realization: network, assumed model, selectors, gain and its certificates.
struct PreparedRun {
    Scenario scenario;
    CavNetwork net;
    AssumedModel model;
    std::vector<Matrix> c_rows;
    SharedObservation so;
    GainDesign gain;
    Matrix a_hat;
    Certificates certs;
};

// Validates, builds the network (sampling Erdos-Renyi graphs from a child
// stream of the seed), certifies observability, synthesizes the gain and,
// when FDI is configured, the bound chain. Throws ValidationFailure or
// CertificationFailure.
PreparedRun prepare_run(const Scenario& s);

// One noise realization of the truth and all measurements (shared by the
// proposed observer and the baselines so comparisons see identical data).
struct TruthRealization {
    std::vector<Vec> state;                    // k = 0..H, global state
    std::vector<std::vector<Vec>> meas;        // k = 1..H (index 0 empty)
    std::vector<std::vector<Vec>> meas_noise;  // recorded mu draws
    std::vector<std::vector<Vec>> fault;       // recorded fault draws
    std::vector<Vec> model_defect;             // nu_{k-1} = x_k - A x_{k-1}
};

TruthRealization realize_truth(const PreparedRun& run, RngStream& rng);

struct AlarmRecord {
    int step = 0;
    int cav_id = 0;
    int channel = 0;
    std::string mode;  // stateless | stateful | stateful_weighted
    std::size_t window_steps = 0;      // 0 for stateless
    std::optional<double> decay_weight;
    double statistic = 0.0;
    double threshold = 0.0;
    double implied_far = 0.0;
    bool alarm = false;
};

struct ModeAlarmStats {
    std::string mode;
    std::size_t window_steps = 0;
    std::optional<double> decay_weight;
    double threshold = 0.0;
    std::vector<double> pre_onset_fraction;   // per CAV
    std::vector<double> post_onset_fraction;  // per CAV
    std::vector<std::optional<int>> detection_delay_steps;  // per CAV
};

struct Metrics {
    std::vector<double> mse_per_cav;
    double mse_avg = 0.0;
    std::vector<double> mse_trace;  // CAV-averaged, per step
    std::vector<double> empirical_error_var_per_cav;
    double max_pairwise_disagreement_rms = 0.0;
    double noise_floor_std = 0.0;
    double mann_kendall_z = 0.0;
    std::size_t consensus_messages_per_step = 0;
    std::size_t measurement_messages_per_step = 0;
    double error_dynamics_defect = 0.0;
    std::vector<ModeAlarmStats> alarm_stats;
    int steady_window_begin = 0;
    int onset_step = -1;  // earliest active fault onset, -1 if none
};

struct RunResult {
    std::string scenario_name;
    std::uint64_t seed = 0;
    int horizon_steps = 0;
    double sampling_dt_s = 0.0;
    std::size_t n_cavs = 0;
    std::size_t n_hdvs = 0;
    std::size_t coords = 0;
    std::vector<int> own_hdv;  // per CAV, -1 when it has no sensor
    std::vector<std::vector<int>> cav_channels;  // coordinate per residual row
    Certificates certs;
    std::vector<Vec> truth;                   // global state per step
    std::vector<std::vector<Vec>> estimates;  // per step, per CAV
    std::vector<std::vector<Vec>> residuals;  // per step, per CAV, per channel
    std::vector<AlarmRecord> alarms;
    Metrics metrics;
};

RunResult run_scenario(const Scenario& s);
RunResult run_prepared(const PreparedRun& run, std::uint64_t seed);

// (1/|window|) sum_k ||xhat^i - x||^2 / state_dim, per CAV plus average.
struct MseMetrics {
    std::vector<double> per_cav;
    double average = 0.0;
};
MseMetrics mse_metrics(const std::vector<Vec>& truth,
                       const std::vector<std::vector<Vec>>& estimates,
                       int window_begin, int window_end /*inclusive*/);

// Multi time-scale comparison over identical measurement realizations.
struct BaselineComparison {
    std::vector<double> proposed_mse;  // per step
    std::size_t proposed_consensus_per_step = 0;
    std::size_t proposed_measurement_per_step = 0;
    struct Entry {
        int inner_loops = 0;
        std::vector<double> mse;
        std::size_t consensus_per_step = 0;
        double message_ratio = 0.0;  // baseline consensus / proposed consensus
    };
    std::vector<Entry> baselines;
};

BaselineComparison compare_baseline(const Scenario& s,
                                    const std::vector<int>& inner_loop_counts);

// Seeded Monte Carlo campaign; per-trial seeds derive from the scenario
// seed. Concurrency is capped by FLEET_OBSERVER_THREADS (default: hardware).
struct Aggregate {
    double mean = 0.0;
    double half_ci95 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct MonteCarloResult {
    int trials = 0;
    Aggregate mse;
    // keyed by "<mode>[ T=..][ l=..]/cav<i>" for post-onset alarm fractions
    std::map<std::string, Aggregate> post_onset_alarm_fraction;
    std::map<std::string, Aggregate> pre_onset_alarm_fraction;
    std::map<std::string, Aggregate> detection_delay;
    std::vector<Metrics> per_trial;
    std::vector<std::uint64_t> trial_seeds;
};

MonteCarloResult monte_carlo(const Scenario& s, int trials);

std::uint64_t derive_trial_seed(std::uint64_t base_seed, std::uint64_t trial);

// Aggregate helper (mean, 95% CI half-width, extremes).
Aggregate aggregate(const std::vector<double>& xs);

}  // namespace fleetobs
