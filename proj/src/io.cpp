#include "fleetobs/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace fleetobs {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + p.string());
    return out;
}

json certs_to_json(const Certificates& c) {
    json j;
    j["rho"] = c.rho;
    j["beta"] = c.beta;
    j["isolation_ratio"] = c.ratio;
    j["epsilon"] = c.epsilon;
    j["position_gain"] = c.position_gain;
    j["velocity_gain"] = c.velocity_gain;
    j["observability_rank"] = c.observability_rank;
    j["measurement_gain_c"] = c.measurement_gain_c;
    if (c.theta) j["theta"] = *c.theta;
    return j;
}

json metrics_json(const RunResult& rr) {
    const Metrics& m = rr.metrics;
    json j;
    j["scenario"] = rr.scenario_name;
    j["seed"] = rr.seed;
    j["horizon_steps"] = rr.horizon_steps;
    j["steady_window_begin"] = m.steady_window_begin;
    j["onset_step"] = m.onset_step;
    j["mse_per_cav"] = m.mse_per_cav;
    j["mse_avg"] = m.mse_avg;
    j["empirical_error_var_per_cav"] = m.empirical_error_var_per_cav;
    j["max_pairwise_disagreement_rms"] = m.max_pairwise_disagreement_rms;
    j["noise_floor_std"] = m.noise_floor_std;
    j["mann_kendall_z"] = m.mann_kendall_z;
    j["consensus_messages_per_step"] = m.consensus_messages_per_step;
    j["measurement_messages_per_step"] = m.measurement_messages_per_step;
    j["error_dynamics_defect"] = m.error_dynamics_defect;
    j["certificates"] = certs_to_json(rr.certs);
    j["alarm_stats"] = json::array();
    for (const auto& st : m.alarm_stats) {
        json a;
        a["mode"] = st.mode;
        a["window_steps"] = st.window_steps;
        if (st.decay_weight) a["decay_weight"] = *st.decay_weight;
        a["threshold"] = st.threshold;
        a["pre_onset_fraction"] = st.pre_onset_fraction;
        a["post_onset_fraction"] = st.post_onset_fraction;
        json delays = json::array();
        for (const auto& d : st.detection_delay_steps) {
            if (d) delays.push_back(*d);
            else delays.push_back(nullptr);
        }
        a["detection_delay_steps"] = delays;
        j["alarm_stats"].push_back(a);
    }
    return j;
}

}  // namespace

std::string metrics_to_json(const RunResult& rr) {
    return metrics_json(rr).dump(2);
}

void write_run_result(const std::filesystem::path& dir, const RunResult& rr,
                      OutputFormat format) {
    std::filesystem::create_directories(dir);

    {
        auto out = open_out(dir / "traces.csv");
        out << "step,time_s,cav_id,hdv_id,channel,truth,estimate,residual,"
               "stateless_alarm,stateful_alarm\n";
        // Per-step union alarm flags from the record list.
        // alarms are ordered by (step, detector, cav, channel).
        std::vector<std::vector<char>> stateless(rr.n_cavs),
            stateful(rr.n_cavs);
        for (std::size_t i = 0; i < rr.n_cavs; ++i) {
            stateless[i].assign(rr.horizon_steps + 1, 0);
            stateful[i].assign(rr.horizon_steps + 1, 0);
        }
        for (const auto& a : rr.alarms) {
            if (!a.alarm) continue;
            if (a.mode == "stateless")
                stateless[a.cav_id][a.step] = 1;
            else
                stateful[a.cav_id][a.step] = 1;
        }
        const std::size_t m = rr.coords;
        for (int k = 0; k <= rr.horizon_steps; ++k) {
            for (std::size_t i = 0; i < rr.n_cavs; ++i) {
                for (std::size_t hdv = 0; hdv < rr.n_hdvs; ++hdv) {
                    for (std::size_t c = 0; c < m; ++c) {
                        const std::size_t q = hdv * m + c;
                        out << k << ',' << fmt(k * rr.sampling_dt_s) << ','
                            << i << ',' << hdv << ',' << c << ','
                            << fmt(rr.truth[k][q]) << ','
                            << fmt(rr.estimates[k][i][q]) << ',';
                        // residual exists only on the CAV's own channels
                        bool own = false;
                        double res = 0.0;
                        if (!rr.residuals[k].empty() &&
                            rr.own_hdv[i] == static_cast<int>(hdv)) {
                            const auto& rvec = rr.residuals[k][i];
                            const auto& chans = rr.cav_channels[i];
                            for (std::size_t r = 0; r < chans.size(); ++r) {
                                if (chans[r] == static_cast<int>(c)) {
                                    own = true;
                                    res = rvec[r];
                                }
                            }
                        }
                        if (own) out << fmt(res);
                        out << ',' << int(stateless[i][k]) << ','
                            << int(stateful[i][k]) << '\n';
                    }
                }
            }
        }
    }

    {
        auto out = open_out(dir / "alarms.csv");
        out << "step,time_s,cav_id,channel,mode,window_steps,decay_weight,"
               "statistic,threshold,implied_far,hypothesis\n";
        for (const auto& a : rr.alarms) {
            out << a.step << ',' << fmt(a.step * rr.sampling_dt_s) << ','
                << a.cav_id << ',' << a.channel << ',' << a.mode << ','
                << a.window_steps << ',';
            if (a.decay_weight) out << fmt(*a.decay_weight);
            out << ',' << fmt(a.statistic) << ',' << fmt(a.threshold) << ','
                << fmt(a.implied_far) << ','
                << (a.alarm ? "H1" : "H0") << '\n';
        }
    }

    if (format == OutputFormat::json) {
        auto out = open_out(dir / "metrics.json");
        out << metrics_json(rr).dump(2) << '\n';
    } else {
        auto out = open_out(dir / "metrics.csv");
        out << "key,value\n";
        const json j = metrics_json(rr);
        for (const auto& [key, val] : j.items()) {
            if (val.is_primitive()) out << key << ',' << val.dump() << '\n';
        }
        for (std::size_t i = 0; i < rr.metrics.mse_per_cav.size(); ++i)
            out << "mse_cav" << i << ',' << fmt(rr.metrics.mse_per_cav[i])
                << '\n';
    }
    {
        auto out = open_out(dir / "certificates.json");
        out << certs_to_json(rr.certs).dump(2) << '\n';
    }
}

void write_comparison(const std::filesystem::path& dir,
                      const BaselineComparison& cmp, double sampling_dt_s) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "mse_comparison.csv");
        out << "step,time_s,observer,inner_loops,mse\n";
        for (std::size_t k = 0; k < cmp.proposed_mse.size(); ++k)
            out << k << ',' << fmt(k * sampling_dt_s) << ",proposed,1,"
                << fmt(cmp.proposed_mse[k]) << '\n';
        for (const auto& b : cmp.baselines)
            for (std::size_t k = 0; k < b.mse.size(); ++k)
                out << k << ',' << fmt(k * sampling_dt_s)
                    << ",inner_loop," << b.inner_loops << ','
                    << fmt(b.mse[k]) << '\n';
    }
    {
        json j;
        j["proposed"] = {
            {"consensus_messages_per_step", cmp.proposed_consensus_per_step},
            {"measurement_messages_per_step", cmp.proposed_measurement_per_step},
        };
        j["baselines"] = json::array();
        for (const auto& b : cmp.baselines) {
            j["baselines"].push_back(
                {{"inner_loops", b.inner_loops},
                 {"consensus_messages_per_step", b.consensus_per_step},
                 {"message_ratio", b.message_ratio}});
        }
        auto out = open_out(dir / "messages.json");
        out << j.dump(2) << '\n';
    }
}

void write_monte_carlo(const std::filesystem::path& dir,
                       const MonteCarloResult& mc, OutputFormat format) {
    std::filesystem::create_directories(dir);
    json j;
    j["trials"] = mc.trials;
    auto agg = [](const Aggregate& a) {
        return json{{"mean", a.mean},
                    {"half_ci95", a.half_ci95},
                    {"min", a.min},
                    {"max", a.max}};
    };
    j["mse"] = agg(mc.mse);
    for (const auto& [k, v] : mc.post_onset_alarm_fraction)
        j["post_onset_alarm_fraction"][k] = agg(v);
    for (const auto& [k, v] : mc.pre_onset_alarm_fraction)
        j["pre_onset_alarm_fraction"][k] = agg(v);
    for (const auto& [k, v] : mc.detection_delay)
        j["detection_delay_steps"][k] = agg(v);
    j["trial_seeds"] = mc.trial_seeds;

    if (format == OutputFormat::json) {
        auto out = open_out(dir / "montecarlo.json");
        out << j.dump(2) << '\n';
    } else {
        auto out = open_out(dir / "montecarlo.csv");
        out << "key,mean,half_ci95,min,max\n";
        out << "mse," << fmt(mc.mse.mean) << ',' << fmt(mc.mse.half_ci95)
            << ',' << fmt(mc.mse.min) << ',' << fmt(mc.mse.max) << '\n';
        for (const auto& [k, v] : mc.post_onset_alarm_fraction)
            out << "post_onset/" << k << ',' << fmt(v.mean) << ','
                << fmt(v.half_ci95) << ',' << fmt(v.min) << ',' << fmt(v.max)
                << '\n';
        auto out2 = open_out(dir / "montecarlo.json");
        out2 << j.dump(2) << '\n';
    }
}

void emit_plots(const std::filesystem::path& result_dir) {
    const auto traces = result_dir / "traces.csv";
    const auto alarms = result_dir / "alarms.csv";
    if (!std::filesystem::exists(traces))
        throw std::runtime_error("emit_plots: " + traces.string() + " not found");
    const auto plots = result_dir / "plots";
    std::filesystem::create_directories(plots);

    json manifest;
    manifest["figures"] = json::array();

    // Positions / velocities: pass traces through in long format, one file
    // per channel, series keyed by (hdv, "truth") and (hdv, cav).
    {
        std::ifstream in(traces);
        std::string line;
        std::getline(in, line);  // header
        std::ofstream pos(plots / "fig_positions.csv", std::ios::binary);
        std::ofstream vel(plots / "fig_velocities.csv", std::ios::binary);
        pos << "time_s,hdv_id,series,value\n";
        vel << "time_s,hdv_id,series,value\n";
        while (std::getline(in, line)) {
            std::istringstream ss(line);
            std::string f[10];
            for (int i = 0; i < 10 && std::getline(ss, f[i], ','); ++i) {
            }
            const std::string& time = f[1];
            const std::string& cav = f[2];
            const std::string& hdv = f[3];
            const std::string& channel = f[4];
            std::ofstream& out = channel == "0" ? pos : vel;
            if (channel != "0" && channel != "1") continue;
            if (cav == "0")
                out << time << ',' << hdv << ",truth," << f[5] << '\n';
            out << time << ',' << hdv << ",cav" << cav << ',' << f[6] << '\n';
        }
        manifest["figures"].push_back(
            {{"file", "fig_positions.csv"},
             {"title", "HDV positions: truth vs per-CAV estimates"},
             {"x", "time_s"},
             {"y", "value"},
             {"group_by", {"hdv_id", "series"}}});
        manifest["figures"].push_back(
            {{"file", "fig_velocities.csv"},
             {"title", "HDV velocities: truth vs per-CAV estimates"},
             {"x", "time_s"},
             {"y", "value"},
             {"group_by", {"hdv_id", "series"}}});
    }

    // Residuals and distance measures with thresholds, from alarms.csv.
    if (std::filesystem::exists(alarms)) {
        std::ifstream in(alarms);
        std::string line;
        std::getline(in, line);
        std::ofstream res(plots / "fig_residuals.csv", std::ios::binary);
        std::ofstream psi(plots / "fig_distance_measures.csv", std::ios::binary);
        res << "time_s,cav_id,channel,residual,threshold\n";
        psi << "time_s,cav_id,channel,mode,window_steps,decay_weight,"
               "statistic,threshold\n";
        while (std::getline(in, line)) {
            std::istringstream ss(line);
            std::string f[11];
            for (int i = 0; i < 11 && std::getline(ss, f[i], ','); ++i) {
            }
            if (f[4] == "stateless") {
                res << f[1] << ',' << f[2] << ',' << f[3] << ',' << f[7] << ','
                    << f[8] << '\n';
            } else {
                psi << f[1] << ',' << f[2] << ',' << f[3] << ',' << f[4] << ','
                    << f[5] << ',' << f[6] << ',' << f[7] << ',' << f[8]
                    << '\n';
            }
        }
        manifest["figures"].push_back(
            {{"file", "fig_residuals.csv"},
             {"title", "Stateless residuals and probabilistic threshold"},
             {"x", "time_s"},
             {"y", "residual"},
             {"group_by", {"cav_id", "channel"}},
             {"reference", "threshold"}});
        manifest["figures"].push_back(
            {{"file", "fig_distance_measures.csv"},
             {"title", "Stateful distance measures and chi-square thresholds"},
             {"x", "time_s"},
             {"y", "statistic"},
             {"group_by", {"cav_id", "channel", "mode", "window_steps",
                           "decay_weight"}},
             {"reference", "threshold"}});
    }

    const auto cmp = result_dir / "mse_comparison.csv";
    if (std::filesystem::exists(cmp)) {
        std::filesystem::copy_file(
            cmp, plots / "fig_mse_comparison.csv",
            std::filesystem::copy_options::overwrite_existing);
        manifest["figures"].push_back(
            {{"file", "fig_mse_comparison.csv"},
             {"title", "MSE: proposed single time-scale vs inner-loop baseline"},
             {"x", "time_s"},
             {"y", "mse"},
             {"group_by", {"observer", "inner_loops"}}});
    }

    std::ofstream mf(plots / "manifest.json", std::ios::binary);
    mf << manifest.dump(2) << '\n';
}

}  // namespace fleetobs
