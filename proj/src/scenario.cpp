#include "fleetobs/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fleetobs {

namespace {

using nlohmann::json;

Channel channel_from_string(const std::string& s) {
    if (s == "position") return Channel::position;
    if (s == "velocity") return Channel::velocity;
    if (s == "acceleration") return Channel::acceleration;
    throw std::invalid_argument("unknown channel '" + s + "'");
}

ConsensusRule rule_from_string(const std::string& s) {
    if (s == "uniform") return ConsensusRule::uniform;
    if (s == "metropolis_hastings") return ConsensusRule::metropolis_hastings;
    if (s == "given") return ConsensusRule::given;
    throw std::invalid_argument("unknown consensus rule '" + s + "'");
}

Scenario parse(const json& j, std::vector<ValidationError>& errs) {
    Scenario s;
    auto err = [&](const std::string& path, const std::string& msg) {
        errs.push_back({path, msg});
    };

    s.name = j.value("name", "unnamed");
    if (!j.contains("seed")) err("/seed", "missing required field 'seed'");
    else s.seed = j.at("seed").get<std::uint64_t>();
    s.horizon_steps = j.value("horizon_steps", 0);
    s.sampling_dt_s = j.value("sampling_dt_s", 0.0);

    if (j.contains("assumed_model")) {
        const auto& am = j.at("assumed_model");
        const std::string kind = am.value("kind", "ncv");
        if (kind == "ncv") s.model_kind = ModelKind::ncv;
        else if (kind == "nca") s.model_kind = ModelKind::nca;
        else err("/assumed_model/kind", "must be 'ncv' or 'nca'");
        const std::size_t m = coords_per_hdv(s.model_kind);
        s.model_noise_var.assign(m, 0.0);
        if (am.contains("process_noise_var")) {
            const auto& pn = am.at("process_noise_var");
            s.model_noise_var[0] = pn.value("position", 0.0);
            s.model_noise_var[1] = pn.value("velocity", 0.0);
            if (m > 2) s.model_noise_var[2] = pn.value("acceleration", 0.0);
        }
    } else {
        err("/assumed_model", "missing required object 'assumed_model'");
        s.model_noise_var.assign(2, 0.0);
    }

    const std::size_t m = coords_per_hdv(s.model_kind);
    s.truth_process_noise_var.assign(m, 0.0);
    if (j.contains("truth_process_noise_var")) {
        const auto& pn = j.at("truth_process_noise_var");
        s.truth_process_noise_var[0] = pn.value("position", 0.0);
        s.truth_process_noise_var[1] = pn.value("velocity", 0.0);
        if (m > 2) s.truth_process_noise_var[2] = pn.value("acceleration", 0.0);
    }

    if (j.contains("hdv_params")) {
        const auto& hp = j.at("hdv_params");
        s.hdv_params.follow_rate = hp.value("follow_rate_rho", 0.2);
        s.hdv_params.reaction_delay_steps = hp.value("reaction_delay_steps", 10);
        s.hdv_params.a1 = hp.value("a1", 0.4);
        s.hdv_params.a2 = hp.value("a2", 0.1);
        s.hdv_params.headway_base_m = hp.value("headway_base_m", 10.0);
        s.hdv_params.headway_per_speed_s = hp.value("headway_per_speed_s", 0.5);
        s.hdv_params.free_flow_noise_var = hp.value("free_flow_noise_var", 0.0);
    }

    for (std::size_t idx = 0; idx < j.value("hdvs", json::array()).size(); ++idx) {
        const auto& h = j.at("hdvs").at(idx);
        HdvSpec hs;
        hs.id = h.value("id", static_cast<int>(idx));
        const std::string model = h.value("model", "free_flow");
        if (model == "free_flow") hs.model = TruthModel::free_flow;
        else if (model == "car_following") hs.model = TruthModel::car_following;
        else err("/hdvs/" + std::to_string(idx) + "/model",
                 "must be 'free_flow' or 'car_following'");
        if (h.contains("front_hdv_id")) hs.front_hdv_id = h.at("front_hdv_id").get<int>();
        hs.initial_position_m = h.value("initial_position_m", 0.0);
        hs.initial_speed_mps = h.value("initial_speed_mps", 0.0);
        if (h.contains("desired_speed_profile_mps")) {
            for (const auto& p : h.at("desired_speed_profile_mps")) {
                hs.desired_speed.pieces.push_back(
                    {p.value("from_step", 0), p.value("value_mps", 0.0)});
            }
        } else if (hs.model == TruthModel::free_flow) {
            hs.desired_speed.pieces.push_back({0, hs.initial_speed_mps});
        }
        s.hdvs.push_back(std::move(hs));
    }

    for (std::size_t idx = 0; idx < j.value("cavs", json::array()).size(); ++idx) {
        const auto& c = j.at("cavs").at(idx);
        SensorSpec spec;
        spec.cav_id = c.value("id", static_cast<int>(idx));
        spec.hdv_id = c.value("measures_hdv_id", -1);
        for (const auto& ch : c.value("channels", json::array())) {
            try {
                spec.channels.push_back(channel_from_string(ch.get<std::string>()));
            } catch (const std::exception& e) {
                err("/cavs/" + std::to_string(idx) + "/channels", e.what());
            }
        }
        spec.noise_var = c.value("measurement_noise_var", 0.0);
        if (c.contains("fault")) {
            const auto& f = c.at("fault");
            FaultProfile fp;
            fp.onset_step = f.value("onset_step", 0);
            fp.bias_mean = f.value("bias_mean", 0.0);
            fp.bias_var = f.value("bias_var", 0.0);
            fp.active = f.value("active", true);
            spec.fault = fp;
        }
        s.sensors.push_back(std::move(spec));
    }

    if (j.contains("network")) {
        const auto& net = j.at("network");
        const std::string kind = net.value("kind", "explicit");
        if (kind == "explicit") {
            s.network.kind = NetworkSpec::Kind::explicit_adjacency;
            const std::size_t n = s.sensors.size();
            Matrix adj(n, n);
            for (std::size_t i = 0; i < n; ++i) adj(i, i) = 1.0;
            if (net.contains("out_neighbors")) {
                for (const auto& [key, outs] : net.at("out_neighbors").items()) {
                    const std::size_t v = std::stoul(key);
                    if (v >= n) {
                        err("/network/out_neighbors/" + key, "node id out of range");
                        continue;
                    }
                    for (const auto& t : outs) {
                        const std::size_t i = t.get<std::size_t>();
                        if (i >= n)
                            err("/network/out_neighbors/" + key,
                                "neighbor id out of range");
                        else adj(i, v) = 1.0;
                    }
                }
            } else {
                err("/network/out_neighbors", "missing adjacency list");
            }
            s.network.adjacency = std::move(adj);
        } else if (kind == "erdos_renyi") {
            s.network.kind = NetworkSpec::Kind::erdos_renyi;
            s.network.edge_prob = net.value("edge_prob", 0.15);
            s.network.require_strongly_connected =
                net.value("require_strongly_connected", true);
            s.network.max_attempts = net.value("max_attempts", 1000);
        } else {
            err("/network/kind", "must be 'explicit' or 'erdos_renyi'");
        }
    } else {
        err("/network", "missing required object 'network'");
    }

    try {
        s.consensus_rule = rule_from_string(j.value("consensus_rule", "uniform"));
    } catch (const std::exception& e) {
        err("/consensus_rule", e.what());
    }

    if (j.contains("gain")) {
        const auto& g = j.at("gain");
        s.gain_epsilon = g.value("epsilon", 0.5);
        s.gain_grid.position_gains =
            g.value("position_gain_grid", std::vector<double>{});
        s.gain_grid.velocity_gains =
            g.value("velocity_gain_grid", std::vector<double>{});
        s.gain_grid.refine = g.value("refine", false);
        s.fdi.measurement_gain_c = g.value("measurement_gain_c", 1.0);
    } else {
        err("/gain", "missing required object 'gain'");
    }

    if (j.contains("fdi")) {
        const auto& f = j.at("fdi");
        if (f.contains("stateless_detection_level_m"))
            s.fdi.stateless_detection_level_m =
                f.at("stateless_detection_level_m").get<double>();
        for (const auto& st : f.value("stateful", json::array())) {
            StatefulFdiSpec sp;
            sp.window_steps = st.value("window_steps", 15);
            sp.target_far = st.value("target_far", 0.05);
            if (st.contains("decay_weight"))
                sp.decay_weight = st.at("decay_weight").get<double>();
            s.fdi.stateful.push_back(sp);
        }
    }

    if (j.contains("metrics"))
        s.steady_window_fraction =
            j.at("metrics").value("steady_window_fraction", 0.4);

    return s;
}

}  // namespace

std::vector<ValidationError> validate_scenario(const Scenario& s) {
    std::vector<ValidationError> errs;
    auto err = [&](const std::string& path, const std::string& msg) {
        errs.push_back({path, msg});
    };

    if (s.horizon_steps <= 0) err("/horizon_steps", "must be > 0");
    if (!(s.sampling_dt_s > 0.0)) err("/sampling_dt_s", "must be > 0");
    if (s.hdvs.empty()) err("/hdvs", "at least one HDV required");
    if (s.sensors.empty()) err("/cavs", "at least one CAV required");
    if (!(s.steady_window_fraction > 0.0 && s.steady_window_fraction < 1.0))
        err("/metrics/steady_window_fraction", "must be in (0,1)");
    if (s.hdv_params.reaction_delay_steps < 0)
        err("/hdv_params/reaction_delay_steps", "must be >= 0");
    if (s.hdv_params.headway_base_m < 0.0) err("/hdv_params/headway_base_m", "must be >= 0");
    if (s.hdv_params.headway_per_speed_s < 0.0)
        err("/hdv_params/headway_per_speed_s", "must be >= 0");

    std::set<int> hdv_ids;
    for (std::size_t i = 0; i < s.hdvs.size(); ++i) {
        const auto& h = s.hdvs[i];
        const std::string base = "/hdvs/" + std::to_string(i);
        if (h.id != static_cast<int>(i))
            err(base + "/id", "ids must be 0..N-1 in order");
        hdv_ids.insert(h.id);
        if (h.model == TruthModel::car_following) {
            if (!h.front_hdv_id)
                err(base + "/front_hdv_id", "car_following HDV needs a front vehicle");
            else if (*h.front_hdv_id == h.id)
                err(base + "/front_hdv_id", "HDV cannot follow itself");
        } else if (h.desired_speed.pieces.empty()) {
            err(base + "/desired_speed_profile_mps",
                "free_flow HDV needs a desired speed profile");
        }
        if (h.model == TruthModel::free_flow &&
            !h.desired_speed.pieces.empty() &&
            h.desired_speed.pieces.front().from_step > 0)
            err(base + "/desired_speed_profile_mps", "profile must start at step 0");
    }
    for (std::size_t i = 0; i < s.hdvs.size(); ++i) {
        const auto& h = s.hdvs[i];
        if (h.front_hdv_id && !hdv_ids.count(*h.front_hdv_id))
            err("/hdvs/" + std::to_string(i) + "/front_hdv_id",
                "front HDV id " + std::to_string(*h.front_hdv_id) + " does not exist");
    }

    std::vector<char> measured(s.hdvs.size(), 0);
    for (std::size_t i = 0; i < s.sensors.size(); ++i) {
        const auto& c = s.sensors[i];
        const std::string base = "/cavs/" + std::to_string(i);
        if (c.cav_id != static_cast<int>(i))
            err(base + "/id", "ids must be 0..n-1 in order");
        if (!c.channels.empty()) {
            if (c.hdv_id < 0 || c.hdv_id >= static_cast<int>(s.hdvs.size()))
                err(base + "/measures_hdv_id", "referenced HDV does not exist");
            else measured[static_cast<std::size_t>(c.hdv_id)] = 1;
        }
        if (c.noise_var < 0.0) err(base + "/measurement_noise_var", "must be >= 0");
        const std::size_t m = coords_per_hdv(s.model_kind);
        for (Channel ch : c.channels)
            if (static_cast<std::size_t>(ch) >= m)
                err(base + "/channels", "channel not present in the assumed model");
        if (c.fault) {
            if (c.fault->onset_step < 0 || c.fault->onset_step >= s.horizon_steps)
                err(base + "/fault/onset_step", "onset must lie within the horizon");
            if (c.fault->bias_var < 0.0) err(base + "/fault/bias_var", "must be >= 0");
        }
    }
    for (std::size_t h = 0; h < measured.size(); ++h) {
        if (!measured[h])
            err("/hdvs/" + std::to_string(h),
                "HDV " + std::to_string(h) +
                    " is measured by no CAV; the distributed observability "
                    "necessary condition is violated");
    }

    if (s.network.kind == NetworkSpec::Kind::explicit_adjacency) {
        if (s.network.adjacency.rows() != s.sensors.size())
            err("/network/out_neighbors", "adjacency size must match CAV count");
    } else {
        if (!(s.network.edge_prob >= 0.0 && s.network.edge_prob <= 1.0))
            err("/network/edge_prob", "must be in [0,1]");
    }

    if (!(s.gain_epsilon > 0.0 && s.gain_epsilon < 1.0))
        err("/gain/epsilon", "must be in (0,1)");
    if (s.gain_grid.position_gains.empty())
        err("/gain/position_gain_grid", "must list at least one candidate");
    if (s.gain_grid.velocity_gains.empty())
        err("/gain/velocity_gain_grid", "must list at least one candidate");

    for (std::size_t i = 0; i < s.fdi.stateful.size(); ++i) {
        const auto& st = s.fdi.stateful[i];
        const std::string base = "/fdi/stateful/" + std::to_string(i);
        if (st.window_steps < 1) err(base + "/window_steps", "must be >= 1");
        if (static_cast<int>(st.window_steps) >= s.horizon_steps)
            err(base + "/window_steps", "must be shorter than the horizon");
        if (!(st.target_far > 0.0 && st.target_far < 1.0))
            err(base + "/target_far", "must be in (0,1)");
        if (st.decay_weight && !(*st.decay_weight > 0.0 && *st.decay_weight < 1.0))
            err(base + "/decay_weight", "must be in (0,1); omit for unweighted");
    }
    if (s.fdi.stateless_detection_level_m &&
        !(*s.fdi.stateless_detection_level_m > 0.0))
        err("/fdi/stateless_detection_level_m", "must be > 0");

    return errs;
}

ScenarioLoadResult load_scenario(const std::string& json_text) {
    ScenarioLoadResult out;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        out.errors.push_back({"/", std::string("JSON parse error: ") + e.what()});
        return out;
    }
    Scenario s;
    try {
        s = parse(j, out.errors);
    } catch (const std::exception& e) {
        out.errors.push_back({"/", std::string("invalid scenario: ") + e.what()});
        return out;
    }
    auto more = validate_scenario(s);
    out.errors.insert(out.errors.end(), more.begin(), more.end());
    if (out.errors.empty()) out.scenario = std::move(s);
    return out;
}

ScenarioLoadResult load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        ScenarioLoadResult out;
        out.errors.push_back({"/", "cannot open scenario file: " + path});
        return out;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

}  // namespace fleetobs
