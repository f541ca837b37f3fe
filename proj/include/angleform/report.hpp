#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "angleform/builtin_scenarios.hpp"
#include "angleform/scenario_io.hpp"
#include "angleform/sim.hpp"

namespace angleform {

struct FollowerRateReport {
    int agent = 0;
    double follower_angle_deg = 0.0;
    double predicted_rate = 0.0;  // sin^2 of the follower angle
    RateEstimate fitted;
    double relative_error = 0.0;  // |fitted - predicted| / predicted, when fitted
};

/// Everything a completed run exposes to reports and plots.
struct RunOutput {
    Scenario scenario;
    TrajectoryRecord record;
    std::vector<FollowerRateReport> follower_rates;      // shape mode
    std::optional<PredictedLimit> predicted;             // shape mode
    std::optional<SimilarityTransform> realized;         // shape mode terminal fit
    std::optional<CollisionReport> collision;            // sequential activation
    std::vector<SegmentSummary> segments;                // maneuver mode
};

/// Runs a validated scenario and assembles the derived reports.
inline RunOutput run_scenario(const Scenario& s) {
    RunOutput out;
    out.scenario = s;
    if (s.mode.mode == Mode::Maneuver) {
        ManeuverResult mr = run_maneuver(s);
        out.record = std::move(mr.record);
        out.segments = std::move(mr.segments);
        return out;
    }

    if (s.activation == Activation::Sequential) {
        out.collision = check_collision_bound(s);
    }
    out.record = integrate(s);
    out.predicted = out.record.limit;
    out.realized = fit_similarity(out.record.positions.back(), s.p_star);

    const AngleConstraintSet acs = extract_angles(s.p_star, triangle_set(s.graph));
    for (int k = 3; k <= s.graph.n; ++k) {
        FollowerRateReport r;
        r.agent = k;
        const TriangleAngles& a = acs.angles_for_follower(k);
        r.follower_angle_deg = rad_to_deg(a.at_k);
        r.predicted_rate = follower_rate(a);
        try {
            r.fitted = estimate_rate(out.record.t, out.record.dist_to_limit[static_cast<size_t>(k) - 1]);
            r.fitted.label = "agent " + std::to_string(k);
            r.relative_error = std::abs(r.fitted.rate - r.predicted_rate) / r.predicted_rate;
        } catch (const InsufficientData&) {
            r.fitted.valid = false;
        }
        out.follower_rates.push_back(r);
    }
    return out;
}

namespace report_detail {

inline nlohmann::json vec_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

inline nlohmann::json rate_json(const RateEstimate& r) {
    nlohmann::json j;
    j["valid"] = r.valid;
    if (r.valid) {
        j["rate"] = r.rate;
        j["window"] = nlohmann::json::array({r.t_begin, r.t_end});
        j["samples"] = r.sample_count;
        j["r_squared"] = r.r_squared;
    }
    return j;
}

}  // namespace report_detail

/// Metrics document with a stable key layout per mode.
inline nlohmann::json metrics_json(const RunOutput& out) {
    using nlohmann::json;
    namespace rd = report_detail;
    const Scenario& s = out.scenario;
    const TrajectoryRecord& rec = out.record;

    json j;
    j["scenario"]["n"] = s.graph.n;
    j["scenario"]["mode"] = s.mode.mode == Mode::Shape ? "shape" : "maneuver";
    j["scenario"]["dt"] = s.dt;
    j["scenario"]["duration"] = s.duration;
    j["scenario"]["activation"] =
        s.activation == Activation::Sequential ? "sequential" : "simultaneous";

    json terminal;
    terminal["angle_error_rad"] = rec.angle_error_series.back();
    terminal["angle_error_deg"] = rad_to_deg(rec.angle_error_series.back());
    terminal["shape_distance"] = rec.shape_distance_series.back();
    terminal["min_neighbor_distance"] = rec.min_neighbor_distance.back();
    double worst = 0.0;
    for (const auto& series : rec.dist_to_limit) worst = std::max(worst, series.back());
    terminal["max_distance_to_limit"] = worst;
    j["terminal"] = terminal;

    if (out.predicted && out.realized) {
        const PredictedLimit& p = *out.predicted;
        const SimilarityTransform& r = *out.realized;
        j["limit"]["predicted"] = {{"c", p.c},
                                   {"theta_rad", p.theta},
                                   {"theta_deg", rad_to_deg(p.theta)},
                                   {"xi", rd::vec_json(p.xi)}};
        j["limit"]["realized"] = {{"c", r.c},
                                  {"theta_rad", r.theta},
                                  {"theta_deg", rad_to_deg(r.theta)},
                                  {"xi", rd::vec_json(r.xi)}};
        j["limit"]["relative_error"] = {
            {"c", std::abs(r.c - p.c) / p.c},
            {"theta", std::abs(wrap_pi(r.theta - p.theta))},
            {"xi", (r.xi - p.xi).norm() / std::max(p.xi.norm(), 1e-12)}};
    }

    if (!out.follower_rates.empty()) {
        json arr = json::array();
        for (const FollowerRateReport& f : out.follower_rates) {
            json e;
            e["agent"] = f.agent;
            e["follower_angle_deg"] = f.follower_angle_deg;
            e["predicted_rate"] = f.predicted_rate;
            e["fit"] = rd::rate_json(f.fitted);
            if (f.fitted.valid) e["relative_error"] = f.relative_error;
            arr.push_back(e);
        }
        j["followers"] = arr;
    }

    if (out.collision) {
        const CollisionReport& c = *out.collision;
        json arr = json::array();
        for (const FollowerCollisionEntry& e : c.followers) {
            arr.push_back({{"agent", e.agent},
                           {"bound", e.bound},
                           {"initial_offset", e.initial_offset},
                           {"precondition_met", e.precondition_met},
                           {"min_neighbor_distance", e.min_neighbor_distance},
                           {"activation_time", e.activation_time}});
        }
        j["collision"]["followers"] = arr;
        j["collision"]["overall_min_distance"] = c.overall_min_distance;
        j["collision"]["bound_respected"] = c.bound_respected;
    }

    if (!out.segments.empty()) {
        json arr = json::array();
        for (const SegmentSummary& seg : out.segments) {
            json e;
            e["index"] = seg.index;
            e["t_start"] = seg.t_start;
            e["t_end"] = seg.t_end;
            e["v_r"] = rd::vec_json(seg.ref.v_r);
            e["delta_12"] = rd::vec_json(seg.ref.delta_12);
            e["terminal_leader_edge_error"] = seg.terminal_e12_error;
            e["terminal_leader_edge_norm"] = seg.terminal_e12_norm;
            e["terminal_shape_distance"] = seg.terminal_shape_distance;
            e["terminal_velocity_error"] = seg.terminal_velocity_error;
            e["leader_edge_rate"] = rd::rate_json(seg.e12_rate);
            e["shape_rate"] = rd::rate_json(seg.shape_rate);
            e["velocity_rate"] = rd::rate_json(seg.velocity_rate);
            arr.push_back(e);
        }
        j["segments"] = arr;
    }
    return j;
}

/// One row per agent per sample: t,agent,x,y,ux,uy at nine significant digits.
inline void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec) {
    os << "t,agent,x,y,ux,uy\n";
    char buf[160];
    for (int i = 0; i < rec.samples(); ++i) {
        const Configuration& q = rec.positions[static_cast<size_t>(i)];
        const auto& u = rec.inputs[static_cast<size_t>(i)];
        for (int a = 1; a <= q.size(); ++a) {
            std::snprintf(buf, sizeof(buf), "%.9g,%d,%.9g,%.9g,%.9g,%.9g\n",
                          rec.t[static_cast<size_t>(i)], a, q.agent(a).x, q.agent(a).y,
                          u[static_cast<size_t>(a) - 1].x, u[static_cast<size_t>(a) - 1].y);
            os << buf;
        }
    }
}

}  // namespace angleform
