#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "angleform/constraints.hpp"
#include "angleform/control.hpp"
#include "angleform/geometry.hpp"
#include "angleform/graph.hpp"

namespace angleform {

/// One piece of a piecewise-constant maneuver reference, active on
/// [t_start, t_end). Switching is right-continuous.
struct ScheduleSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    ManeuverReference ref;
};

enum class Activation { Simultaneous, Sequential };

/// Hard ceiling on the integration step; the gain-1 closed loop is unstable
/// under explicit stepping well before this, so larger steps are refused.
inline constexpr double kMaxStep = 0.05;

struct Scenario {
    Configuration p0;
    Configuration p_star;
    SensingGraph graph;
    ControlMode mode;
    std::vector<ScheduleSegment> schedule;  // empty in shape mode
    double dt = 0.01;
    double duration = 60.0;
    Activation activation = Activation::Simultaneous;
    double activation_epsilon = 1e-4;  // meters, sequential activation threshold
    std::optional<FrameOffsets> frame_offsets;
    std::uint64_t rng_seed = 0;  // carried for randomized studies; unused by integrate
};

namespace detail {
inline bool near_multiple(double value, double step) {
    const double r = std::round(value / step);
    return std::abs(value - r * step) <= 1e-9 * std::max(1.0, std::abs(value));
}
}  // namespace detail

/// Structural checks on a scenario. Returns an empty list when runnable.
inline std::vector<std::string> validate_scenario(const Scenario& s) {
    std::vector<std::string> out = validate_lff(s.graph);
    const int n = s.graph.n;
    if (s.p0.size() != n) out.push_back("initial configuration size differs from agent count");
    if (s.p_star.size() != n) out.push_back("target configuration size differs from agent count");
    if (s.p0.size() == n && n >= 2 &&
        (s.p0.agent(1) - s.p0.agent(2)).norm() <= kCoincidenceEps)
        out.push_back("agents 1 and 2 must not coincide initially");
    if (s.p_star.size() == n && !check_strong_nondegeneracy(s.p_star, s.graph))
        out.push_back("target configuration is not strongly nondegenerate");
    if (!(s.dt > 0.0)) out.push_back("dt must be positive");
    if (s.dt > kMaxStep) out.push_back("dt exceeds the stability guard of 0.05 s");
    if (!(s.duration > 0.0)) out.push_back("duration must be positive");
    if (s.dt > 0.0 && s.duration > 0.0 && !detail::near_multiple(s.duration, s.dt))
        out.push_back("duration must be a multiple of dt");

    if (s.mode.mode == Mode::Shape) {
        if (!s.schedule.empty()) out.push_back("shape mode requires an empty schedule");
    } else {
        if (s.schedule.empty()) out.push_back("maneuver mode requires a schedule");
        double expected_start = 0.0;
        for (size_t i = 0; i < s.schedule.size(); ++i) {
            const auto& seg = s.schedule[i];
            const std::string tag = "schedule segment " + std::to_string(i + 1);
            if (!(seg.t_start < seg.t_end)) out.push_back(tag + ": t_start must precede t_end");
            if (std::abs(seg.t_start - expected_start) > 1e-9)
                out.push_back(tag + ": segments must be contiguous from t = 0");
            if (s.dt > 0.0 &&
                (!detail::near_multiple(seg.t_start, s.dt) || !detail::near_multiple(seg.t_end, s.dt)))
                out.push_back(tag + ": switch times must be multiples of dt");
            if (seg.ref.delta_12.norm() <= kCoincidenceEps)
                out.push_back(tag + ": delta_12 must be nonzero");
            expected_start = seg.t_end;
        }
        if (!s.schedule.empty() && s.schedule.back().t_end < s.duration - 1e-9)
            out.push_back("schedule ends before the scenario duration");
        if (s.activation == Activation::Sequential)
            out.push_back("sequential activation is only supported in shape mode");
        if (s.frame_offsets)
            out.push_back("frame offsets are only supported in shape mode");
    }
    if (s.activation == Activation::Sequential && !(s.activation_epsilon > 0.0))
        out.push_back("sequential activation threshold must be positive");
    if (s.frame_offsets && static_cast<int>(s.frame_offsets->to_local.size()) != n)
        out.push_back("frame offset count differs from agent count");
    return out;
}

struct AngleErrorResult {
    double total = 0.0;      // radians, sum of wrapped absolute deviations
    bool degenerate = false; // true when some bearing was undefined
};

/// Sum over every stored triangle angle of |wrap(alpha - alpha*)|, the wrap
/// taken into (-pi, pi]. Coincident agents flag the sample instead of throwing.
inline AngleErrorResult angle_error(const Configuration& config, const AngleConstraintSet& acs) {
    AngleErrorResult r;
    for (const TriangleAngles& a : acs.angles) {
        TriangleAngles m;
        try {
            m = measure_triangle_angles(config, a.tri);
        } catch (const CoincidentPoints&) {
            r.degenerate = true;
            continue;
        }
        r.total += std::abs(wrap_pi(m.at_i - a.at_i));
        r.total += std::abs(wrap_pi(m.at_j - a.at_j));
        r.total += std::abs(wrap_pi(m.at_k - a.at_k));
    }
    return r;
}

struct TrajectoryRecord {
    std::vector<double> t;
    std::vector<Configuration> positions;        // [sample]
    std::vector<std::vector<Vec2>> inputs;       // [sample][agent-1]
    std::vector<double> angle_error_series;      // radians
    std::vector<double> shape_distance_series;   // to the target shape
    std::vector<std::vector<double>> dist_to_limit;  // [agent-1][sample]
    std::vector<double> min_neighbor_distance;   // over sensing edges
    std::vector<double> activation_time;         // [agent-1]; 0 when active from start
    std::optional<PredictedLimit> limit;         // shape mode only

    int samples() const { return static_cast<int>(t.size()); }
};

namespace detail {

inline const ScheduleSegment& active_segment(const std::vector<ScheduleSegment>& schedule,
                                             double time) {
    for (const auto& seg : schedule)
        if (time < seg.t_end - 1e-12) return seg;
    return schedule.back();  // hold the last reference at and beyond its end
}

/// Closed-loop derivative with the reference and activation set frozen for
/// the duration of one step.
struct StepContext {
    const Scenario* s = nullptr;
    const AngleConstraintSet* acs = nullptr;
    const ManeuverReference* ref = nullptr;  // null in shape mode
    const std::vector<char>* active = nullptr;

    std::vector<Vec2> operator()(const Configuration& q) const {
        const int n = q.size();
        std::vector<Vec2> u(static_cast<size_t>(n));
        for (int k = 1; k <= n; ++k) {
            if (!(*active)[static_cast<size_t>(k) - 1]) continue;
            Vec2 uk;
            if (ref) {
                uk = maneuver_control(k, q, *ref, *acs, s->mode.variant);
            } else if (s->frame_offsets && k >= 3) {
                // Measure in the agent's own frame, control there, rotate back.
                const Rot2& Q = s->frame_offsets->to_local[static_cast<size_t>(k) - 1];
                const TriangleConstraint& tc = acs->for_follower(k);
                const Vec2 e_ki = Q.apply(q.agent(tc.tri.i) - q.agent(k));
                const Vec2 e_kj = Q.apply(q.agent(tc.tri.j) - q.agent(k));
                uk = Q.apply_transposed(local_frame_control(k, e_ki, e_kj, *acs));
            } else {
                uk = shape_control(k, q, *acs);
            }
            u[static_cast<size_t>(k) - 1] = uk;
        }
        return u;
    }
};

inline Configuration advance(const Configuration& q, const std::vector<Vec2>& du, double h) {
    Configuration r = q;
    for (size_t i = 0; i < r.positions.size(); ++i) r.positions[i] += du[i] * h;
    return r;
}

/// Classical fourth-order step of the frozen-context closed loop.
inline Configuration rk4_step(const Configuration& q, const StepContext& f, double dt) {
    const auto k1 = f(q);
    const auto k2 = f(advance(q, k1, dt / 2.0));
    const auto k3 = f(advance(q, k2, dt / 2.0));
    const auto k4 = f(advance(q, k3, dt));
    Configuration r = q;
    for (size_t i = 0; i < r.positions.size(); ++i)
        r.positions[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
    return r;
}

inline double min_sensing_distance(const Configuration& q, const SensingGraph& g) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 2; k <= g.n; ++k)
        for (int j : g.neighbors(k))
            m = std::min(m, (q.agent(k) - q.agent(j)).norm());
    return m;
}

}  // namespace detail

/// Fixed-step integration of the closed loop. Deterministic: identical
/// scenarios produce bit-identical records. References and the sequential
/// activation set change only at sample boundaries, so each step integrates a
/// time-invariant system.
inline TrajectoryRecord integrate(const Scenario& s) {
    if (s.dt > kMaxStep)
        throw StepTooLarge("dt = " + std::to_string(s.dt) + " exceeds 0.05 s");
    if (auto diags = validate_scenario(s); !diags.empty()) {
        std::string msg = "invalid scenario:";
        for (const auto& d : diags) msg += "\n  - " + d;
        throw InvalidScenario(msg);
    }

    const int n = s.graph.n;
    const TriangleSet ts = triangle_set(s.graph);
    const AngleConstraintSet acs = extract_angles(s.p_star, ts);
    const bool maneuver = s.mode.mode == Mode::Maneuver;
    const int steps = static_cast<int>(std::llround(s.duration / s.dt));

    TrajectoryRecord rec;
    rec.t.reserve(static_cast<size_t>(steps) + 1);
    rec.positions.reserve(static_cast<size_t>(steps) + 1);
    rec.dist_to_limit.assign(static_cast<size_t>(n), {});
    rec.activation_time.assign(static_cast<size_t>(n), 0.0);

    std::optional<PredictedLimit> limit;
    if (!maneuver) {
        limit = predicted_limit(s.p_star, s.p0.agent(1), s.p0.agent(2));
        rec.limit = limit;
    }

    // Sequential activation: followers stay frozen until both neighbors sit
    // within epsilon of their predicted limits. Once active, an agent stays
    // active.
    std::vector<char> active(static_cast<size_t>(n), 1);
    if (s.activation == Activation::Sequential)
        for (int k = 3; k <= n; ++k) active[static_cast<size_t>(k) - 1] = 0;
    auto update_activation = [&](const Configuration& q, double time) {
        if (s.activation != Activation::Sequential) return;
        for (int k = 3; k <= n; ++k) {
            auto& flag = active[static_cast<size_t>(k) - 1];
            if (flag) continue;
            const auto& nb = s.graph.neighbors(k);
            const bool ready =
                (q.agent(nb[0]) - limit->p_dagger.agent(nb[0])).norm() < s.activation_epsilon &&
                (q.agent(nb[1]) - limit->p_dagger.agent(nb[1])).norm() < s.activation_epsilon;
            if (ready) {
                flag = 1;
                rec.activation_time[static_cast<size_t>(k) - 1] = time;
            }
        }
    };

    Configuration state = s.p0;
    update_activation(state, 0.0);

    for (int step = 0; step <= steps; ++step) {
        const double time = static_cast<double>(step) * s.dt;
        const ManeuverReference* ref =
            maneuver ? &detail::active_segment(s.schedule, time).ref : nullptr;
        detail::StepContext ctx{&s, &acs, ref, &active};

        rec.t.push_back(time);
        rec.positions.push_back(state);
        rec.inputs.push_back(ctx(state));
        rec.angle_error_series.push_back(angle_error(state, acs).total);
        rec.shape_distance_series.push_back(shape_distance(state, s.p_star));
        rec.min_neighbor_distance.push_back(detail::min_sensing_distance(state, s.graph));

        // Distance to the limit: static in shape mode, a leader-anchored
        // moving reconstruction in maneuver mode.
        Configuration ref_cfg;
        if (maneuver) {
            ref_cfg = reconstruct(state.agent(1), state.agent(1) + ref->delta_12, acs);
        } else {
            ref_cfg = limit->p_dagger;
        }
        for (int a = 1; a <= n; ++a)
            rec.dist_to_limit[static_cast<size_t>(a) - 1].push_back(
                (state.agent(a) - ref_cfg.agent(a)).norm());

        if (step == steps) break;
        state = detail::rk4_step(state, ctx, s.dt);
        update_activation(state, static_cast<double>(step + 1) * s.dt);
    }
    return rec;
}

struct RateEstimate {
    std::string label;
    double rate = 0.0;       // 1/s, positive for decay
    double t_begin = 0.0;
    double t_end = 0.0;
    int sample_count = 0;
    double r_squared = 0.0;
    bool valid = false;
};

/// Least-squares slope of log(value) against time over [i_begin, i_end].
inline RateEstimate fit_log_slope(std::span<const double> t, std::span<const double> v,
                                  size_t i_begin, size_t i_end) {
    if (i_end <= i_begin || i_end >= t.size() || i_end - i_begin + 1 < 3)
        throw InsufficientData("rate fit needs at least 3 usable samples");
    double st = 0, sl = 0, stt = 0, stl = 0;
    const double count = static_cast<double>(i_end - i_begin + 1);
    for (size_t i = i_begin; i <= i_end; ++i) {
        if (!(v[i] > 0.0)) throw InsufficientData("rate fit window contains nonpositive values");
        const double l = std::log(v[i]);
        st += t[i];
        sl += l;
        stt += t[i] * t[i];
        stl += t[i] * l;
    }
    const double denom = count * stt - st * st;
    if (denom <= 0.0) throw InsufficientData("rate fit window has no time spread");
    const double slope = (count * stl - st * sl) / denom;
    const double mean_l = sl / count;
    double ss_res = 0, ss_tot = 0;
    const double intercept = (sl - slope * st) / count;
    for (size_t i = i_begin; i <= i_end; ++i) {
        const double l = std::log(v[i]);
        const double fit = intercept + slope * t[i];
        ss_res += (l - fit) * (l - fit);
        ss_tot += (l - mean_l) * (l - mean_l);
    }
    RateEstimate r;
    r.rate = -slope;
    r.t_begin = t[i_begin];
    r.t_end = t[i_end];
    r.sample_count = static_cast<int>(i_end - i_begin + 1);
    r.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    r.valid = true;
    return r;
}

/// Fits an exponential decay rate over the window where the series has left
/// its transient (dropped below half its initial value) but still sits above
/// the numerical floor of 1e-10.
inline RateEstimate estimate_rate(std::span<const double> t, std::span<const double> v) {
    if (t.size() != v.size() || v.size() < 3)
        throw InsufficientData("rate estimate needs at least 3 samples");
    if (!(v[0] > 0.0)) throw InsufficientData("series must start positive");
    constexpr double kFloor = 1e-10;
    const double upper = 0.5 * v[0];
    size_t begin = v.size();
    for (size_t i = 0; i < v.size(); ++i) {
        if (v[i] <= upper) { begin = i; break; }
    }
    if (begin >= v.size()) throw InsufficientData("series never decays below half its start");
    size_t end = begin;
    while (end + 1 < v.size() && v[end + 1] >= kFloor) ++end;
    return fit_log_slope(t, v, begin, end);
}

/// Per-follower outcome of the collision monitor.
struct FollowerCollisionEntry {
    int agent = 0;
    double bound = 0.0;            // min target-edge length at the limit
    double initial_offset = 0.0;   // distance from the limit at t = 0
    bool precondition_met = false; // initial_offset < bound
    double min_neighbor_distance = 0.0;  // realized minimum over the run
    double activation_time = 0.0;
};

struct CollisionReport {
    std::vector<FollowerCollisionEntry> followers;
    double overall_min_distance = 0.0;
    /// True when every follower that met the precondition kept a strictly
    /// positive distance to both neighbors throughout.
    bool bound_respected = true;
};

/// Runs the scenario (sequential activation required) and reports, for each
/// follower, whether the collision precondition held against the stabilized
/// limit and the realized minimum distance to its neighbors.
inline CollisionReport check_collision_bound(const Scenario& s) {
    if (s.activation != Activation::Sequential)
        throw InvalidScenario("collision monitor requires sequential activation");
    const TrajectoryRecord rec = integrate(s);
    const PredictedLimit& limit = *rec.limit;
    CollisionReport report;
    report.overall_min_distance = std::numeric_limits<double>::infinity();
    for (int k = 3; k <= s.graph.n; ++k) {
        const auto& nb = s.graph.neighbors(k);
        FollowerCollisionEntry e;
        e.agent = k;
        e.bound = std::min((limit.p_dagger.agent(k) - limit.p_dagger.agent(nb[0])).norm(),
                           (limit.p_dagger.agent(k) - limit.p_dagger.agent(nb[1])).norm());
        e.initial_offset = (s.p0.agent(k) - limit.p_dagger.agent(k)).norm();
        e.precondition_met = e.initial_offset < e.bound;
        e.activation_time = rec.activation_time[static_cast<size_t>(k) - 1];
        double dmin = std::numeric_limits<double>::infinity();
        for (const Configuration& q : rec.positions) {
            dmin = std::min(dmin, (q.agent(k) - q.agent(nb[0])).norm());
            dmin = std::min(dmin, (q.agent(k) - q.agent(nb[1])).norm());
        }
        e.min_neighbor_distance = dmin;
        if (e.precondition_met && !(dmin > 0.0)) report.bound_respected = false;
        report.overall_min_distance = std::min(report.overall_min_distance, dmin);
        report.followers.push_back(e);
    }
    return report;
}

/// Per-segment summary of a maneuver run. Terminal values are taken at the
/// segment's right boundary, evaluated with the segment's own reference.
struct SegmentSummary {
    int index = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    ManeuverReference ref;
    double terminal_e12_error = 0.0;     // ||p2 - p1 - delta*|| at segment end
    double terminal_e12_norm = 0.0;      // ||p2 - p1|| at segment end
    double terminal_shape_distance = 0.0;
    double terminal_velocity_error = 0.0;  // max over followers of ||u_k - v_r||
    RateEstimate e12_rate;
    RateEstimate shape_rate;
    RateEstimate velocity_rate;
};

struct ManeuverResult {
    TrajectoryRecord record;
    std::vector<SegmentSummary> segments;
};

/// Integrates a maneuver scenario and summarizes each schedule segment:
/// terminal leader-edge error, shape distance, follower velocity error, and
/// fitted decay rates of all three.
inline ManeuverResult run_maneuver(const Scenario& s) {
    if (s.mode.mode != Mode::Maneuver || s.schedule.empty())
        throw InvalidScenario("run_maneuver requires maneuver mode with a schedule");
    ManeuverResult result;
    result.record = integrate(s);
    const TrajectoryRecord& rec = result.record;
    const AngleConstraintSet acs = extract_angles(s.p_star, triangle_set(s.graph));

    const int last_sample = rec.samples() - 1;
    int index = 0;
    for (const ScheduleSegment& seg : s.schedule) {
        const int i0 = static_cast<int>(std::llround(seg.t_start / s.dt));
        const int i1 = std::min(static_cast<int>(std::llround(seg.t_end / s.dt)), last_sample);
        if (i0 >= last_sample) break;

        SegmentSummary sum;
        sum.index = ++index;
        sum.t_start = seg.t_start;
        sum.t_end = rec.t[static_cast<size_t>(i1)];
        sum.ref = seg.ref;

        std::vector<double> tt, e12_err, vel_err, shape_err;
        for (int i = i0; i <= i1; ++i) {
            const Configuration& q = rec.positions[static_cast<size_t>(i)];
            tt.push_back(rec.t[static_cast<size_t>(i)]);
            const Vec2 e12 = q.agent(2) - q.agent(1);
            e12_err.push_back((e12 - seg.ref.delta_12).norm());
            double vmax = 0.0;
            for (int k = 3; k <= s.graph.n; ++k) {
                const Vec2 uk = maneuver_control(k, q, seg.ref, acs, s.mode.variant);
                vmax = std::max(vmax, (uk - seg.ref.v_r).norm());
            }
            vel_err.push_back(vmax);
            shape_err.push_back(rec.shape_distance_series[static_cast<size_t>(i)]);
        }
        sum.terminal_e12_error = e12_err.back();
        sum.terminal_e12_norm =
            (rec.positions[static_cast<size_t>(i1)].agent(2) -
             rec.positions[static_cast<size_t>(i1)].agent(1)).norm();
        sum.terminal_shape_distance = shape_err.back();
        sum.terminal_velocity_error = vel_err.back();

        auto try_fit = [&tt](const std::vector<double>& series, const char* label) {
            RateEstimate r;
            try {
                r = estimate_rate(tt, series);
            } catch (const InsufficientData&) {
                r.valid = false;
            }
            r.label = label;
            return r;
        };
        sum.e12_rate = try_fit(e12_err, "leader_edge_error");
        sum.shape_rate = try_fit(shape_err, "shape_distance");
        sum.velocity_rate = try_fit(vel_err, "velocity_error");
        result.segments.push_back(sum);
    }
    return result;
}

}  // namespace angleform
