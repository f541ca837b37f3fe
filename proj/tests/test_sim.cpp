#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "angleform/builtin_scenarios.hpp"
#include "angleform/sim.hpp"
#include "test_support.hpp"

using namespace angleform;
namespace at = angleform::testing;

namespace {

/// Three-agent scenario whose follower angle (at agent 3) is `angle`.
/// Leaders start on target, so the limit is the target itself.
Scenario three_agent_scenario(double angle, Vec2 follower_offset) {
    Scenario s;
    s.graph.n = 3;
    s.graph.out_neighbors = {{}, {1}, {1, 2}};
    const double interior = angle < kPi ? angle : kTwoPi - angle;
    const double h = 0.5 / std::tan(interior / 2.0);
    const double apex_y = angle < kPi ? h : -h;  // reflex angles sit below the base
    s.p_star = Configuration{{{0, 0}, {1, 0}, {0.5, apex_y}}};
    s.p0 = s.p_star;
    s.p0.agent(3) += follower_offset;
    s.mode = {Mode::Shape, FollowerVariant::RelativePosition};
    s.dt = 0.001;
    s.duration = 20.0;
    return s;
}

}  // namespace

TEST_CASE("three-agent fixture realizes the requested follower angle") {
    for (double deg : {30.0, 60.0, 90.0, 120.0, 315.0}) {
        const Scenario s = three_agent_scenario(deg_to_rad(deg), {0.5, 0.5});
        const TriangleAngles a = measure_triangle_angles(s.p_star, {1, 2, 3});
        CHECK(std::abs(wrap_pi(a.at_k - deg_to_rad(deg))) < 1e-12);
    }
}

TEST_CASE("on-target start stays exactly at rest") {
    Scenario s = builtin_shape_scenario();
    s.duration = 2.0;
    const PredictedLimit pl = predicted_limit(s.p_star, s.p0.agent(1), s.p0.agent(2));
    s.p0 = pl.p_dagger;
    const TrajectoryRecord rec = integrate(s);
    for (int i = 0; i < rec.samples(); ++i) {
        CHECK(rec.angle_error_series[static_cast<size_t>(i)] < 1e-9);
        for (const Vec2& u : rec.inputs[static_cast<size_t>(i)]) CHECK(u.norm() < 1e-9);
        for (int a = 1; a <= 6; ++a)
            CHECK((rec.positions[static_cast<size_t>(i)].agent(a) - pl.p_dagger.agent(a)).norm() <
                  1e-9);
    }
}

TEST_CASE("three-agent decay matches the closed-form exponential") {
    const double angle = deg_to_rad(60.0);
    const Scenario s = three_agent_scenario(angle, {0.9, 0.7});
    const double rate = std::pow(std::sin(angle), 2);
    const TrajectoryRecord rec = integrate(s);
    const double initial = rec.dist_to_limit[2][0];
    for (int i = 0; i < rec.samples(); ++i) {
        const double expected = std::exp(-rate * rec.t[static_cast<size_t>(i)]) * initial;
        if (expected < 1e-10 * initial) break;
        const double got = rec.dist_to_limit[2][static_cast<size_t>(i)];
        CHECK(std::abs(got - expected) <= 1e-6 * expected);
    }
    // Leaders never move in shape mode.
    const Configuration& last = rec.positions.back();
    CHECK((last.agent(1) - s.p0.agent(1)).norm() == 0.0);
    CHECK((last.agent(2) - s.p0.agent(2)).norm() == 0.0);
}

TEST_CASE("rate estimation recovers synthetic exponents") {
    std::vector<double> t, v;
    for (int i = 0; i <= 5000; ++i) {
        t.push_back(0.01 * i);
        v.push_back(std::exp(-2.0 * t.back()));
    }
    const RateEstimate r = estimate_rate(t, v);
    CHECK(r.valid);
    CHECK(std::abs(r.rate - 2.0) < 1e-9);
    CHECK(r.r_squared > 1.0 - 1e-12);

    // Flat series cannot be fitted.
    std::vector<double> flat(100, 1.0);
    std::vector<double> ft(100);
    for (int i = 0; i < 100; ++i) ft[static_cast<size_t>(i)] = i * 0.01;
    CHECK_THROWS_AS(estimate_rate(ft, flat), InsufficientData);
}

TEST_CASE("fitted follower rate matches the follower angle") {
    const double angle = deg_to_rad(120.0);
    const Scenario s = three_agent_scenario(angle, {-0.4, 0.8});
    const TrajectoryRecord rec = integrate(s);
    const RateEstimate r = estimate_rate(rec.t, rec.dist_to_limit[2]);
    const double want = std::pow(std::sin(angle), 2);
    CHECK(std::abs(r.rate - want) / want < 0.02);
}

TEST_CASE("angle error sums wrapped deviations") {
    // Wrap arithmetic first.
    CHECK(std::abs(wrap_pi(0.1 - (kTwoPi - 0.1))) == Catch::Approx(0.2));
    CHECK(std::abs(wrap_pi(kPi)) == Catch::Approx(kPi));

    // Synthetic stored angles against measured ones.
    const Configuration q{{{0, 0}, {1, 0}, {0.3, 0.9}}};
    const TriangleAngles measured = measure_triangle_angles(q, {1, 2, 3});
    AngleConstraintSet acs;
    TriangleAngles stored = measured;
    stored.at_i = wrap_two_pi(measured.at_i - 0.2);
    stored.at_j = wrap_two_pi(measured.at_j + kTwoPi - 0.1);  // wraps to -0.1
    acs.angles = {stored};
    acs.constraints = {constraint_matrices(stored)};
    const AngleErrorResult r = angle_error(q, acs);
    CHECK_FALSE(r.degenerate);
    CHECK(r.total == Catch::Approx(0.3).margin(1e-12));

    // A configuration with the target shape has zero error.
    const Configuration p = reference_target_6();
    const AngleConstraintSet ref = extract_angles(p, triangle_set(reference_graph_6()));
    const Configuration moved = apply_similarity(p, {2.0, 1.0, {5.0, -1.0}});
    CHECK(angle_error(moved, ref).total < 1e-9);

    // Coincident agents flag the sample.
    Configuration degenerate = q;
    degenerate.agent(3) = degenerate.agent(2);
    CHECK(angle_error(degenerate, acs).degenerate);
}

TEST_CASE("scenario validation catches structural mistakes") {
    Scenario s = builtin_shape_scenario();
    s.dt = 0.1;
    CHECK_THROWS_AS(integrate(s), StepTooLarge);

    s = builtin_shape_scenario();
    s.schedule = {{0.0, 10.0, {{0, 0}, {1, 0}}}};
    CHECK_FALSE(validate_scenario(s).empty());
    CHECK_THROWS_AS(integrate(s), InvalidScenario);

    s = builtin_maneuver_scenario();
    s.schedule[1].t_start = 50.005;  // neither contiguous nor a sane switch
    CHECK_FALSE(validate_scenario(s).empty());

    s = builtin_maneuver_scenario();
    s.schedule[0].t_end = 50.005;  // not a multiple of dt
    s.schedule[1].t_start = 50.005;
    CHECK_FALSE(validate_scenario(s).empty());

    s = builtin_shape_scenario();
    s.p0.agent(2) = s.p0.agent(1);
    CHECK_FALSE(validate_scenario(s).empty());

    CHECK(validate_scenario(builtin_shape_scenario()).empty());
    CHECK(validate_scenario(builtin_maneuver_scenario()).empty());
}

TEST_CASE("integration is deterministic") {
    Scenario s = builtin_shape_scenario();
    s.duration = 5.0;
    const TrajectoryRecord a = integrate(s);
    const TrajectoryRecord b = integrate(s);
    REQUIRE(a.samples() == b.samples());
    for (int i = 0; i < a.samples(); ++i)
        for (int agent = 1; agent <= 6; ++agent) {
            CHECK(a.positions[static_cast<size_t>(i)].agent(agent).x ==
                  b.positions[static_cast<size_t>(i)].agent(agent).x);
            CHECK(a.positions[static_cast<size_t>(i)].agent(agent).y ==
                  b.positions[static_cast<size_t>(i)].agent(agent).y);
        }
}

TEST_CASE("trajectories are equivariant under rigid motions of the problem") {
    Scenario s = builtin_shape_scenario();
    s.duration = 10.0;
    const SimilarityTransform t{1.4, 0.9, {0.3, -0.2}};
    Scenario s2 = s;
    s2.p0 = apply_similarity(s.p0, t);
    s2.p_star = apply_similarity(s.p_star, t);
    const TrajectoryRecord a = integrate(s);
    const TrajectoryRecord b = integrate(s2);
    for (int i = 0; i < a.samples(); i += 50)
        for (int agent = 1; agent <= 6; ++agent) {
            const Vec2 mapped = t.apply(a.positions[static_cast<size_t>(i)].agent(agent));
            CHECK((mapped - b.positions[static_cast<size_t>(i)].agent(agent)).norm() < 1e-9);
        }
}

TEST_CASE("halving the step shrinks the terminal error at fourth order") {
    auto terminal = [](double dt) {
        Scenario s = builtin_shape_scenario();
        s.duration = 2.0;
        s.dt = dt;
        return integrate(s).positions.back();
    };
    const Configuration c1 = terminal(0.02), c2 = terminal(0.01), c3 = terminal(0.005);
    double e1 = 0.0, e2 = 0.0;
    for (int a = 1; a <= 6; ++a) {
        e1 += (c1.agent(a) - c2.agent(a)).norm_sq();
        e2 += (c2.agent(a) - c3.agent(a)).norm_sq();
    }
    const double order = std::log2(std::sqrt(e1) / std::sqrt(e2));
    CHECK(order > 3.5);
    CHECK(order < 4.5);
}

TEST_CASE("sequential activation holds followers until their neighbors settle") {
    Scenario s = builtin_shape_scenario();
    s.activation = Activation::Sequential;
    s.activation_epsilon = 1e-4;
    s.duration = 60.0;
    const TrajectoryRecord rec = integrate(s);

    // Agent 3 may start at once (the leader pair is its limit from t = 0);
    // agent 4 waits for 3; agents 5 and 6 wait for 4.
    CHECK(rec.activation_time[2] == 0.0);
    CHECK(rec.activation_time[3] > 1.0);
    CHECK(rec.activation_time[4] > rec.activation_time[3]);
    CHECK(rec.activation_time[5] > rec.activation_time[3]);

    // Frozen until activation.
    const int pre = static_cast<int>(rec.activation_time[3] / s.dt) - 1;
    CHECK((rec.positions[static_cast<size_t>(pre)].agent(4) - s.p0.agent(4)).norm() == 0.0);

    // Everyone still converges.
    for (int a = 1; a <= 6; ++a) CHECK(rec.dist_to_limit[static_cast<size_t>(a) - 1].back() < 1e-6);
}

TEST_CASE("collision monitor requires sequential activation") {
    const Scenario s = builtin_shape_scenario();
    CHECK_THROWS_AS(check_collision_bound(s), InvalidScenario);
}

TEST_CASE("collision monitor reports bounds and realized distances") {
    Scenario s = builtin_shape_scenario();
    s.activation = Activation::Sequential;
    s.duration = 50.0;
    // Leaders on target so the limit equals the target itself.
    s.p0.agent(1) = s.p_star.agent(1);
    s.p0.agent(2) = s.p_star.agent(2);
    std::mt19937_64 rng(51);
    const PredictedLimit pl = predicted_limit(s.p_star, s.p0.agent(1), s.p0.agent(2));
    for (int k = 3; k <= 6; ++k) {
        const auto& nb = s.graph.neighbors(k);
        const double bound = std::min((pl.p_dagger.agent(k) - pl.p_dagger.agent(nb[0])).norm(),
                                      (pl.p_dagger.agent(k) - pl.p_dagger.agent(nb[1])).norm());
        std::uniform_real_distribution<double> angle(0.0, kTwoPi);
        const Rot2 dir(angle(rng));
        s.p0.agent(k) = pl.p_dagger.agent(k) + dir.apply({0.9 * bound, 0.0});
    }
    const CollisionReport report = check_collision_bound(s);
    REQUIRE(report.followers.size() == 4);
    for (const auto& e : report.followers) {
        CHECK(e.precondition_met);
        CHECK(e.min_neighbor_distance > 1e-3);
    }
    CHECK(report.bound_respected);
    CHECK(report.overall_min_distance > 1e-3);

    // A follower placed beyond the bound is reported, not asserted against.
    Scenario far = s;
    const auto& nb3 = far.graph.neighbors(3);
    const double bound3 = std::min((pl.p_dagger.agent(3) - pl.p_dagger.agent(nb3[0])).norm(),
                                   (pl.p_dagger.agent(3) - pl.p_dagger.agent(nb3[1])).norm());
    far.p0.agent(3) = pl.p_dagger.agent(3) + Vec2{1.5 * bound3, 0.0};
    const CollisionReport report2 = check_collision_bound(far);
    CHECK_FALSE(report2.followers[0].precondition_met);
}

TEST_CASE("maneuver run summarizes each segment") {
    const Scenario s = builtin_maneuver_scenario();
    const ManeuverResult result = run_maneuver(s);
    REQUIRE(result.segments.size() == 3);

    for (const SegmentSummary& seg : result.segments) {
        CHECK(seg.e12_rate.valid);
        CHECK(std::abs(seg.e12_rate.rate - 1.0) < 0.02);
        CHECK(seg.terminal_velocity_error < 1e-4);
        CHECK(seg.terminal_e12_error < 1e-6);
    }

    // The third segment shrinks the leader edge to 0.7 of the second's.
    const double ratio =
        result.segments[2].terminal_e12_norm / result.segments[1].terminal_e12_norm;
    CHECK(std::abs(ratio - 0.7) < 1e-3 * 0.7);

    // Angle error settles within each segment and is re-excited by switches.
    // The shortest segment leaves 30 s at the slowest follower rate of 0.5,
    // so its floor sits near exp(-15) times the switching transient.
    const TrajectoryRecord& rec = result.record;
    auto at_time = [&](double time) {
        return rec.angle_error_series[static_cast<size_t>(std::llround(time / s.dt))];
    };
    CHECK(at_time(50.0) < 1e-4);
    CHECK(at_time(90.0) < 1e-4);
    CHECK(at_time(120.0) < 1e-4);
    double bump = 0.0;
    for (double time = 50.5; time <= 60.0; time += 0.5) bump = std::max(bump, at_time(time));
    CHECK(bump > 1e-3);
}

TEST_CASE("on-target maneuver start tracks the reference exactly") {
    Scenario s = builtin_maneuver_scenario();
    s.duration = 10.0;
    s.schedule = {{0.0, 10.0, s.schedule[0].ref}};
    const Vec2 delta = s.schedule[0].ref.delta_12;
    s.p0 = reconstruct(Vec2{0.1, 0.2}, Vec2{0.1, 0.2} + delta,
                       extract_angles(s.p_star, triangle_set(s.graph)));
    const ManeuverResult result = run_maneuver(s);
    const SegmentSummary& seg = result.segments[0];
    CHECK(seg.terminal_e12_error < 1e-9);
    CHECK(seg.terminal_shape_distance < 1e-9);
    CHECK(seg.terminal_velocity_error < 1e-9);
    CHECK_FALSE(seg.e12_rate.valid);  // nothing to fit on a flat series
}
