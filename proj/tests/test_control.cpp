#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "angleform/builtin_scenarios.hpp"
#include "angleform/control.hpp"
#include "test_support.hpp"

using namespace angleform;
namespace at = angleform::testing;

namespace {

struct Fixture {
    SensingGraph graph = reference_graph_6();
    Configuration p_star = reference_target_6();
    AngleConstraintSet acs = extract_angles(p_star, triangle_set(graph));
};

}  // namespace

TEST_CASE("leader and first follower receive no shape control") {
    Fixture f;
    std::mt19937_64 rng(41);
    Configuration q;
    for (int i = 0; i < 6; ++i) q.positions.push_back(at::random_point(rng, -3.0, 3.0));
    CHECK(shape_control(1, q, f.acs).norm() == 0.0);
    CHECK(shape_control(2, q, f.acs).norm() == 0.0);
}

TEST_CASE("shape control vanishes exactly on the target shape") {
    Fixture f;
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const Configuration q = apply_similarity(f.p_star, at::random_similarity(rng));
        for (int k = 3; k <= 6; ++k) CHECK(shape_control(k, q, f.acs).norm() < 1e-9);
    }
}

TEST_CASE("single-agent perturbation decays along itself") {
    Fixture f;
    // Perturb agent 3 only: the feedback is exactly -sin^2(follower angle)
    // times the displacement.
    Configuration q = f.p_star;
    const Vec2 offset{0.6, -0.8};
    q.agent(3) += offset;
    const Vec2 u = shape_control(3, q, f.acs);
    const double rate = follower_rate(f.acs.angles_for_follower(3));
    CHECK((u + offset * rate).norm() < 1e-12);
}

TEST_CASE("equilibria are exactly the zero-residual configurations") {
    Fixture f;
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        Configuration q;
        for (int i = 0; i < 6; ++i) q.positions.push_back(at::random_point(rng, -2.0, 2.0));
        for (int k = 3; k <= 6; ++k) {
            const TriangleConstraint& tc = f.acs.for_follower(k);
            const Vec2 r = residual(tc, q.agent(tc.tri.i), q.agent(tc.tri.j), q.agent(tc.tri.k));
            const Vec2 u = shape_control(k, q, f.acs);
            // u = -A_k^T r, and A_k is invertible.
            const Vec2 expect = -tc.A_k.transposed().apply(r);
            CHECK((u - expect).norm() < 1e-12);
            if (r.norm() > 1e-6) CHECK(u.norm() > 0.0);
        }
    }
}

TEST_CASE("shape control is linear around the limit") {
    Fixture f;
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 30; ++trial) {
        Configuration qa = f.p_star, qb = f.p_star, qab = f.p_star;
        for (int a = 1; a <= 6; ++a) {
            const Vec2 da = at::random_point(rng), db = at::random_point(rng);
            qa.agent(a) += da;
            qb.agent(a) += db;
            qab.agent(a) += da + db;
        }
        for (int k = 3; k <= 6; ++k) {
            const Vec2 base = shape_control(k, f.p_star, f.acs);
            const Vec2 ua = shape_control(k, qa, f.acs) - base;
            const Vec2 ub = shape_control(k, qb, f.acs) - base;
            const Vec2 uab = shape_control(k, qab, f.acs) - base;
            CHECK((uab - ua - ub).norm() < 1e-12);
        }
    }
}

TEST_CASE("control commutes with frame rotations") {
    Fixture f;
    std::mt19937_64 rng(45);
    for (int trial = 0; trial < 50; ++trial) {
        Configuration q;
        for (int i = 0; i < 6; ++i) q.positions.push_back(at::random_point(rng, -2.0, 2.0));
        std::uniform_real_distribution<double> angle(0.0, kTwoPi);
        const Rot2 Q(angle(rng));
        for (int k = 3; k <= 6; ++k) {
            const TriangleConstraint& tc = f.acs.for_follower(k);
            const Vec2 e_ki = Q.apply(q.agent(tc.tri.i) - q.agent(k));
            const Vec2 e_kj = Q.apply(q.agent(tc.tri.j) - q.agent(k));
            const Vec2 local = local_frame_control(k, e_ki, e_kj, f.acs);
            const Vec2 global = shape_control(k, q, f.acs);
            CHECK((local - Q.apply(global)).norm() < 1e-12);
        }
    }
}

TEST_CASE("local control with identity frame equals the global law") {
    Fixture f;
    std::mt19937_64 rng(46);
    Configuration q;
    for (int i = 0; i < 6; ++i) q.positions.push_back(at::random_point(rng, -2.0, 2.0));
    for (int k = 3; k <= 6; ++k) {
        const TriangleConstraint& tc = f.acs.for_follower(k);
        const Vec2 e_ki = q.agent(tc.tri.i) - q.agent(k);
        const Vec2 e_kj = q.agent(tc.tri.j) - q.agent(k);
        CHECK((local_frame_control(k, e_ki, e_kj, f.acs) - shape_control(k, q, f.acs)).norm() ==
              0.0);
    }
    // At an equilibrium the local law is zero in any frame.
    const Configuration eq = apply_similarity(f.p_star, {1.3, 0.8, {0.2, 0.1}});
    for (int k = 3; k <= 6; ++k) {
        const TriangleConstraint& tc = f.acs.for_follower(k);
        const Rot2 Q(1.1);
        const Vec2 e_ki = Q.apply(eq.agent(tc.tri.i) - eq.agent(k));
        const Vec2 e_kj = Q.apply(eq.agent(tc.tri.j) - eq.agent(k));
        CHECK(local_frame_control(k, e_ki, e_kj, f.acs).norm() < 1e-9);
    }
}

TEST_CASE("maneuver law on the target translates rigidly") {
    Fixture f;
    const ManeuverReference ref{{0.03, -0.01},
                                f.p_star.agent(2) - f.p_star.agent(1)};
    for (int k = 1; k <= 6; ++k) {
        const Vec2 u = maneuver_control(k, f.p_star, ref, f.acs);
        CHECK((u - ref.v_r).norm() < 1e-9);
    }
}

TEST_CASE("maneuver law with zero velocity reduces to the shape laws") {
    Fixture f;
    std::mt19937_64 rng(47);
    Configuration q;
    for (int i = 0; i < 6; ++i) q.positions.push_back(at::random_point(rng, -2.0, 2.0));
    const ManeuverReference ref{{0.0, 0.0}, {0.4, 0.4}};
    CHECK(maneuver_control(1, q, ref, f.acs).norm() == 0.0);
    const Vec2 u2 = maneuver_control(2, q, ref, f.acs);
    const Vec2 expect2 = -((q.agent(2) - q.agent(1)) - ref.delta_12);
    CHECK((u2 - expect2).norm() < 1e-15);
    for (int k = 3; k <= 6; ++k)
        CHECK((maneuver_control(k, q, ref, f.acs) - shape_control(k, q, f.acs)).norm() == 0.0);
}

TEST_CASE("first-follower law by substitution") {
    Fixture f;
    Configuration q = f.p_star;
    const ManeuverReference ref{{0.05, 0.0}, {0.4, 0.4}};
    q.agent(2) = q.agent(1) + ref.delta_12 + Vec2{1.0, 0.0};
    const Vec2 u2 = maneuver_control(2, q, ref, f.acs);
    CHECK((u2 - (ref.v_r - Vec2{1.0, 0.0})).norm() < 1e-15);
}

TEST_CASE("distance law pinned values") {
    CHECK(distance_follower_control({0, 0}, {1, 0}, {1, 0}).norm() == 0.0);
    const Vec2 u = distance_follower_control({0, 0}, {2, 0}, {0, 1});
    CHECK(u.x == Catch::Approx(-6.0));
    CHECK(u.y == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("distance law drives the edge length to target") {
    // 2-D closed loop against a 1-D radial oracle: r' = -(r^2 - 1) r.
    const double dt = 1e-4;
    Vec2 e{std::sqrt(2.0), std::sqrt(2.0)};  // |e| = 2
    double r = 2.0;
    double prev = 2.0;
    bool monotone = true;
    for (int step = 0; step < 60000; ++step) {
        const Vec2 u = distance_follower_control({0, 0}, e, {1, 0});
        e += u * dt;
        const double rr = r;
        auto f = [](double x) { return -(x * x - 1.0) * x; };
        const double k1 = f(rr), k2 = f(rr + dt / 2 * k1), k3 = f(rr + dt / 2 * k2),
                     k4 = f(rr + dt * k3);
        r += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (e.norm() > prev + 1e-12) monotone = false;
        prev = e.norm();
    }
    CHECK(monotone);
    CHECK(e.norm() == Catch::Approx(r).margin(1e-6));
    CHECK(e.norm() == Catch::Approx(1.0).margin(1e-4));
}

TEST_CASE("bearing law pinned values and projector property") {
    // Aligned bearing: no correction.
    CHECK(bearing_follower_control({0, 0}, {2, 0}, {1, 0}).norm() < 1e-15);

    // Orthogonal bearing: the projector passes the target bearing through.
    const Vec2 u = bearing_follower_control({0, 0}, {0, 3}, {1, 0});
    CHECK(u.x == Catch::Approx(1.0));
    CHECK(u.y == Catch::Approx(0.0).margin(1e-15));

    std::mt19937_64 rng(48);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec2 p2 = at::random_point(rng, -2.0, 2.0);
        const Vec2 ds = at::random_point(rng, -2.0, 2.0);
        if (p2.norm() < 1e-3 || ds.norm() < 1e-3) continue;
        const Vec2 out = bearing_follower_control({0, 0}, p2, ds);
        CHECK(std::abs(bearing({0, 0}, p2).dot(out)) < 1e-12);
    }
    CHECK_THROWS_AS(bearing_follower_control({1, 1}, {1, 1}, {1, 0}), CoincidentPoints);
}
