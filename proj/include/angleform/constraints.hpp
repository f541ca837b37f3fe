#pragma once

#include <cmath>
#include <vector>

#include "angleform/geometry.hpp"
#include "angleform/graph.hpp"

namespace angleform {

/// 2x2 matrix of the form [a, -b; b, a]: a rotation scaled by hypot(a, b).
/// Closed under addition and composition, and commutes with every rotation,
/// which is what makes the per-triangle constraint similarity-invariant.
struct ScaledRotation {
    double a = 0.0;
    double b = 0.0;

    Vec2 apply(Vec2 v) const { return {a * v.x - b * v.y, b * v.x + a * v.y}; }
    Vec2 apply_transposed(Vec2 v) const { return {a * v.x + b * v.y, -b * v.x + a * v.y}; }
    ScaledRotation transposed() const { return {a, -b}; }
    /// Inverse via transpose over squared scale; singular iff det() == 0.
    ScaledRotation inverse() const {
        const double d = det();
        return {a / d, -b / d};
    }
    double det() const { return a * a + b * b; }
    ScaledRotation operator+(ScaledRotation o) const { return {a + o.a, b + o.b}; }
    ScaledRotation operator-(ScaledRotation o) const { return {a - o.a, b - o.b}; }

    static ScaledRotation identity_scaled(double s) { return {s, 0.0}; }
    /// s * R(theta).
    static ScaledRotation rotation_scaled(double s, double theta) {
        return {s * std::cos(theta), s * std::sin(theta)};
    }
};

/// The three signed angles of a follower triangle (i, j, k), each measured by
/// signed_angle() on the target configuration:
///   at_i: vertex i, from the bearing toward k to the bearing toward j,
///   at_j: vertex j, from the bearing toward i to the bearing toward k,
///   at_k: vertex k, from the bearing toward j to the bearing toward i.
/// at_k belongs to the follower; sin^2(at_k) is the follower's decay rate.
struct TriangleAngles {
    Triangle tri;
    double at_i = 0.0;
    double at_j = 0.0;
    double at_k = 0.0;
};

/// Blocks of the angle-induced linear constraint
///   A_i p_i + A_j p_j + A_k p_k = 0,
/// zero exactly on the similarity class of the generating triangle:
///   A_j = sin(at_j) R(at_i),  A_i = sin(at_k) I - A_j,  A_k = -sin(at_k) I.
struct TriangleConstraint {
    Triangle tri;
    ScaledRotation A_i, A_j, A_k;
};

inline TriangleConstraint constraint_matrices(const TriangleAngles& a) {
    TriangleConstraint c;
    c.tri = a.tri;
    c.A_j = ScaledRotation::rotation_scaled(std::sin(a.at_j), a.at_i);
    c.A_i = ScaledRotation::identity_scaled(std::sin(a.at_k)) - c.A_j;
    c.A_k = ScaledRotation::identity_scaled(-std::sin(a.at_k));
    return c;
}

inline Vec2 residual(const TriangleConstraint& tc, Vec2 p_i, Vec2 p_j, Vec2 p_k) {
    return tc.A_i.apply(p_i) + tc.A_j.apply(p_j) + tc.A_k.apply(p_k);
}

/// Per-triangle angles and constraint blocks, ordered by follower index.
struct AngleConstraintSet {
    std::vector<TriangleAngles> angles;
    std::vector<TriangleConstraint> constraints;

    int triangle_count() const { return static_cast<int>(angles.size()); }
    /// Entry for follower k (k >= 3).
    const TriangleConstraint& for_follower(int k) const {
        return constraints[static_cast<size_t>(k) - 3];
    }
    const TriangleAngles& angles_for_follower(int k) const {
        return angles[static_cast<size_t>(k) - 3];
    }
};

/// sin^2 of the follower angle: the exponential decay rate of follower k's
/// unforced error dynamics.
inline double follower_rate(const TriangleAngles& a) {
    const double s = std::sin(a.at_k);
    return s * s;
}

inline TriangleAngles measure_triangle_angles(const Configuration& p, const Triangle& t) {
    TriangleAngles a;
    a.tri = t;
    a.at_i = signed_angle(p.agent(t.k), p.agent(t.i), p.agent(t.j));
    a.at_j = signed_angle(p.agent(t.i), p.agent(t.j), p.agent(t.k));
    a.at_k = signed_angle(p.agent(t.j), p.agent(t.k), p.agent(t.i));
    return a;
}

/// Measures every triangle of the target and builds its constraint blocks.
/// Throws DegenerateTarget when any triangle is collinear (all of its angle
/// sines vanish together, so the follower block would be singular).
inline AngleConstraintSet extract_angles(const Configuration& p_star, const TriangleSet& ts) {
    AngleConstraintSet acs;
    acs.angles.reserve(ts.size());
    acs.constraints.reserve(ts.size());
    for (const Triangle& t : ts) {
        TriangleAngles a;
        try {
            a = measure_triangle_angles(p_star, t);
        } catch (const CoincidentPoints&) {
            throw DegenerateTarget("target triangle (" + std::to_string(t.i) + "," +
                                   std::to_string(t.j) + "," + std::to_string(t.k) +
                                   ") has coincident vertices");
        }
        if (std::abs(std::sin(a.at_k)) <= kCollinearEps)
            throw DegenerateTarget("target triangle (" + std::to_string(t.i) + "," +
                                   std::to_string(t.j) + "," + std::to_string(t.k) +
                                   ") is collinear");
        acs.angles.push_back(a);
        acs.constraints.push_back(constraint_matrices(a));
    }
    return acs;
}

/// Rebuilds the unique configuration through the anchored recursion
///   q_k = (A_i q_i + A_j q_j) / sin(at_k)
/// triangle by triangle in follower order. The result is the similarity image
/// of the generating target that maps its first two positions onto q1, q2.
inline Configuration reconstruct(Vec2 q1, Vec2 q2, const AngleConstraintSet& acs) {
    if ((q1 - q2).norm() <= kCoincidenceEps)
        throw CoincidentLeaders("reconstruct: anchor points coincide");
    const int n = acs.triangle_count() + 2;
    Configuration q;
    q.positions.resize(static_cast<size_t>(n));
    q.agent(1) = q1;
    q.agent(2) = q2;
    for (int k = 3; k <= n; ++k) {
        const TriangleConstraint& tc = acs.for_follower(k);
        const Vec2 rhs = tc.A_i.apply(q.agent(tc.tri.i)) + tc.A_j.apply(q.agent(tc.tri.j));
        // A_k = -s I, so q_k = -A_k^{-1} rhs = rhs / s.
        q.agent(k) = rhs / (-tc.A_k.a);
    }
    return q;
}

/// The limit configuration reached from stationary leader/first-follower
/// positions: the similarity image of the target fixed by those two points.
struct PredictedLimit {
    double c = 1.0;      // > 0
    double theta = 0.0;  // [0, 2*pi)
    Vec2 xi{};
    Configuration p_dagger;

    SimilarityTransform transform() const { return {c, theta, xi}; }
};

inline PredictedLimit predicted_limit(const Configuration& p_star, Vec2 p1_0, Vec2 p2_0) {
    const Vec2 d0 = p1_0 - p2_0;
    const Vec2 ds = p_star.agent(1) - p_star.agent(2);
    if (d0.norm() <= kCoincidenceEps || ds.norm() <= kCoincidenceEps)
        throw CoincidentLeaders("predicted_limit: leader and first follower coincide");

    PredictedLimit out;
    out.c = d0.norm() / ds.norm();
    const Vec2 b21 = d0 / d0.norm();
    const Vec2 b21_star = ds / ds.norm();
    double dot = b21.dot(b21_star);
    dot = std::fmin(1.0, std::fmax(-1.0, dot));
    const double base = std::acos(dot);
    // Quarter-turn sign test picks between the two arccos branches; ties go
    // to the plain arccos branch.
    const double sign_test = b21.dot(Rot2(kPi / 2.0).apply(b21_star));
    out.theta = wrap_two_pi(sign_test >= 0.0 ? base : kTwoPi - base);
    out.xi = p1_0 - Rot2(out.theta).apply(p_star.agent(1)) * out.c;
    out.p_dagger = apply_similarity(p_star, out.transform());
    return out;
}

}  // namespace angleform
