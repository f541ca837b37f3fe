#pragma once

#include <vector>

#include "angleform/constraints.hpp"
#include "angleform/geometry.hpp"

namespace angleform {

enum class Mode { Shape, Maneuver };

/// How agent 2 is steered in maneuver mode. Agents >= 3 always run the angle
/// law; DistanceOnly regulates the leader edge's length, BearingOnly its
/// direction.
enum class FollowerVariant { RelativePosition, DistanceOnly, BearingOnly };

struct ControlMode {
    Mode mode = Mode::Shape;
    FollowerVariant variant = FollowerVariant::RelativePosition;
};

/// Piecewise-constant maneuver reference: common velocity plus the target of
/// p_2 - p_1 (which fixes the formation's scale and orientation).
struct ManeuverReference {
    Vec2 v_r{};
    Vec2 delta_12{};
};

/// Per-agent rotation from the global frame into each agent's local frame.
struct FrameOffsets {
    std::vector<Rot2> to_local;
};

/// Shape-stabilizing law. Agents 1 and 2 receive no control; follower k >= 3
/// applies the linear feedback
///   u_k = -gain * A_k^T (A_i e_ki + A_j e_kj),   e_kh = p_h - p_k,
/// which equals -gain * A_k^T times the triangle's constraint residual.
inline Vec2 shape_control(int k, const Configuration& config, const AngleConstraintSet& acs,
                          double gain = 1.0) {
    if (k <= 2) return {};
    const TriangleConstraint& tc = acs.for_follower(k);
    const Vec2 pk = config.agent(k);
    const Vec2 e_ki = config.agent(tc.tri.i) - pk;
    const Vec2 e_kj = config.agent(tc.tri.j) - pk;
    const Vec2 s = tc.A_i.apply(e_ki) + tc.A_j.apply(e_kj);
    return -gain * tc.A_k.apply_transposed(s);
}

/// Same law evaluated from relative measurements expressed in the agent's own
/// frame; the output is in that frame too. Because every block is a scaled
/// rotation, rotating the result back to the global frame reproduces
/// shape_control exactly.
inline Vec2 local_frame_control(int k, Vec2 e_ki_local, Vec2 e_kj_local,
                                const AngleConstraintSet& acs, double gain = 1.0) {
    if (k <= 2) return {};
    const TriangleConstraint& tc = acs.for_follower(k);
    const Vec2 s = tc.A_i.apply(e_ki_local) + tc.A_j.apply(e_kj_local);
    return -gain * tc.A_k.apply_transposed(s);
}

/// u_2 = -gain * (||e_12||^2 - ||delta*||^2) e_12 with e_12 = p_2 - p_1.
/// Regulates only the length of the leader edge.
inline Vec2 distance_follower_control(Vec2 p1, Vec2 p2, Vec2 delta_star, double gain = 1.0) {
    const Vec2 e12 = p2 - p1;
    return -gain * (e12.norm_sq() - delta_star.norm_sq()) * e12;
}

/// u_2 = gain * P_{b_12} b*_12 with P_b = I - b b^T: steers the leader-edge
/// bearing toward delta*'s direction. Output is orthogonal to b_12; it also
/// vanishes at the antipodal bearing, a saddle that is left as is.
inline Vec2 bearing_follower_control(Vec2 p1, Vec2 p2, Vec2 delta_star, double gain = 1.0) {
    const Vec2 b12 = bearing(p1, p2);
    const Vec2 bs = delta_star / delta_star.norm();
    const Vec2 proj = bs - b12 * b12.dot(bs);
    return gain * proj;
}

/// Maneuver law: the leader tracks v_r openly, agent 2 adds feedback driving
/// p_2 - p_1 toward delta_12 (or the selected distance/bearing variant), and
/// followers add the shape law on top of the common velocity.
inline Vec2 maneuver_control(int k, const Configuration& config, const ManeuverReference& ref,
                             const AngleConstraintSet& acs,
                             FollowerVariant variant = FollowerVariant::RelativePosition,
                             double gain = 1.0) {
    if (k == 1) return ref.v_r;
    if (k == 2) {
        switch (variant) {
            case FollowerVariant::DistanceOnly:
                return ref.v_r + distance_follower_control(config.agent(1), config.agent(2),
                                                           ref.delta_12, gain);
            case FollowerVariant::BearingOnly:
                return ref.v_r + bearing_follower_control(config.agent(1), config.agent(2),
                                                          ref.delta_12, gain);
            case FollowerVariant::RelativePosition:
            default: {
                const Vec2 e12 = config.agent(2) - config.agent(1);
                return ref.v_r - gain * (e12 - ref.delta_12);
            }
        }
    }
    return ref.v_r + shape_control(k, config, acs, gain);
}

}  // namespace angleform
