#pragma once

#include "angleform/sim.hpp"

namespace angleform {

/// Six-agent reference sensing graph: 3 senses {1,2}, 4 senses {2,3},
/// 5 and 6 sense {1,4}.
inline SensingGraph reference_graph_6() {
    SensingGraph g;
    g.n = 6;
    g.out_neighbors = {{}, {1}, {1, 2}, {2, 3}, {1, 4}, {1, 4}};
    return g;
}

/// Six-agent reference target. Agents 1-4 form a 0.7 m square, agents 5 and 6
/// sit on the square's diagonal axis. The follower angles give decay rates
/// 0.5, 1.0, 0.64 and 0.64 for agents 3-6.
inline Configuration reference_target_6() {
    return Configuration{{
        {-1.00, 0.80},
        {-1.00, 0.10},
        {-1.70, 0.80},
        {-1.70, 0.10},
        {-0.65, -0.25},
        {-2.05, 1.15},
    }};
}

/// Shape-stabilization scenario: six agents, stationary leader pair,
/// followers released from scattered starts.
inline Scenario builtin_shape_scenario() {
    Scenario s;
    s.graph = reference_graph_6();
    s.p_star = reference_target_6();
    s.p0 = Configuration{{
        {0.0, 0.5},
        {-0.5, 0.0},
        {0.0, 0.025},
        {0.25, 0.4},
        {0.5, -0.35},
        {0.6, 0.2},
    }};
    s.mode = {Mode::Shape, FollowerVariant::RelativePosition};
    s.dt = 0.01;
    s.duration = 60.0;
    return s;
}

/// Maneuver scenario: three reference segments switching at t = 50 s and
/// t = 90 s. The third segment shrinks the leader edge to 0.7 of the second's.
inline Scenario builtin_maneuver_scenario() {
    Scenario s;
    s.graph = reference_graph_6();
    s.p_star = reference_target_6();
    s.p0 = Configuration{{
        {-0.4, -0.35},
        {-1.1, -0.4},
        {0.0, 0.025},
        {0.25, 0.4},
        {0.5, -0.35},
        {0.6, 0.2},
    }};
    s.mode = {Mode::Maneuver, FollowerVariant::RelativePosition};
    s.schedule = {
        {0.0, 50.0, {{0.0, 0.02}, {0.4, 0.4}}},
        {50.0, 90.0, {{0.05, 0.0}, {0.4, -0.4}}},    // quarter turn clockwise
        {90.0, 120.0, {{0.04, 0.0}, {0.28, -0.28}}}, // shrunk to 0.7x
    };
    s.dt = 0.01;
    s.duration = 120.0;
    return s;
}

}  // namespace angleform
