#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "angleform/geometry.hpp"

namespace angleform {

/// Directed sensing graph with leader/first-follower structure:
/// agent 1 senses nobody, agent 2 senses agent 1 only, and every agent k >= 3
/// senses exactly two distinct lower-indexed agents.
struct SensingGraph {
    int n = 0;
    /// out_neighbors[i] lists the (1-based) agents sensed by agent i+1.
    std::vector<std::vector<int>> out_neighbors;

    const std::vector<int>& neighbors(int agent) const {
        return out_neighbors[static_cast<size_t>(agent) - 1];
    }
};

/// Undirected formation graph: sensing edges plus, for each follower, the
/// closure edge between its two neighbors.
struct FormationGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // each (a, b) with a < b, sorted

    bool has_edge(int a, int b) const {
        if (a > b) std::swap(a, b);
        return std::binary_search(edges.begin(), edges.end(), std::make_pair(a, b));
    }
};

struct Triangle {
    int i = 0, j = 0, k = 0;  // i < j < k; k is the follower

    bool operator==(const Triangle&) const = default;
};

using TriangleSet = std::vector<Triangle>;

/// Checks the leader/first-follower invariants. Returns an empty list when the
/// graph is valid; otherwise one message per violation, naming the agent and rule.
inline std::vector<std::string> validate_lff(const SensingGraph& g) {
    std::vector<std::string> violations;
    if (g.n < 3) violations.push_back("graph: agent count must be >= 3");
    if (static_cast<int>(g.out_neighbors.size()) != g.n) {
        violations.push_back("graph: neighbor lists do not cover all agents");
        return violations;
    }
    for (int a = 1; a <= g.n; ++a) {
        const auto& nb = g.neighbors(a);
        const size_t expected = a == 1 ? 0 : a == 2 ? 1 : 2;
        if (nb.size() != expected)
            violations.push_back("agent " + std::to_string(a) + ": must have " +
                                 std::to_string(expected) + " out-neighbors, has " +
                                 std::to_string(nb.size()));
        for (int b : nb) {
            if (b < 1 || b > g.n)
                violations.push_back("agent " + std::to_string(a) + ": neighbor " +
                                     std::to_string(b) + " out of range");
            else if (b == a)
                violations.push_back("agent " + std::to_string(a) + ": self-loop");
            else if (b > a)
                violations.push_back("agent " + std::to_string(a) + ": edge (" +
                                     std::to_string(a) + "," + std::to_string(b) +
                                     ") points to higher index");
        }
        if (nb.size() == 2 && nb[0] == nb[1])
            violations.push_back("agent " + std::to_string(a) + ": duplicate neighbor " +
                                 std::to_string(nb[0]));
        if (a == 2 && nb.size() == 1 && nb[0] != 1)
            violations.push_back("agent 2: must sense agent 1, senses " +
                                 std::to_string(nb[0]));
    }
    return violations;
}

namespace detail {
inline void require_valid_lff(const SensingGraph& g) {
    auto v = validate_lff(g);
    if (!v.empty()) throw InvalidSensingGraph("invalid sensing graph: " + v.front());
}
}  // namespace detail

inline FormationGraph build_formation_graph(const SensingGraph& g) {
    detail::require_valid_lff(g);
    std::set<std::pair<int, int>> e;
    auto add = [&e](int a, int b) {
        if (a > b) std::swap(a, b);
        e.emplace(a, b);
    };
    for (int a = 1; a <= g.n; ++a) {
        const auto& nb = g.neighbors(a);
        for (int b : nb) add(a, b);
        if (nb.size() == 2) add(nb[0], nb[1]);  // closure edge between the neighbor pair
    }
    FormationGraph f;
    f.n = g.n;
    f.edges.assign(e.begin(), e.end());
    return f;
}

/// One triangle per follower k >= 3, ordered by follower index.
inline TriangleSet triangle_set(const SensingGraph& g) {
    detail::require_valid_lff(g);
    TriangleSet ts;
    ts.reserve(static_cast<size_t>(g.n) - 2);
    for (int k = 3; k <= g.n; ++k) {
        const auto& nb = g.neighbors(k);
        ts.push_back({std::min(nb[0], nb[1]), std::max(nb[0], nb[1]), k});
    }
    return ts;
}

/// True when no follower's two target edges are collinear and the leader and
/// first follower occupy distinct target positions.
inline bool check_strong_nondegeneracy(const Configuration& p_star, const SensingGraph& g) {
    if (p_star.size() != g.n) return false;
    if (!validate_lff(g).empty()) return false;
    if ((p_star.agent(1) - p_star.agent(2)).norm() <= kCoincidenceEps) return false;
    for (int k = 3; k <= g.n; ++k) {
        const auto& nb = g.neighbors(k);
        const Vec2 pk = p_star.agent(k);
        const Vec2 di = p_star.agent(nb[0]) - pk;
        const Vec2 dj = p_star.agent(nb[1]) - pk;
        if (di.norm() <= kCoincidenceEps || dj.norm() <= kCoincidenceEps) return false;
        const Vec2 bi = di / di.norm();
        const Vec2 bj = dj / dj.norm();
        if (std::abs(bi.cross(bj)) <= kCollinearEps) return false;
    }
    return true;
}

}  // namespace angleform
