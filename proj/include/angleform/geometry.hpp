#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "angleform/errors.hpp"

namespace angleform {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Distance below which two points are treated as coincident (meters).
/// Well above double-precision noise, far below any scenario scale.
inline constexpr double kCoincidenceEps = 1e-9;

/// Collinearity threshold on |det| of a unit-bearing pair.
inline constexpr double kCollinearEps = 1e-9;

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

/// Normalize an angle into [0, 2*pi).
inline double wrap_two_pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

/// Wrap an angle difference into (-pi, pi].
inline double wrap_pi(double a) {
    double r = std::remainder(a, kTwoPi);
    if (r <= -kPi) r += kTwoPi;
    return r;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    /// z-component of the cross product, positive when `o` is counterclockwise of *this.
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm_sq() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Planar rotation, angle stored in [0, 2*pi).
struct Rot2 {
    double theta = 0.0;
    double c = 1.0;
    double s = 0.0;

    Rot2() = default;
    explicit Rot2(double angle)
        : theta(wrap_two_pi(angle)), c(std::cos(theta)), s(std::sin(theta)) {}

    Vec2 apply(Vec2 v) const { return {c * v.x - s * v.y, s * v.x + c * v.y}; }
    Vec2 apply_transposed(Vec2 v) const { return {c * v.x + s * v.y, -s * v.x + c * v.y}; }
    Rot2 transposed() const { return Rot2(-theta); }
    Rot2 operator*(const Rot2& o) const { return Rot2(theta + o.theta); }
    double det() const { return c * c + s * s; }
};

inline Rot2 rotation_matrix(double theta) { return Rot2(theta); }

/// q_i = c * R(theta) * p_i + xi, with c != 0. Rotation only, no reflection.
struct SimilarityTransform {
    double c = 1.0;
    double theta = 0.0;
    Vec2 xi{};

    Vec2 apply(Vec2 p) const { return Rot2(theta).apply(p) * c + xi; }
};

/// Ordered planar positions; index i (0-based) holds agent i+1.
struct Configuration {
    std::vector<Vec2> positions;

    Configuration() = default;
    explicit Configuration(std::vector<Vec2> p) : positions(std::move(p)) {}

    int size() const { return static_cast<int>(positions.size()); }
    /// 1-based agent access, matching the external numbering convention.
    const Vec2& agent(int id) const { return positions[static_cast<size_t>(id) - 1]; }
    Vec2& agent(int id) { return positions[static_cast<size_t>(id) - 1]; }
};

/// Unit vector from `p_from` toward `p_to`.
/// Throws CoincidentPoints when the two are closer than kCoincidenceEps.
inline Vec2 bearing(Vec2 p_from, Vec2 p_to) {
    const Vec2 d = p_to - p_from;
    const double n = d.norm();
    if (n <= kCoincidenceEps)
        throw CoincidentPoints("bearing: points coincide");
    return d / n;
}

/// Signed angle at vertex p_j, measured as the clockwise sweep from the
/// bearing toward p_i to the bearing toward p_k, valued in [0, 2*pi):
/// arccos of the bearing dot product when the bearing pair determinant is
/// <= 0, otherwise 2*pi minus it. The arccos argument is clamped to [-1, 1].
inline double signed_angle(Vec2 p_i, Vec2 p_j, Vec2 p_k) {
    const Vec2 b_ji = bearing(p_j, p_i);
    const Vec2 b_jk = bearing(p_j, p_k);
    double d = b_ji.dot(b_jk);
    d = std::fmin(1.0, std::fmax(-1.0, d));
    const double a = std::acos(d);
    const double det = b_ji.cross(b_jk);
    return wrap_two_pi(det <= 0.0 ? a : kTwoPi - a);
}

inline Configuration apply_similarity(const Configuration& config, const SimilarityTransform& t) {
    Configuration out;
    out.positions.reserve(config.positions.size());
    for (const Vec2& p : config.positions) out.positions.push_back(t.apply(p));
    return out;
}

inline Vec2 centroid(const Configuration& config) {
    Vec2 c{};
    for (const Vec2& p : config.positions) c += p;
    return c / static_cast<double>(config.positions.size());
}

/// Least-squares similarity fit q ~ c R(theta) p + xi over rotations and
/// positive scale (translation via centroids). Closed form: treating centered
/// points as complex numbers, the optimal c e^{i theta} is
/// sum(conj(P) Q) / sum(|P|^2).
/// Throws DegenerateReference when p has no spread.
inline SimilarityTransform fit_similarity(const Configuration& q, const Configuration& p) {
    if (q.size() != p.size() || p.size() < 2)
        throw DegenerateReference("fit_similarity: size mismatch or too few points");
    const Vec2 pc = centroid(p);
    const Vec2 qc = centroid(q);
    double d = 0.0, a = 0.0, b = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        const Vec2 pi = p.positions[static_cast<size_t>(i)] - pc;
        const Vec2 qi = q.positions[static_cast<size_t>(i)] - qc;
        d += pi.norm_sq();
        a += pi.dot(qi);
        b += pi.cross(qi);
    }
    if (d <= kCoincidenceEps * kCoincidenceEps)
        throw DegenerateReference("fit_similarity: reference has zero spread");
    SimilarityTransform t;
    t.c = std::hypot(a, b) / d;
    t.theta = wrap_two_pi(std::atan2(b, a));
    t.xi = qc - Rot2(t.theta).apply(pc) * t.c;
    return t;
}

/// Residual of the best similarity fit of p onto q, normalized by the spread
/// of p. Zero (up to round-off) exactly when q and p have the same shape.
/// Scale of either sign is covered: a negative scale equals a positive scale
/// composed with a half-turn, which the rotation fit already reaches.
inline double shape_distance(const Configuration& q, const Configuration& p) {
    if (q.size() != p.size() || p.size() < 2)
        throw DegenerateReference("shape_distance: size mismatch or too few points");
    const Vec2 pc = centroid(p);
    const Vec2 qc = centroid(q);
    double d = 0.0, a = 0.0, b = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        const Vec2 pi = p.positions[static_cast<size_t>(i)] - pc;
        const Vec2 qi = q.positions[static_cast<size_t>(i)] - qc;
        d += pi.norm_sq();
        a += pi.dot(qi);
        b += pi.cross(qi);
    }
    if (d <= kCoincidenceEps * kCoincidenceEps)
        throw DegenerateReference("shape_distance: reference has zero spread");
    // Apply the optimal map and sum the residual pointwise; the algebraic
    // shortcut qq - (a^2 + b^2)/d cancels catastrophically near zero.
    const double wa = a / d, wb = b / d;
    double resid_sq = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        const Vec2 pi = p.positions[static_cast<size_t>(i)] - pc;
        const Vec2 qi = q.positions[static_cast<size_t>(i)] - qc;
        const Vec2 r{qi.x - (wa * pi.x - wb * pi.y), qi.y - (wb * pi.x + wa * pi.y)};
        resid_sq += r.norm_sq();
    }
    return std::sqrt(resid_sq / d);
}

}  // namespace angleform
