#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace hdmetric {

/// Raised when a geometric precondition fails (bad domain, chart too large).
class GeometryError : public std::domain_error {
public:
    explicit GeometryError(const std::string& what) : std::domain_error(what) {}
};

/// Close-packing density of disks in the plane (triangular lattice).
inline constexpr double kPackingDensity = std::numbers::pi * std::numbers::sqrt3 / 6.0;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

double dot(Vec2 a, Vec2 b);
double norm(Vec2 a);

/// A point on the unit 2-torus. Coordinates are always kept in [0,1).
class TorusPoint {
public:
    TorusPoint() = default;
    TorusPoint(double x, double y);

    double x() const { return x_; }
    double y() const { return y_; }

    /// Translate by a plane vector and wrap back onto the torus.
    TorusPoint shifted(Vec2 v) const;

    friend bool operator==(const TorusPoint&, const TorusPoint&) = default;

private:
    double x_ = 0.0;
    double y_ = 0.0;
};

/// Wrap a coordinate into [0,1).
double wrap_unit(double v);

/// Minimal-image difference q - p, each component in [-1/2, 1/2].
Vec2 min_image(const TorusPoint& p, const TorusPoint& q);

/// Torus distance under the minimal-image convention; at most sqrt(2)/2.
double torus_dist(const TorusPoint& p, const TorusPoint& q);

/// Squared torus distance. Hard-core checks compare this against (2r)^2.
inline double torus_dist2(const TorusPoint& p, const TorusPoint& q) {
    double dx = q.x() - p.x();
    double dy = q.y() - p.y();
    if (dx > 0.5) dx -= 1.0; else if (dx < -0.5) dx += 1.0;
    if (dy > 0.5) dy -= 1.0; else if (dy < -0.5) dy += 1.0;
    return dx * dx + dy * dy;
}

/// Volume of the dim-dimensional ball of the given radius.
double ball_volume(int dim, double radius);

/// Euclidean plane coordinates around an origin on the torus. Valid for
/// points within 1/4 of the origin.
class LocalChart {
public:
    explicit LocalChart(const TorusPoint& origin) : origin_(origin) {}

    const TorusPoint& origin() const { return origin_; }
    Vec2 to_local(const TorusPoint& p) const { return min_image(origin_, p); }
    TorusPoint to_torus(Vec2 v) const { return origin_.shifted(v); }
    bool covers(const TorusPoint& p) const;

private:
    TorusPoint origin_;
};

// All crescent formulas below work in units of the disk radius r: the two
// danger zones have radius 2 and their centers are lambda apart.

/// Area of Z(y) \ Z(x) for two radius-2 disks whose centers are lambda apart,
/// 0 <= lambda <= 4.
double crescent_area(double lambda);

/// Half-angle theta(u, lambda) of the arc at distance u from y that lies
/// outside Z(x); the crescent covers the fraction (pi - theta)/pi of that circle.
double crescent_angle(double u, double lambda);

/// Mirror z across the perpendicular bisector of segment ab, computed in a
/// chart centered at the midpoint of a and b.
TorusPoint reflect_across_bisector(const TorusPoint& z, const TorusPoint& a, const TorusPoint& b);

}  // namespace hdmetric
