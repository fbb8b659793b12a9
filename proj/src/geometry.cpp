#include "hdmetric/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace hdmetric {

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

double wrap_unit(double v) {
    double w = v - std::floor(v);
    // floor can round v - floor(v) up to exactly 1 for tiny negative v
    if (w >= 1.0) w = 0.0;
    return w;
}

TorusPoint::TorusPoint(double x, double y) : x_(wrap_unit(x)), y_(wrap_unit(y)) {}

TorusPoint TorusPoint::shifted(Vec2 v) const { return {x_ + v.x, y_ + v.y}; }

namespace {

double min_image_1d(double d) {
    if (d > 0.5) return d - 1.0;
    if (d < -0.5) return d + 1.0;
    return d;
}

}  // namespace

Vec2 min_image(const TorusPoint& p, const TorusPoint& q) {
    return {min_image_1d(q.x() - p.x()), min_image_1d(q.y() - p.y())};
}

double torus_dist(const TorusPoint& p, const TorusPoint& q) { return norm(min_image(p, q)); }

double ball_volume(int dim, double radius) {
    if (dim <= 0) throw GeometryError("ball_volume: dimension must be positive");
    if (radius < 0.0) throw GeometryError("ball_volume: negative radius");
    const double half = 0.5 * dim;
    return std::pow(std::numbers::pi, half) * std::pow(radius, dim) / std::tgamma(half + 1.0);
}

bool LocalChart::covers(const TorusPoint& p) const {
    const Vec2 v = to_local(p);
    return std::abs(v.x) < 0.25 && std::abs(v.y) < 0.25;
}

double crescent_area(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 4.0))
        throw GeometryError("crescent_area: lambda must lie in [0, 4]");
    const double root = std::sqrt(std::max(0.0, 4.0 - lambda * lambda / 4.0));
    return 8.0 * std::asin(lambda / 4.0) + lambda * root;
}

double crescent_angle(double u, double lambda) {
    if (!(u >= 0.0)) throw GeometryError("crescent_angle: u must be nonnegative");
    if (!(lambda > 0.0 && lambda <= 4.0))
        throw GeometryError("crescent_angle: lambda must lie in (0, 4]");
    if (u < lambda - 2.0) return 0.0;
    if (u < 2.0 - lambda) return std::numbers::pi;
    // u == 0 with lambda == 2 lands here; the circle degenerates to y itself,
    // which sits on the boundary of Z(x).
    if (u == 0.0) return std::numbers::pi / 2.0;
    const double c = (u * u + lambda * lambda - 4.0) / (2.0 * lambda * u);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

TorusPoint reflect_across_bisector(const TorusPoint& z, const TorusPoint& a, const TorusPoint& b) {
    const Vec2 ab = min_image(a, b);
    const double len = norm(ab);
    if (len == 0.0) throw GeometryError("reflect_across_bisector: a and b coincide");
    const LocalChart chart(a.shifted(0.5 * ab));
    if (!chart.covers(a) || !chart.covers(b) || !chart.covers(z))
        throw GeometryError("reflect_across_bisector: points do not fit a local chart");
    const Vec2 n = (1.0 / len) * ab;
    const Vec2 local = chart.to_local(z);
    return chart.to_torus(local - (2.0 * dot(local, n)) * n);
}

}  // namespace hdmetric
