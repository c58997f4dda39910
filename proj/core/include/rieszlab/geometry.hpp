#ifndef RIESZLAB_GEOMETRY_HPP
#define RIESZLAB_GEOMETRY_HPP

#include <cmath>
#include <stdexcept>

namespace rieszlab {

/// Planar vector; also used for evaluation points.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double a) const { return {a * x, a * y}; }
    constexpr Vec2 operator/(double a) const { return {x / a, y / a}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }

    double norm() const { return std::hypot(x, y); }
    constexpr double norm2() const { return x * x + y * y; }
};

constexpr Vec2 operator*(double a, Vec2 v) { return {a * v.x, a * v.y}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }

using Point2 = Vec2;

/// Closed disk D(c, r), r > 0.
struct Disk {
    Point2 center;
    double radius = 1.0;

    Disk() = default;
    Disk(Point2 c, double r) : center(c), radius(r) {
        if (!(r > 0.0)) throw std::invalid_argument("Disk: radius must be positive");
    }

    bool contains(Point2 p) const { return dist(p, center) <= radius; }
    /// Same center, radius scaled by a.
    Disk scaled(double a) const { return Disk(center, a * radius); }
};

inline double disk_area(const Disk& d) {
    return M_PI * d.radius * d.radius;
}

/// Area of the intersection of disk d with the axis-aligned rectangle
/// [x0,x1] x [y0,y1]. Exact up to floating-point rounding: the double
/// integral of the circle's upper/lower boundary is assembled from the
/// closed-form antiderivative of sqrt(r^2 - t^2).
double disk_rect_intersection_area(const Disk& d, double x0, double x1, double y0, double y1);

} // namespace rieszlab

#endif
