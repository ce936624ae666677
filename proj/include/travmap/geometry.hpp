#ifndef TRAVMAP_GEOMETRY_HPP
#define TRAVMAP_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <numbers>

namespace travmap {

struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
    Vec2 operator+(const Vec2& o) const { return { x + o.x, y + o.y }; }
    Vec2 operator-(const Vec2& o) const { return { x - o.x, y - o.y }; }
    Vec2 operator*(double s) const { return { x * s, y * s }; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;
    Vec3 operator+(const Vec3& o) const { return { x + o.x, y + o.y, z + o.z }; }
    Vec3 operator-(const Vec3& o) const { return { x - o.x, y - o.y, z - o.z }; }
    Vec3 operator*(double s) const { return { x * s, y * s, z * s }; }
};

/* Wrap an angle into (-pi, pi] */
inline double normalize_angle(double a)
{
    double r = std::remainder(a, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi)
        r += 2.0 * std::numbers::pi;
    return r;
}

/* Planar rigid transform; theta is kept in (-pi, pi] */
struct Pose2
{
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Pose2() = default;
    Pose2(double x_, double y_, double theta_)
        : x(x_), y(y_), theta(normalize_angle(theta_)) { }

    Vec2 translation() const { return { x, y }; }
    friend bool operator==(const Pose2&, const Pose2&) = default;
};

/* a (+) b: b expressed in a's frame, brought to a's parent frame */
inline Pose2 se2_compose(const Pose2& a, const Pose2& b)
{
    const double c = std::cos(a.theta);
    const double s = std::sin(a.theta);
    return { a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y,
             a.theta + b.theta };
}

inline Pose2 se2_inverse(const Pose2& a)
{
    const double c = std::cos(a.theta);
    const double s = std::sin(a.theta);
    return { -c * a.x - s * a.y, s * a.x - c * a.y, -a.theta };
}

/* Pose of b relative to a */
inline Pose2 se2_between(const Pose2& a, const Pose2& b)
{
    return se2_compose(se2_inverse(a), b);
}

/* Map a point expressed in the frame of pose into the parent frame */
inline Vec2 se2_apply(const Pose2& pose, const Vec2& p)
{
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    return { pose.x + c * p.x - s * p.y, pose.y + s * p.x + c * p.y };
}

/* Inverse of se2_apply */
inline Vec2 se2_apply_inverse(const Pose2& pose, const Vec2& p)
{
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    const double dx = p.x - pose.x;
    const double dy = p.y - pose.y;
    return { c * dx + s * dy, -s * dx + c * dy };
}

/* Distance from point p to the closed segment ab */
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b)
{
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    double t = 0.0;
    if (len2 > 0.0)
        t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

} // namespace travmap

#endif // TRAVMAP_GEOMETRY_HPP
