#include <cmath>
#include <numbers>

#include "travmap/scenesim.hpp"

namespace travmap {

namespace {

constexpr double kPi = std::numbers::pi;

/* Table stock: 0.6 m wide, 2.5 m long, 0.7 m tall */
ObstacleBox table(double cx, double cy, bool long_axis_along_y)
{
    ObstacleBox b;
    b.center = { cx, cy };
    b.half_extents = long_axis_along_y ? Vec2 { 0.30, 1.25 } : Vec2 { 1.25, 0.30 };
    b.top_height = 0.70;
    b.yaw = 0.0;
    return b;
}

/* Walk through the points at constant speed, facing the direction of travel */
AgentTrajectory walk(const std::vector<Vec2>& points, double t_start, double speed,
                     double body_height = 1.70)
{
    AgentTrajectory traj;
    traj.role = AgentRole::Human;
    traj.body_height = body_height;
    double t = t_start;
    double heading = std::atan2(points[1].y - points[0].y, points[1].x - points[0].x);
    traj.waypoints.push_back({ t, Pose2(points[0].x, points[0].y, heading) });
    for (std::size_t k = 1; k < points.size(); ++k) {
        const Vec2 d = points[k] - points[k - 1];
        heading = std::atan2(d.y, d.x);
        /* Turn in place at the corner before the next leg */
        if (k > 1 && normalize_angle(heading - traj.waypoints.back().pose.theta) != 0.0) {
            t += 0.5;
            traj.waypoints.push_back({ t, Pose2(points[k - 1].x, points[k - 1].y, heading) });
        }
        t += d.norm() / speed;
        traj.waypoints.push_back({ t, Pose2(points[k].x, points[k].y, heading) });
    }
    return traj;
}

/* Side-facing camera looking along +x while the robot shuttles along y,
 * 20 m in 60 s */
AgentTrajectory robot_shuttle(double x)
{
    AgentTrajectory traj;
    traj.role = AgentRole::Robot;
    traj.body_height = 0.0;
    const double y_lo = 0.5;
    const double y_hi = 5.5;
    for (int leg = 0; leg <= 4; ++leg)
        traj.waypoints.push_back({ 15.0 * leg, Pose2(x, leg % 2 == 0 ? y_lo : y_hi, 0.0) });
    return traj;
}

SceneConfig base_scene(const char* name)
{
    SceneConfig cfg;
    cfg.name = name;
    cfg.bounds = { 0.0, 0.0, 3.0, 6.0 };
    cfg.robot = robot_shuttle(0.4);
    return cfg;
}

} // namespace

SceneConfig builtin_config(SceneKind kind)
{
    switch (kind) {
    case SceneKind::I: {
        SceneConfig cfg = base_scene("I");
        cfg.obstacles = { table(0.9, 3.0, true), table(2.9, 3.0, true) };
        /* Up and down the aisle for the whole minute */
        std::vector<Vec2> pts;
        for (int pass = 0; pass < 8; ++pass)
            pts.push_back({ 1.9, pass % 2 == 0 ? 0.2 : 5.8 });
        cfg.humans = { walk(pts, 0.0, 0.8) };
        return cfg;
    }
    case SceneKind::L: {
        SceneConfig cfg = base_scene("L");
        cfg.obstacles = { table(0.9, 2.6, true), table(1.75, 4.6, false) };
        cfg.humans = { walk({ { 1.9, 0.2 }, { 1.9, 3.7 }, { 2.9, 3.7 } }, 4.0, 0.6),
                       walk({ { 1.9, 0.2 }, { 1.9, 3.7 }, { 2.9, 3.7 } }, 34.0, 0.6) };
        return cfg;
    }
    case SceneKind::T: {
        SceneConfig cfg = base_scene("T");
        cfg.obstacles = { table(0.9, 2.0, true), table(2.9, 2.0, true), table(1.75, 5.0, false) };
        cfg.humans = { walk({ { 1.9, 0.2 }, { 1.9, 4.0 }, { 0.2, 4.0 } }, 2.0, 0.6),
                       walk({ { 2.9, 4.0 }, { 1.9, 4.0 }, { 1.9, 0.2 } }, 20.0, 0.6),
                       walk({ { 1.9, 0.2 }, { 1.9, 4.0 }, { 2.9, 4.0 } }, 38.0, 0.6) };
        return cfg;
    }
    }
    return base_scene("?");
}

} // namespace travmap
