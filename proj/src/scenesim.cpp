#include "travmap/scenesim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "travmap/random.hpp"

namespace travmap {

namespace {

constexpr double kContainEps = 1e-9;
/* Overlap (in meters along the ray) below which a line of sight only
 * touches a surface, e.g. a feature lying on the face of its own table */
constexpr double kGrazeLength = 1e-7;
/* Samples along the body axis used to find the visible body extent */
constexpr int kBodySamples = 200;

/* Clip [tmin, tmax] against lo <= p + t d <= hi */
bool clip_slab(double p, double d, double lo, double hi, double& tmin, double& tmax)
{
    if (std::abs(d) < 1e-15)
        return p >= lo && p <= hi;
    double t0 = (lo - p) / d;
    double t1 = (hi - p) / d;
    if (t0 > t1)
        std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    return tmin <= tmax;
}

bool segment_hits_box(const Vec3& a, const Vec3& b, const ObstacleBox& box)
{
    const double c = std::cos(box.yaw);
    const double s = std::sin(box.yaw);
    auto to_local = [&](const Vec3& p) {
        const double dx = p.x - box.center.x;
        const double dy = p.y - box.center.y;
        return Vec3 { c * dx + s * dy, -s * dx + c * dy, p.z };
    };
    const Vec3 la = to_local(a);
    const Vec3 d = to_local(b) - la;

    double tmin = 0.0;
    double tmax = 1.0;
    if (!clip_slab(la.x, d.x, -box.half_extents.x, box.half_extents.x, tmin, tmax) ||
        !clip_slab(la.y, d.y, -box.half_extents.y, box.half_extents.y, tmin, tmax) ||
        !clip_slab(la.z, d.z, 0.0, box.top_height, tmin, tmax))
        return false;
    const double length = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    return (tmax - tmin) * length > kGrazeLength;
}

bool segment_hits_cylinder(const Vec3& a, const Vec3& b, const Vec2& center,
                           double radius, double height)
{
    const Vec3 d = b - a;
    double tmin = 0.0;
    double tmax = 1.0;

    const double px = a.x - center.x;
    const double py = a.y - center.y;
    const double qa = d.x * d.x + d.y * d.y;
    const double qb = 2.0 * (px * d.x + py * d.y);
    const double qc = px * px + py * py - radius * radius;
    if (qa < 1e-18) {
        if (qc > 0.0)
            return false;
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc < 0.0)
            return false;
        const double sq = std::sqrt(disc);
        tmin = std::max(tmin, (-qb - sq) / (2.0 * qa));
        tmax = std::min(tmax, (-qb + sq) / (2.0 * qa));
        if (tmin > tmax)
            return false;
    }
    if (!clip_slab(a.z, d.z, 0.0, height, tmin, tmax))
        return false;
    const double length = std::sqrt(qa + d.z * d.z);
    return (tmax - tmin) * length > kGrazeLength;
}

Vec3 optical_center(const CameraIntrinsics& intr, const Pose2& cam)
{
    return { cam.x, cam.y, intr.cam_height };
}

bool in_image(const CameraIntrinsics& intr, double u, double v)
{
    return u >= 0.0 && u < intr.image_width && v >= 0.0 && v < intr.image_height;
}

} // namespace

void CameraIntrinsics::validate() const
{
    if (!(f > 0.0))
        throw std::invalid_argument("camera focal length must be positive");
    if (image_width <= 0 || image_height <= 0)
        throw std::invalid_argument("camera image size must be positive");
    if (!(cx >= 0.0 && cx < image_width && cy >= 0.0 && cy < image_height))
        throw std::invalid_argument("camera principal point must lie inside the image");
    if (!(cam_height > 0.0))
        throw std::invalid_argument("camera height must be positive");
}

std::vector<Vec2> ObstacleBox::corners() const
{
    const Pose2 frame(center.x, center.y, yaw);
    const double hx = half_extents.x;
    const double hy = half_extents.y;
    return { se2_apply(frame, { -hx, -hy }), se2_apply(frame, { hx, -hy }),
             se2_apply(frame, { hx, hy }), se2_apply(frame, { -hx, hy }) };
}

double ObstacleBox::footprint_distance(const Vec2& p) const
{
    const Vec2 local = se2_apply_inverse(Pose2(center.x, center.y, yaw), p);
    const double dx = std::max(std::abs(local.x) - half_extents.x, 0.0);
    const double dy = std::max(std::abs(local.y) - half_extents.y, 0.0);
    return std::hypot(dx, dy);
}

void AgentTrajectory::validate() const
{
    if (waypoints.empty())
        throw std::invalid_argument("trajectory needs at least one waypoint");
    for (std::size_t k = 1; k < waypoints.size(); ++k)
        if (!(waypoints[k].t > waypoints[k - 1].t))
            throw std::invalid_argument("trajectory timestamps must be strictly increasing");
    if (role == AgentRole::Human && !(body_height >= 1.52 && body_height <= 1.83))
        throw std::invalid_argument("human body height must lie in [1.52, 1.83] m");
}

Pose2 AgentTrajectory::pose_at(double t) const
{
    if (t <= waypoints.front().t)
        return waypoints.front().pose;
    if (t >= waypoints.back().t)
        return waypoints.back().pose;

    const auto next = std::upper_bound(
        waypoints.begin(), waypoints.end(), t,
        [](double value, const TimedPose& w) { return value < w.t; });
    const TimedPose& b = *next;
    const TimedPose& a = *(next - 1);
    const double s = (t - a.t) / (b.t - a.t);
    const double dyaw = normalize_angle(b.pose.theta - a.pose.theta);
    return { a.pose.x + s * (b.pose.x - a.pose.x), a.pose.y + s * (b.pose.y - a.pose.y),
             a.pose.theta + s * dyaw };
}

double AgentTrajectory::angular_speed_at(double t) const
{
    if (waypoints.size() < 2 || t < waypoints.front().t || t > waypoints.back().t)
        return 0.0;
    /* The segment starting at or before t; the final instant uses the last one */
    auto next = std::upper_bound(
        waypoints.begin(), waypoints.end(), t,
        [](double value, const TimedPose& w) { return value < w.t; });
    if (next == waypoints.end())
        --next;
    const TimedPose& b = *next;
    const TimedPose& a = *(next - 1);
    return normalize_angle(b.pose.theta - a.pose.theta) / (b.t - a.t);
}

void SceneConfig::validate() const
{
    if (!(bounds.x_max > bounds.x_min) || !(bounds.y_max > bounds.y_min))
        throw std::invalid_argument("scene bounds must have positive extent");
    intrinsics.validate();
    if (!(fps > 0.0))
        throw std::invalid_argument("fps must be positive");
    if (!(feature_spacing > 0.0))
        throw std::invalid_argument("feature spacing must be positive");
    if (!(robot_radius >= 0.0))
        throw std::invalid_argument("robot radius must be non-negative");
    if (odom_sigma_trans < 0.0 || odom_sigma_rot < 0.0)
        throw std::invalid_argument("odometry noise must be non-negative");
    for (const auto& o : obstacles)
        if (!(o.half_extents.x > 0.0 && o.half_extents.y > 0.0 && o.top_height > 0.0))
            throw std::invalid_argument("obstacle extents and height must be positive");

    auto inside = [&](const Vec2& p) {
        return p.x >= bounds.x_min - kContainEps && p.x <= bounds.x_max + kContainEps &&
               p.y >= bounds.y_min - kContainEps && p.y <= bounds.y_max + kContainEps;
    };
    auto check = [&](const AgentTrajectory& a, const char* who) {
        a.validate();
        for (const auto& w : a.waypoints)
            if (!inside(w.pose.translation()))
                throw std::invalid_argument(std::string(who) + " trajectory leaves the scene bounds");
    };
    if (robot.role != AgentRole::Robot)
        throw std::invalid_argument("robot trajectory must have the robot role");
    check(robot, "robot");
    for (const auto& h : humans) {
        if (h.role != AgentRole::Human)
            throw std::invalid_argument("human trajectory must have the human role");
        check(h, "human");
    }
}

SceneKind parse_scene_kind(const std::string& text)
{
    if (text == "I" || text == "i")
        return SceneKind::I;
    if (text == "L" || text == "l")
        return SceneKind::L;
    if (text == "T" || text == "t")
        return SceneKind::T;
    throw std::invalid_argument("unknown built-in scenario '" + text + "'");
}

const char* to_string(SceneKind k)
{
    switch (k) {
    case SceneKind::I: return "I";
    case SceneKind::L: return "L";
    case SceneKind::T: return "T";
    }
    return "?";
}

TraversabilityMap ground_truth_map(const SceneConfig& cfg, double resolution)
{
    auto map = TraversabilityMap::create(cfg.bounds.x_min, cfg.bounds.y_min,
                                         cfg.bounds.x_max, cfg.bounds.y_max, resolution);
    for (int j = 0; j < map.height(); ++j)
        for (int i = 0; i < map.width(); ++i) {
            const Vec2 c = map.cell_to_world({ i, j });
            bool blocked = false;
            for (const auto& o : cfg.obstacles)
                if (o.footprint_distance(c) <= cfg.robot_radius + kContainEps) {
                    blocked = true;
                    break;
                }
            map.set({ i, j }, blocked ? CellState::Untraversable : CellState::Traversable);
        }
    return map;
}

Projection project_point(const CameraIntrinsics& intr, const Pose2& cam, const Vec3& p)
{
    const Vec2 local = se2_apply_inverse(cam, { p.x, p.y });
    const double z_c = local.x;            /* forward */
    const double x_c = -local.y;           /* right of heading */
    const double y_c = intr.cam_height - p.z; /* down */
    if (!(z_c > 0.0))
        throw std::domain_error("point is behind the camera");
    return { intr.cx + intr.f * x_c / z_c, intr.cy + intr.f * y_c / z_c, z_c };
}

Vec3 camera_to_world(const CameraIntrinsics& intr, const Pose2& cam,
                     double x_c, double y_c, double z_c)
{
    const Vec2 w = se2_apply(cam, { z_c, -x_c });
    return { w.x, w.y, intr.cam_height - y_c };
}

Visibility occlusion_test(const CameraIntrinsics& intr, const Pose2& cam, const Vec3& target,
                          std::span<const ObstacleBox> obstacles,
                          std::span<const HumanBody> humans,
                          std::optional<std::size_t> skip_human)
{
    const Vec3 eye = optical_center(intr, cam);
    for (const auto& o : obstacles)
        if (segment_hits_box(eye, target, o))
            return Visibility::Occluded;
    for (std::size_t h = 0; h < humans.size(); ++h) {
        if (skip_human && *skip_human == h)
            continue;
        if (segment_hits_cylinder(eye, target, humans[h].position, kHumanRadius,
                                  humans[h].body_height))
            return Visibility::Occluded;
    }
    return Visibility::Visible;
}

std::vector<SceneFeature> sample_features(const SceneConfig& cfg)
{
    std::vector<SceneFeature> out;
    int next_id = 0;
    for (std::size_t o = 0; o < cfg.obstacles.size(); ++o) {
        const ObstacleBox& box = cfg.obstacles[o];
        const auto corners = box.corners();
        std::vector<double> heights { 0.1 };
        if (box.top_height > 0.1)
            heights.push_back(box.top_height);
        for (double z : heights)
            for (std::size_t e = 0; e < corners.size(); ++e) {
                const Vec2 a = corners[e];
                const Vec2 b = corners[(e + 1) % corners.size()];
                const double len = (b - a).norm();
                const int n = std::max(1, static_cast<int>(std::lround(len / cfg.feature_spacing)));
                for (int k = 0; k < n; ++k) {
                    const Vec2 p = a + (b - a) * (static_cast<double>(k) / n);
                    out.push_back({ next_id++, { p.x, p.y, z }, static_cast<int>(o) });
                }
            }
    }
    return out;
}

std::vector<HumanBody> humans_at(const SceneConfig& cfg, double t)
{
    std::vector<HumanBody> out;
    for (std::size_t h = 0; h < cfg.humans.size(); ++h) {
        const auto& traj = cfg.humans[h];
        if (traj.active_at(t))
            out.push_back({ traj.pose_at(t).translation(), traj.body_height, static_cast<int>(h) });
    }
    return out;
}

std::optional<Detection> detect_human(const SceneConfig& cfg, const Pose2& cam,
                                      std::span<const HumanBody> bodies, std::size_t index)
{
    const CameraIntrinsics& intr = cfg.intrinsics;
    const HumanBody& body = bodies[index];
    const Vec3 head { body.position.x, body.position.y, body.body_height };

    if (se2_apply_inverse(cam, body.position).x <= kHumanRadius)
        return std::nullopt;
    const Projection ph = project_point(intr, cam, head);
    if (!in_image(intr, ph.u, ph.v))
        return std::nullopt;
    if (occlusion_test(intr, cam, head, cfg.obstacles, bodies, index) != Visibility::Visible)
        return std::nullopt;

    /* Lowest visible point on the body axis, scanning down from the head */
    double lowest = body.body_height;
    for (int k = kBodySamples - 1; k >= 0; --k) {
        const double z = body.body_height * k / kBodySamples;
        const Vec3 p { body.position.x, body.position.y, z };
        if (occlusion_test(intr, cam, p, cfg.obstacles, bodies, index) == Visibility::Visible)
            lowest = z;
    }
    const Projection pl = project_point(intr, cam, { body.position.x, body.position.y, lowest });

    Detection d;
    const double half_w = intr.f * kHumanRadius / ph.depth;
    d.box = { ph.u - half_w, ph.u + half_w, ph.v, pl.v };
    d.true_depth = ph.depth;
    d.true_world = body.position;
    d.agent = body.agent;
    return d;
}

SimulationResult simulate_sequence(const SceneConfig& cfg)
{
    cfg.validate();
    SimulationResult result;
    result.features = sample_features(cfg);

    const double t0 = cfg.robot.start_time();
    const double duration = cfg.robot.end_time() - t0;
    const int n_frames = static_cast<int>(std::floor(duration * cfg.fps + 1e-9)) + 1;

    Rng rng(cfg.rng_seed);
    const CameraIntrinsics& intr = cfg.intrinsics;
    Pose2 previous;

    result.frames.reserve(static_cast<std::size_t>(n_frames));
    for (int k = 0; k < n_frames; ++k) {
        FrameObservation frame;
        frame.frame_index = k;
        frame.timestamp = t0 + k / cfg.fps;
        frame.camera_pose = cfg.robot.pose_at(frame.timestamp);
        frame.angular_speed = cfg.robot.angular_speed_at(frame.timestamp);

        if (k > 0) {
            const Pose2 truth = se2_between(previous, frame.camera_pose);
            double nx = 0.0, ny = 0.0, nt = 0.0;
            if (cfg.odom_sigma_trans > 0.0) {
                nx = cfg.odom_sigma_trans * rng.normal();
                ny = cfg.odom_sigma_trans * rng.normal();
            }
            if (cfg.odom_sigma_rot > 0.0)
                nt = cfg.odom_sigma_rot * rng.normal();
            frame.odometry = Pose2(truth.x + nx, truth.y + ny, truth.theta + nt);
        }
        previous = frame.camera_pose;

        const auto bodies = humans_at(cfg, frame.timestamp);

        for (const auto& f : result.features) {
            const Vec2 local = se2_apply_inverse(frame.camera_pose, { f.position.x, f.position.y });
            if (!(local.x > 0.0))
                continue;
            const Projection p = project_point(intr, frame.camera_pose, f.position);
            if (!in_image(intr, p.u, p.v))
                continue;
            const bool visible = occlusion_test(intr, frame.camera_pose, f.position,
                                                cfg.obstacles, bodies) == Visibility::Visible;
            frame.features.push_back({ f.feature_id, p.u, p.v, p.depth, visible });
        }

        for (std::size_t h = 0; h < bodies.size(); ++h)
            if (auto d = detect_human(cfg, frame.camera_pose, bodies, h))
                frame.detections.push_back(*d);

        result.frames.push_back(std::move(frame));
    }
    return result;
}

} // namespace travmap
