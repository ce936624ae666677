#ifndef TRAVMAP_SCENESIM_HPP
#define TRAVMAP_SCENESIM_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "travmap/geometry.hpp"
#include "travmap/gridmap.hpp"

namespace travmap {

/* Pinhole camera mounted level on the robot, cam_height above the floor */
struct CameraIntrinsics
{
    double f = 300.0;
    double cx = 320.0;
    double cy = 240.0;
    int image_width = 640;
    int image_height = 480;
    double cam_height = 0.85;

    void validate() const;
};

/* Table-like obstacle: oriented footprint extruded from the floor */
struct ObstacleBox
{
    Vec2 center;
    Vec2 half_extents;
    double top_height = 0.7;
    double yaw = 0.0;

    /* Footprint corners, counter-clockwise */
    std::vector<Vec2> corners() const;
    /* Distance from p to the footprint (0 inside) */
    double footprint_distance(const Vec2& p) const;
};

enum class AgentRole : std::uint8_t
{
    Human,
    Robot,
};

struct TimedPose
{
    double t = 0.0;
    Pose2 pose;
};

/*
 * Piecewise-linear trajectory. Yaw is interpolated along the shortest arc.
 * Humans exist only between their first and last waypoint.
 */
struct AgentTrajectory
{
    AgentRole role = AgentRole::Human;
    std::vector<TimedPose> waypoints;
    double body_height = 1.70;

    void validate() const;
    double start_time() const { return waypoints.front().t; }
    double end_time() const { return waypoints.back().t; }
    bool active_at(double t) const { return t >= start_time() && t <= end_time(); }
    /* Clamped to the first/last waypoint outside the time range */
    Pose2 pose_at(double t) const;
    /* Yaw rate of the segment containing t, rad/s */
    double angular_speed_at(double t) const;
};

struct SceneBounds
{
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 3.0;
    double y_max = 6.0;
};

struct SceneConfig
{
    std::string name = "custom";
    SceneBounds bounds;
    std::vector<ObstacleBox> obstacles;
    std::vector<AgentTrajectory> humans;
    AgentTrajectory robot { AgentRole::Robot, {}, 0.0 };
    CameraIntrinsics intrinsics;
    double fps = 30.0;
    double feature_spacing = 0.10;
    double robot_radius = 0.50;
    double odom_sigma_trans = 0.0; /* m per frame */
    double odom_sigma_rot = 0.0;   /* rad per frame */
    std::uint64_t rng_seed = 0;

    void validate() const;
};

enum class SceneKind : std::uint8_t
{
    I,
    L,
    T,
};

SceneKind parse_scene_kind(const std::string& text);
const char* to_string(SceneKind k);

/* Built-in 3 m x 6 m table layouts */
SceneConfig builtin_config(SceneKind kind);

/* Obstacles inflated by the robot radius are untraversable, the rest free */
TraversabilityMap ground_truth_map(const SceneConfig& cfg, double resolution = 0.10);

struct Projection
{
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;
};

/*
 * Camera frame: z along the heading, x to the right of the heading,
 * y pointing down. Throws std::domain_error for points with depth <= 0.
 */
Projection project_point(const CameraIntrinsics& intr, const Pose2& cam, const Vec3& p);

/* Planar pose of a camera frame point (x right, z forward) */
Vec3 camera_to_world(const CameraIntrinsics& intr, const Pose2& cam,
                     double x_c, double y_c, double z_c);

/* Human body for occlusion purposes: vertical cylinder on the floor */
struct HumanBody
{
    Vec2 position;
    double body_height = 1.70;
    int agent = -1; /* index into SceneConfig::humans */
};

inline constexpr double kHumanRadius = 0.25;

enum class Visibility : std::uint8_t
{
    Visible,
    Occluded,
};

/*
 * Line of sight from the optical center to target, against obstacle
 * volumes and human cylinders. skip_human excludes the target's own body.
 */
Visibility occlusion_test(const CameraIntrinsics& intr, const Pose2& cam, const Vec3& target,
                          std::span<const ObstacleBox> obstacles,
                          std::span<const HumanBody> humans,
                          std::optional<std::size_t> skip_human = std::nullopt);

struct SceneFeature
{
    int feature_id = 0;
    Vec3 position;
    int obstacle = 0;
};

/* Corners of table footprints sampled along each edge at two heights */
std::vector<SceneFeature> sample_features(const SceneConfig& cfg);

struct FeatureObservation
{
    int feature_id = 0;
    double u = 0.0;
    double v = 0.0;
    double true_depth = 0.0;
    /* false: listed for oracle tests only, the pipeline must ignore it */
    bool visible = true;
};

struct BBox
{
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    double center_u() const { return 0.5 * (x_min + x_max); }
    double center_v() const { return 0.5 * (y_min + y_max); }
    bool contains(double u, double v) const
    {
        return u >= x_min && u <= x_max && v >= y_min && v <= y_max;
    }
};

struct Detection
{
    BBox box;
    double true_depth = 0.0;
    Vec2 true_world;
    int agent = 0;
};

struct FrameObservation
{
    int frame_index = 0;
    double timestamp = 0.0;
    Pose2 camera_pose;      /* ground truth */
    Pose2 odometry;         /* measured motion since the previous frame */
    double angular_speed = 0.0;
    std::vector<FeatureObservation> features;
    std::vector<Detection> detections;
};

struct SimulationResult
{
    std::vector<FrameObservation> frames;
    std::vector<SceneFeature> features;
};

/* Deterministic frame sequence at cfg.fps over the robot trajectory */
SimulationResult simulate_sequence(const SceneConfig& cfg);

/* Human bodies present at time t */
std::vector<HumanBody> humans_at(const SceneConfig& cfg, double t);

/* Detection for one human seen from cam, if its head is in view */
std::optional<Detection> detect_human(const SceneConfig& cfg, const Pose2& cam,
                                      std::span<const HumanBody> bodies, std::size_t index);

} // namespace travmap

#endif // TRAVMAP_SCENESIM_HPP
