#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "travmap/scenesim.hpp"

using namespace travmap;
using std::numbers::pi;

namespace {

SceneConfig empty_scene(double duration)
{
    SceneConfig cfg;
    cfg.robot.waypoints = { { 0.0, Pose2(0.4, 0.5, 0.0) }, { duration, Pose2(0.4, 5.5, 0.0) } };
    return cfg;
}

ObstacleBox slab_at_x2()
{
    ObstacleBox b;
    b.center = { 2.0, 0.0 };
    b.half_extents = { 0.05, 3.0 };
    b.top_height = 0.7;
    return b;
}

int heading_changes(const AgentTrajectory& a)
{
    int n = 0;
    for (std::size_t k = 1; k < a.waypoints.size(); ++k)
        if (std::abs(normalize_angle(a.waypoints[k].pose.theta - a.waypoints[k - 1].pose.theta)) > 1e-9)
            ++n;
    return n;
}

} // namespace

TEST_CASE("built-in layouts")
{
    const SceneConfig i = builtin_config(SceneKind::I);
    CHECK(i.bounds.x_min == 0.0);
    CHECK(i.bounds.x_max == 3.0);
    CHECK(i.bounds.y_max == 6.0);
    CHECK(i.fps == 30.0);
    CHECK(i.robot_radius == 0.5);
    REQUIRE(i.obstacles.size() == 2);
    for (const auto& o : i.obstacles) {
        CHECK(2 * o.half_extents.x == doctest::Approx(0.6));
        CHECK(2 * o.half_extents.y == doctest::Approx(2.5));
        CHECK(o.top_height == 0.7);
    }
    CHECK(i.humans.size() == 1);
    CHECK(heading_changes(i.humans[0]) > 0);

    const SceneConfig l = builtin_config(SceneKind::L);
    REQUIRE_FALSE(l.humans.empty());
    CHECK(heading_changes(l.humans[0]) == 1);
    const auto& w = l.humans[0].waypoints;
    double turn = 0.0;
    for (std::size_t k = 1; k < w.size(); ++k)
        turn += normalize_angle(w[k].pose.theta - w[k - 1].pose.theta);
    CHECK(std::abs(turn) == doctest::Approx(pi / 2));

    const SceneConfig t = builtin_config(SceneKind::T);
    CHECK(t.humans.size() >= 2);

    for (auto kind : { SceneKind::I, SceneKind::L, SceneKind::T }) {
        const SceneConfig c = builtin_config(kind);
        CHECK_NOTHROW(c.validate());
        CHECK(c.robot.end_time() - c.robot.start_time() == 60.0);
        CHECK(c.name == to_string(kind));
    }
    CHECK(parse_scene_kind("t") == SceneKind::T);
    CHECK_THROWS_AS(parse_scene_kind("Q"), std::invalid_argument);
}

TEST_CASE("trajectory interpolation")
{
    AgentTrajectory a;
    a.waypoints = { { 0.0, Pose2(0, 0, 3.0) }, { 2.0, Pose2(2, 4, -3.0) } };
    const Pose2 mid = a.pose_at(1.0);
    CHECK(mid.x == 1.0);
    CHECK(mid.y == 2.0);
    /* shortest arc crosses pi */
    CHECK(std::abs(normalize_angle(mid.theta - pi)) < 1e-12);
    CHECK(a.pose_at(-1.0) == a.waypoints.front().pose);
    CHECK(a.pose_at(5.0) == a.waypoints.back().pose);

    a.body_height = 1.4;
    CHECK_THROWS_AS(a.validate(), std::invalid_argument);
    a.body_height = 1.83;
    CHECK_NOTHROW(a.validate());
    a.waypoints.push_back({ 2.0, Pose2() });
    CHECK_THROWS_AS(a.validate(), std::invalid_argument);
}

TEST_CASE("ground truth map")
{
    SceneConfig cfg = empty_scene(10.0);
    const auto empty = ground_truth_map(cfg);
    CHECK(empty.count(CellState::Traversable) == 1800);

    ObstacleBox table;
    table.center = { 1.5, 3.0 };
    table.half_extents = { 0.3, 1.25 };
    cfg.obstacles = { table };
    const auto gt = ground_truth_map(cfg);
    CHECK(gt.count(CellState::Unknown) == 0);
    for (int j = 0; j < gt.height(); ++j)
        for (int i = 0; i < gt.width(); ++i) {
            const Vec2 c = gt.cell_to_world({ i, j });
            const double dx = std::max(std::abs(c.x - 1.5) - 0.3, 0.0);
            const double dy = std::max(std::abs(c.y - 3.0) - 1.25, 0.0);
            const bool inside = std::hypot(dx, dy) <= 0.5 + 1e-9;
            CHECK((gt.at({ i, j }) == CellState::Untraversable) == inside);
        }
    /* Bounding box of the inflated footprint: 1.6 m by 3.5 m */
    CHECK(gt.at(gt.world_to_cell({ 0.75, 3.0 })) == CellState::Untraversable);
    CHECK(gt.at(gt.world_to_cell({ 0.65, 3.0 })) == CellState::Traversable);

    /* Cell center exactly robot_radius away is blocked */
    ObstacleBox edge;
    edge.center = { 0.0, 0.45 };
    edge.half_extents = { 0.35, 0.3 };
    cfg.obstacles = { edge };
    cfg.bounds = { 0.0, 0.0, 3.0, 3.0 };
    cfg.robot.waypoints = { { 0.0, Pose2(2.0, 2.0, 0.0) } };
    const auto boundary = ground_truth_map(cfg);
    /* cell (8, 4) has center (0.85, 0.45), 0.5 from the footprint edge x = 0.35 */
    CHECK(boundary.at({ 8, 4 }) == CellState::Untraversable);
    CHECK(boundary.at({ 9, 4 }) == CellState::Traversable);
}

TEST_CASE("pinhole projection")
{
    CameraIntrinsics intr;
    const Projection on_axis = project_point(intr, Pose2(), { 5, 0, 0.85 });
    CHECK(on_axis.u == intr.cx);
    CHECK(on_axis.v == intr.cy);
    CHECK(on_axis.depth == 5.0);

    intr.f = 500;
    const Projection right = project_point(intr, Pose2(), { 3, -0.6, 0.85 });
    CHECK(right.u == doctest::Approx(intr.cx + 100));
    CHECK(right.v == intr.cy);
    CHECK(right.depth == 3.0);

    CHECK_THROWS_AS(project_point(intr, Pose2(), { -1, 0, 0.85 }), std::domain_error);

    const Pose2 cam(1, 2, 0.7);
    const Vec3 p = camera_to_world(intr, cam, 0.3, -0.2, 4.0);
    const Projection back = project_point(intr, cam, p);
    CHECK(back.depth == doctest::Approx(4.0));
    CHECK(back.u == doctest::Approx(intr.cx + intr.f * 0.3 / 4.0));
    CHECK(back.v == doctest::Approx(intr.cy - intr.f * 0.2 / 4.0));
}

TEST_CASE("occlusion by obstacles and bodies")
{
    CameraIntrinsics intr;
    const std::vector<ObstacleBox> slab { slab_at_x2() };
    const std::vector<HumanBody> none;
    CHECK(occlusion_test(intr, Pose2(), { 4, 0, 1.7 }, slab, none) == Visibility::Visible);
    CHECK(occlusion_test(intr, Pose2(), { 4, 0, 0.0 }, slab, none) == Visibility::Occluded);
    CHECK(occlusion_test(intr, Pose2(), { 4, 0, 0.0 }, {}, none) == Visibility::Visible);

    const std::vector<HumanBody> person { { { 2.0, 0.0 }, 1.7, 0 } };
    CHECK(occlusion_test(intr, Pose2(), { 4, 0, 1.0 }, {}, person) == Visibility::Occluded);
    CHECK(occlusion_test(intr, Pose2(), { 4, 0, 1.0 }, {}, person, 0) == Visibility::Visible);
    /* Line of sight passing over the head */
    CHECK(occlusion_test(intr, Pose2(), { 4, 0, 3.0 }, {}, person) == Visibility::Visible);
    /* Beside the body */
    CHECK(occlusion_test(intr, Pose2(), { 4, 1.0, 1.0 }, {}, person) == Visibility::Visible);
}

TEST_CASE("features sit on table edges at two heights")
{
    SceneConfig cfg = builtin_config(SceneKind::I);
    const auto feats = sample_features(cfg);
    /* perimeter 6.2 m at 0.1 m spacing, two heights, two tables */
    CHECK(feats.size() == 2 * 2 * 62);
    for (std::size_t k = 0; k < feats.size(); ++k) {
        CHECK(feats[k].feature_id == static_cast<int>(k));
        const auto& o = cfg.obstacles[static_cast<std::size_t>(feats[k].obstacle)];
        CHECK(o.footprint_distance({ feats[k].position.x, feats[k].position.y }) < 1e-12);
        CHECK((feats[k].position.z == 0.1 || feats[k].position.z == o.top_height));
    }
}

TEST_CASE("frame count and empty scenes")
{
    const auto sim = simulate_sequence(empty_scene(60.0));
    CHECK(sim.frames.size() == 1801);
    for (const auto& f : sim.frames) {
        CHECK(f.detections.empty());
        CHECK(f.features.empty());
    }
    CHECK(sim.frames.back().timestamp == doctest::Approx(60.0));
}

TEST_CASE("person behind a table is cut at the table top")
{
    SceneConfig cfg = empty_scene(1.0);
    cfg.robot.waypoints = { { 0.0, Pose2(0, 0, 0) }, { 1.0, Pose2(0, 0.01, 0) } };
    cfg.bounds = { -1, -3, 6, 3 };
    cfg.obstacles = { slab_at_x2() };
    AgentTrajectory h;
    h.waypoints = { { 0.0, Pose2(4, 0, 0) }, { 1.0, Pose2(4, 0.01, 0) } };
    h.body_height = 1.7;
    cfg.humans = { h };
    const auto bodies = humans_at(cfg, 0.0);
    const auto det = detect_human(cfg, Pose2(), bodies, 0);
    REQUIRE(det.has_value());
    const CameraIntrinsics& in = cfg.intrinsics;
    CHECK(det->box.y_min == doctest::Approx(in.cy - in.f * (1.7 - 0.85) / 4.0));
    const double feet_v = in.cy + in.f * 0.85 / 4.0;
    CHECK(det->box.y_max < feet_v - 10.0);
    /* Visible down to where the line of sight grazes the slab top: z = 0.55 at x = 4 */
    CHECK(det->box.y_max == doctest::Approx(in.cy + in.f * (0.85 - 0.55) / 4.0).epsilon(0.01));
    CHECK(det->box.x_min < det->box.x_max);
    CHECK(det->true_depth == 4.0);

    /* A taller slab hides the head and suppresses the detection */
    cfg.obstacles[0].top_height = 2.0;
    CHECK_FALSE(detect_human(cfg, Pose2(), bodies, 0).has_value());
}

TEST_CASE("simulation invariants on built-in scenes")
{
    for (auto kind : { SceneKind::I, SceneKind::L, SceneKind::T }) {
        const SceneConfig cfg = builtin_config(kind);
        const auto a = simulate_sequence(cfg);
        const auto b = simulate_sequence(cfg);
        REQUIRE(a.frames.size() == b.frames.size());
        int detections = 0;
        for (std::size_t k = 0; k < a.frames.size(); k += 7) {
            const auto& fa = a.frames[k];
            const auto& fb = b.frames[k];
            CHECK(fa.camera_pose == fb.camera_pose);
            REQUIRE(fa.features.size() == fb.features.size());
            std::vector<bool> seen(a.features.size(), false);
            for (std::size_t n = 0; n < fa.features.size(); ++n) {
                const auto& o = fa.features[n];
                CHECK(o.u == fb.features[n].u);
                CHECK(o.visible == fb.features[n].visible);
                CHECK_FALSE(seen[static_cast<std::size_t>(o.feature_id)]);
                seen[static_cast<std::size_t>(o.feature_id)] = true;
                const Projection p = project_point(cfg.intrinsics, fa.camera_pose,
                                                   a.features[static_cast<std::size_t>(o.feature_id)].position);
                CHECK(p.u == o.u);
                CHECK(p.v == o.v);
                CHECK(p.depth == o.true_depth);
            }
            const auto bodies = humans_at(cfg, fa.timestamp);
            for (const auto& d : fa.detections) {
                ++detections;
                CHECK(d.box.x_min < d.box.x_max);
                CHECK(d.box.y_min < d.box.y_max);
                std::size_t idx = 0;
                while (bodies[idx].agent != d.agent)
                    ++idx;
                const Vec3 head { bodies[idx].position.x, bodies[idx].position.y,
                                  bodies[idx].body_height };
                CHECK(occlusion_test(cfg.intrinsics, fa.camera_pose, head, cfg.obstacles, bodies,
                                     idx) == Visibility::Visible);
            }
        }
        CHECK(detections > 0);
        CHECK(ground_truth_map(cfg).count(CellState::Unknown) == 0);
    }
}

TEST_CASE("odometry noise is seeded")
{
    SceneConfig cfg = empty_scene(2.0);
    cfg.odom_sigma_trans = 0.01;
    cfg.odom_sigma_rot = 0.001;
    cfg.rng_seed = 4;
    const auto a = simulate_sequence(cfg);
    const auto b = simulate_sequence(cfg);
    cfg.rng_seed = 5;
    const auto c = simulate_sequence(cfg);
    CHECK(a.frames[10].odometry == b.frames[10].odometry);
    CHECK_FALSE(a.frames[10].odometry == c.frames[10].odometry);

    cfg.odom_sigma_trans = 0.0;
    cfg.odom_sigma_rot = 0.0;
    const auto clean = simulate_sequence(cfg);
    const Pose2 truth = se2_between(clean.frames[9].camera_pose, clean.frames[10].camera_pose);
    CHECK(clean.frames[10].odometry == truth);
}
