#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "travmap/scenario_io.hpp"

using namespace travmap;

namespace {

const char* kMinimal = R"(# two tables and nobody around
[bounds]
x_min=0
y_min=0
x_max=3
y_max=6

[robot]
waypoint = 0, 1.5, 0.5, 1.5707963267948966
waypoint = 10, 1.5, 5.5, 1.5707963267948966
)";

int error_line(const std::string& text)
{
    try {
        parse_scenario(text);
    } catch (const ScenarioError& e) {
        return e.line();
    }
    return -1;
}

std::string error_text(const std::string& text)
{
    try {
        parse_scenario(text);
    } catch (const ScenarioError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("minimal scenario")
{
    const SceneConfig cfg = parse_scenario(kMinimal);
    CHECK(cfg.bounds.x_min == 0.0);
    CHECK(cfg.bounds.y_min == 0.0);
    CHECK(cfg.bounds.x_max == 3.0);
    CHECK(cfg.bounds.y_max == 6.0);
    CHECK(cfg.obstacles.empty());
    CHECK(cfg.humans.empty());
    REQUIRE(cfg.robot.waypoints.size() == 2);
    CHECK(cfg.robot.waypoints[1].t == 10.0);
    CHECK(cfg.robot.waypoints[1].pose.y == 5.5);
    /* Defaults */
    CHECK(cfg.fps == 30.0);
    CHECK(cfg.intrinsics.f == CameraIntrinsics {}.f);
}

TEST_CASE("full scenario")
{
    const std::string text = std::string(kMinimal) + R"(
[scene]
name = corridor ; trailing comment
fps = 15
rng_seed = 42

[camera]
f = 500
image_width = 800

[obstacle.0]
center = 0.5, 3
half_extents = 0.3, 1.25
top_height = 0.75

[obstacle.1]
center = 2.5, 3
half_extents = 0.3, 1.25
yaw = 0.1

[human.0]
body_height = 1.8
waypoint = 0, 1.5, 5.5, -1.57
waypoint = 8, 1.5, 0.5, -1.57
)";
    const SceneConfig cfg = parse_scenario(text);
    CHECK(cfg.name == "corridor");
    CHECK(cfg.fps == 15.0);
    CHECK(cfg.rng_seed == 42);
    CHECK(cfg.intrinsics.f == 500.0);
    CHECK(cfg.intrinsics.image_width == 800);
    REQUIRE(cfg.obstacles.size() == 2);
    CHECK(cfg.obstacles[0].top_height == 0.75);
    CHECK(cfg.obstacles[1].yaw == 0.1);
    CHECK(cfg.obstacles[1].half_extents.y == 1.25);
    REQUIRE(cfg.humans.size() == 1);
    CHECK(cfg.humans[0].body_height == 1.8);
    CHECK(cfg.humans[0].waypoints.size() == 2);
}

TEST_CASE("bad number names its line")
{
    const std::string text = "[scene]\nfps=abc\n" + std::string(kMinimal);
    CHECK(error_line(text) == 2);
    CHECK(error_text(text).find("line 2") != std::string::npos);
    CHECK(error_text(text).find("fps") != std::string::npos);
}

TEST_CASE("unknown key and section are rejected with line numbers")
{
    CHECK(error_line(std::string(kMinimal) + "\n[scene]\ncolour = red\n") == 13);
    CHECK(error_line(std::string(kMinimal) + "[lidar]\n") == 11);
    CHECK(error_line("x_min = 0\n") == 1);
    CHECK(error_line("[bounds\n") == 1);
    CHECK(error_line("[bounds]\nx_min 0\n") == 2);
}

TEST_CASE("constraint violations")
{
    /* Obstacle with zero extent reports its header line */
    CHECK(error_line(std::string(kMinimal) + "[obstacle.0]\ncenter = 1, 1\nhalf_extents = 0, 1\n") == 11);
    /* Non-increasing waypoint times */
    CHECK(error_line("[robot]\nwaypoint = 1, 0.5, 0.5, 0\nwaypoint = 1, 1, 1, 0\n") == 3);
    /* Wrong arity */
    CHECK(error_line("[robot]\nwaypoint = 1, 0.5, 0.5\n") == 2);
    /* No robot at all */
    CHECK_THROWS_AS(parse_scenario("[bounds]\nx_max = 3\n"), ScenarioError);
    /* Inverted bounds */
    CHECK_THROWS_AS(
        parse_scenario("[bounds]\nx_min = 3\nx_max = 1\n[robot]\nwaypoint = 0, 0, 0, 0\nwaypoint = 1, 1, 1, 0\n"),
        ScenarioError);
}

TEST_CASE("builtin scenes round-trip through text")
{
    for (SceneKind k : { SceneKind::I, SceneKind::L, SceneKind::T }) {
        const SceneConfig cfg = builtin_config(k);
        const std::string text = to_scenario_text(cfg);
        const SceneConfig back = parse_scenario(text);
        CHECK(to_scenario_text(back) == text);
        CHECK(back.name == cfg.name);
        REQUIRE(back.obstacles.size() == cfg.obstacles.size());
        for (std::size_t n = 0; n < cfg.obstacles.size(); ++n) {
            CHECK(back.obstacles[n].center == cfg.obstacles[n].center);
            CHECK(back.obstacles[n].yaw == cfg.obstacles[n].yaw);
        }
        REQUIRE(back.humans.size() == cfg.humans.size());
        CHECK(back.robot.waypoints.size() == cfg.robot.waypoints.size());
    }
}

TEST_CASE("load_scenario reads files and reports missing ones")
{
    const std::string path = "test_scenario_io_tmp.ini";
    {
        std::ofstream out(path);
        out << kMinimal;
    }
    CHECK(load_scenario(path).bounds.y_max == 6.0);
    std::remove(path.c_str());
    CHECK_THROWS(load_scenario("does/not/exist.ini"));
}
