#ifndef TRAVMAP_SCENARIO_IO_HPP
#define TRAVMAP_SCENARIO_IO_HPP

#include <stdexcept>
#include <string>
#include <string_view>

#include "travmap/scenesim.hpp"

namespace travmap {

/* Scenario file problem; line() is 1-based, 0 when not tied to a line */
class ScenarioError : public std::runtime_error
{
public:
    ScenarioError(int line, const std::string& what);
    int line() const { return mLine; }

private:
    int mLine;
};

/*
 * INI-style scene description:
 *
 *   [scene]        name, fps, feature_spacing, robot_radius, rng_seed,
 *                  odom_sigma_trans, odom_sigma_rot
 *   [bounds]       x_min, y_min, x_max, y_max
 *   [camera]       f, cx, cy, image_width, image_height, cam_height
 *   [obstacle.N]   center = x, y / half_extents = hx, hy / top_height / yaw
 *   [human.N]      body_height / waypoint = t, x, y, yaw (repeated)
 *   [robot]        waypoint = t, x, y, yaw (repeated)
 *
 * '#' and ';' start comments. Omitted keys keep their defaults; unknown
 * sections and keys are errors.
 */
SceneConfig parse_scenario(std::string_view text);
SceneConfig load_scenario(const std::string& path);

/* Round-trips through parse_scenario */
std::string to_scenario_text(const SceneConfig& cfg);

} // namespace travmap

#endif // TRAVMAP_SCENARIO_IO_HPP
