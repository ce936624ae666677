#include "travmap/scenario_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace travmap {

ScenarioError::ScenarioError(int line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      mLine(line)
{
}

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            return parts;
        start = pos + 1;
    }
}

template <typename T>
T parse_number(std::string_view text, int line, std::string_view key)
{
    T value {};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end)
        throw ScenarioError(line, "invalid value '" + std::string(text) + "' for '" +
                                      std::string(key) + "'");
    return value;
}

std::vector<double> parse_list(std::string_view text, std::size_t n, int line, std::string_view key)
{
    const auto parts = split(text, ',');
    if (parts.size() != n)
        throw ScenarioError(line, "'" + std::string(key) + "' expects " + std::to_string(n) +
                                      " comma-separated values");
    std::vector<double> out;
    for (auto p : parts)
        out.push_back(parse_number<double>(p, line, key));
    return out;
}

struct Entity
{
    int line = 0;
    int index = 0;
};

void rethrow_at(int line, const std::invalid_argument& e)
{
    throw ScenarioError(line, e.what());
}

} // namespace

SceneConfig parse_scenario(std::string_view text)
{
    SceneConfig cfg;
    cfg.robot = { AgentRole::Robot, {}, 0.0 };

    enum class Section { None, Scene, Bounds, Camera, Obstacle, Human, Robot };
    Section section = Section::None;
    std::map<int, std::pair<int, ObstacleBox>> obstacles;
    std::map<int, std::pair<int, AgentTrajectory>> humans;
    int robot_line = 0;
    int camera_line = 0;
    int bounds_line = 0;
    ObstacleBox* obstacle = nullptr;
    AgentTrajectory* agent = nullptr;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto comment = line.find_first_of("#;");
        if (comment != std::string_view::npos)
            line = line.substr(0, comment);
        line = trim(line);
        if (line.empty())
            continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ScenarioError(line_no, "unterminated section header");
            const std::string name(trim(line.substr(1, line.size() - 2)));
            auto numbered = [&](const std::string& prefix) -> std::optional<int> {
                if (name.rfind(prefix + ".", 0) != 0)
                    return std::nullopt;
                const std::string_view n = std::string_view(name).substr(prefix.size() + 1);
                return parse_number<int>(n, line_no, "section index");
            };
            if (name == "scene") {
                section = Section::Scene;
            } else if (name == "bounds") {
                section = Section::Bounds;
                bounds_line = line_no;
            } else if (name == "camera") {
                section = Section::Camera;
                camera_line = line_no;
            } else if (name == "robot") {
                section = Section::Robot;
                robot_line = line_no;
                agent = &cfg.robot;
            } else if (auto n = numbered("obstacle")) {
                if (obstacles.contains(*n))
                    throw ScenarioError(line_no, "duplicate section [" + name + "]");
                section = Section::Obstacle;
                obstacle = &obstacles[*n].second;
                obstacles[*n].first = line_no;
            } else if (auto n = numbered("human")) {
                if (humans.contains(*n))
                    throw ScenarioError(line_no, "duplicate section [" + name + "]");
                section = Section::Human;
                auto& entry = humans[*n];
                entry.first = line_no;
                entry.second = { AgentRole::Human, {}, 1.70 };
                agent = &entry.second;
            } else {
                throw ScenarioError(line_no, "unknown section [" + name + "]");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ScenarioError(line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        auto num = [&]() { return parse_number<double>(value, line_no, key); };
        auto unknown = [&]() {
            throw ScenarioError(line_no, "unknown key '" + key + "'");
        };

        switch (section) {
        case Section::None:
            throw ScenarioError(line_no, "key outside of any section");
        case Section::Scene:
            if (key == "name")
                cfg.name = std::string(value);
            else if (key == "fps")
                cfg.fps = num();
            else if (key == "feature_spacing")
                cfg.feature_spacing = num();
            else if (key == "robot_radius")
                cfg.robot_radius = num();
            else if (key == "rng_seed")
                cfg.rng_seed = parse_number<std::uint64_t>(value, line_no, key);
            else if (key == "odom_sigma_trans")
                cfg.odom_sigma_trans = num();
            else if (key == "odom_sigma_rot")
                cfg.odom_sigma_rot = num();
            else
                unknown();
            break;
        case Section::Bounds:
            if (key == "x_min")
                cfg.bounds.x_min = num();
            else if (key == "y_min")
                cfg.bounds.y_min = num();
            else if (key == "x_max")
                cfg.bounds.x_max = num();
            else if (key == "y_max")
                cfg.bounds.y_max = num();
            else
                unknown();
            break;
        case Section::Camera:
            if (key == "f")
                cfg.intrinsics.f = num();
            else if (key == "cx")
                cfg.intrinsics.cx = num();
            else if (key == "cy")
                cfg.intrinsics.cy = num();
            else if (key == "image_width")
                cfg.intrinsics.image_width = parse_number<int>(value, line_no, key);
            else if (key == "image_height")
                cfg.intrinsics.image_height = parse_number<int>(value, line_no, key);
            else if (key == "cam_height")
                cfg.intrinsics.cam_height = num();
            else
                unknown();
            break;
        case Section::Obstacle:
            if (key == "center") {
                const auto v = parse_list(value, 2, line_no, key);
                obstacle->center = { v[0], v[1] };
            } else if (key == "half_extents") {
                const auto v = parse_list(value, 2, line_no, key);
                obstacle->half_extents = { v[0], v[1] };
            } else if (key == "top_height") {
                obstacle->top_height = num();
            } else if (key == "yaw") {
                obstacle->yaw = num();
            } else {
                unknown();
            }
            break;
        case Section::Human:
        case Section::Robot:
            if (key == "waypoint") {
                const auto v = parse_list(value, 4, line_no, key);
                if (!agent->waypoints.empty() && !(v[0] > agent->waypoints.back().t))
                    throw ScenarioError(line_no, "waypoint times must be strictly increasing");
                agent->waypoints.push_back({ v[0], Pose2(v[1], v[2], v[3]) });
            } else if (key == "body_height" && section == Section::Human) {
                agent->body_height = num();
            } else {
                unknown();
            }
            break;
        }
    }

    for (const auto& [n, entry] : obstacles) {
        const ObstacleBox& o = entry.second;
        if (!(o.half_extents.x > 0.0 && o.half_extents.y > 0.0 && o.top_height > 0.0))
            throw ScenarioError(entry.first, "obstacle extents and height must be positive");
        cfg.obstacles.push_back(o);
    }
    for (const auto& [n, entry] : humans) {
        try {
            entry.second.validate();
        } catch (const std::invalid_argument& e) {
            rethrow_at(entry.first, e);
        }
        cfg.humans.push_back(entry.second);
    }
    if (robot_line == 0)
        throw ScenarioError(0, "missing [robot] section");
    try {
        cfg.robot.validate();
    } catch (const std::invalid_argument& e) {
        rethrow_at(robot_line, e);
    }
    try {
        cfg.intrinsics.validate();
    } catch (const std::invalid_argument& e) {
        rethrow_at(camera_line, e);
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        rethrow_at(bounds_line, e);
    }
    return cfg;
}

SceneConfig load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string to_scenario_text(const SceneConfig& cfg)
{
    std::string out;
    char buf[256];
    auto put = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out += buf;
    };
    put("[scene]\nname = %s\nfps = %.17g\nfeature_spacing = %.17g\nrobot_radius = %.17g\n",
        cfg.name.c_str(), cfg.fps, cfg.feature_spacing, cfg.robot_radius);
    put("rng_seed = %llu\nodom_sigma_trans = %.17g\nodom_sigma_rot = %.17g\n\n",
        static_cast<unsigned long long>(cfg.rng_seed), cfg.odom_sigma_trans, cfg.odom_sigma_rot);
    put("[bounds]\nx_min = %.17g\ny_min = %.17g\nx_max = %.17g\ny_max = %.17g\n\n",
        cfg.bounds.x_min, cfg.bounds.y_min, cfg.bounds.x_max, cfg.bounds.y_max);
    const auto& c = cfg.intrinsics;
    put("[camera]\nf = %.17g\ncx = %.17g\ncy = %.17g\nimage_width = %d\nimage_height = %d\n"
        "cam_height = %.17g\n",
        c.f, c.cx, c.cy, c.image_width, c.image_height, c.cam_height);
    for (std::size_t k = 0; k < cfg.obstacles.size(); ++k) {
        const auto& o = cfg.obstacles[k];
        put("\n[obstacle.%zu]\ncenter = %.17g, %.17g\nhalf_extents = %.17g, %.17g\n", k,
            o.center.x, o.center.y, o.half_extents.x, o.half_extents.y);
        put("top_height = %.17g\nyaw = %.17g\n", o.top_height, o.yaw);
    }
    auto waypoints = [&](const AgentTrajectory& a) {
        for (const auto& w : a.waypoints)
            put("waypoint = %.17g, %.17g, %.17g, %.17g\n", w.t, w.pose.x, w.pose.y, w.pose.theta);
    };
    for (std::size_t k = 0; k < cfg.humans.size(); ++k) {
        put("\n[human.%zu]\nbody_height = %.17g\n", k, cfg.humans[k].body_height);
        waypoints(cfg.humans[k]);
    }
    out += "\n[robot]\n";
    waypoints(cfg.robot);
    return out;
}

} // namespace travmap
