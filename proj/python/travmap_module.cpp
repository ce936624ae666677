#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "travmap/ablation.hpp"
#include "travmap/scenario_io.hpp"

namespace py = pybind11;
using namespace travmap;

namespace {

py::bytes pgm_bytes(const TraversabilityMap& m)
{
    const auto bytes = export_pgm(m);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

TraversabilityMap pgm_map(const py::bytes& data, std::pair<double, double> origin, double res)
{
    const std::string s = data;
    const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
    return import_pgm({ p, s.size() }, { origin.first, origin.second }, res);
}

Vec2 vec(std::pair<double, double> p)
{
    return { p.first, p.second };
}

py::list report_rows(const QualityReport& r)
{
    py::list rows;
    for (const auto& row : r.rows) {
        py::dict d;
        d["combination"] = row.combination;
        d["scenario"] = row.scenario;
        d["score_m"] = row.score;
        d["n_queries"] = row.n_queries;
        d["n_failed"] = row.n_failed;
        rows.append(d);
    }
    return rows;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Traversability maps from static structure, human trails and occlusion ordering";

    py::enum_<CellState>(m, "CellState")
        .value("TRAVERSABLE", CellState::Traversable)
        .value("UNTRAVERSABLE", CellState::Untraversable)
        .value("UNKNOWN", CellState::Unknown);

    py::class_<TraversabilityMap>(m, "TraversabilityMap")
        .def_static("create", &TraversabilityMap::create, py::arg("x_min"), py::arg("y_min"),
                    py::arg("x_max"), py::arg("y_max"), py::arg("resolution") = 0.10)
        .def_property_readonly("width", &TraversabilityMap::width)
        .def_property_readonly("height", &TraversabilityMap::height)
        .def_property_readonly("resolution", &TraversabilityMap::resolution)
        .def("world_to_cell", [](const TraversabilityMap& map, double x, double y) {
            const CellIndex c = map.world_to_cell({ x, y });
            return std::make_pair(c.i, c.j);
        })
        .def("cell_to_world", [](const TraversabilityMap& map, int i, int j) {
            const Vec2 p = map.cell_to_world({ i, j });
            return std::make_pair(p.x, p.y);
        })
        .def("at", [](const TraversabilityMap& map, int i, int j) { return map.at({ i, j }); })
        .def("set", [](TraversabilityMap& map, int i, int j, CellState s) { map.set({ i, j }, s); })
        .def("mark_band", [](TraversabilityMap& map, std::pair<double, double> a,
                             std::pair<double, double> b, double half_width, CellState s) {
            map.mark_band(vec(a), vec(b), half_width, s);
        })
        .def("count", &TraversabilityMap::count)
        .def("to_pgm", &pgm_bytes)
        .def_static("from_pgm", &pgm_map, py::arg("data"),
                    py::arg("origin") = std::make_pair(0.0, 0.0), py::arg("resolution") = 0.10)
        .def("__eq__", [](const TraversabilityMap& a, const TraversabilityMap& b) { return a == b; });

    m.def("fuse", [](const std::vector<std::pair<TraversabilityMap, std::string>>& layers,
                     const std::string& priority) {
        std::vector<LayeredMap> in;
        for (const auto& [map, name] : layers)
            in.push_back({ &map, parse_layer(name) });
        return fuse(in, LayerPriority::parse(priority));
    }, py::arg("layers"), py::arg("priority") = "sfm<ho3<pfh");

    py::class_<SceneConfig>(m, "SceneConfig")
        .def_readwrite("name", &SceneConfig::name)
        .def_readwrite("fps", &SceneConfig::fps)
        .def_readwrite("robot_radius", &SceneConfig::robot_radius)
        .def_readwrite("odom_sigma_trans", &SceneConfig::odom_sigma_trans)
        .def_readwrite("odom_sigma_rot", &SceneConfig::odom_sigma_rot)
        .def_readwrite("rng_seed", &SceneConfig::rng_seed)
        .def_property_readonly("n_obstacles", [](const SceneConfig& c) { return c.obstacles.size(); })
        .def_property_readonly("n_humans", [](const SceneConfig& c) { return c.humans.size(); })
        .def("to_text", &to_scenario_text);

    m.def("builtin_config", [](const std::string& kind) {
        return builtin_config(parse_scene_kind(kind));
    });
    m.def("parse_scenario", [](const std::string& text) { return parse_scenario(text); });
    m.def("ground_truth_map", &ground_truth_map, py::arg("config"), py::arg("resolution") = 0.10);
    m.def("simulate_frame_count", [](const SceneConfig& c) {
        return simulate_sequence(c).frames.size();
    });

    py::class_<PoseGraph>(m, "PoseGraph")
        .def(py::init([](double x, double y, double theta) { return PoseGraph(Pose2(x, y, theta)); }),
             py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("theta") = 0.0)
        .def("add_keyframe", [](PoseGraph& g, double x, double y, double theta) {
            return g.add_keyframe(Pose2(x, y, theta));
        })
        .def("add_loop_closure", [](PoseGraph& g, int i, int j, double x, double y, double theta) {
            g.add_loop_closure(i, j, Pose2(x, y, theta));
        })
        .def("set_pose", [](PoseGraph& g, int id, double x, double y, double theta) {
            g.set_pose(id, Pose2(x, y, theta));
        })
        .def("optimize", [](PoseGraph& g, int max_iters) {
            OptimizeOptions o;
            o.max_iters = max_iters;
            return g.optimize(o).updated_nodes;
        }, py::arg("max_iters") = 50)
        .def("pose", [](const PoseGraph& g, int id) {
            const Pose2& p = g.pose(id);
            return py::make_tuple(p.x, p.y, p.theta);
        })
        .def("chi2", &PoseGraph::chi2)
        .def("__len__", &PoseGraph::size)
        .def("to_g2o", &PoseGraph::to_g2o)
        .def_static("from_g2o", [](const std::string& text) { return PoseGraph::from_g2o(text); });

    m.def("estimate_depth", [](double k, double f, double H, double h_px) {
        return estimate_depth({ k }, f, H, h_px);
    }, py::arg("k"), py::arg("f"), py::arg("H"), py::arg("h_px"));

    m.def("plan_path", [](const TraversabilityMap& map, std::pair<double, double> start,
                          std::pair<double, double> goal, bool unknown_free) -> py::object {
        const auto plan = plan_path(map, vec(start), vec(goal),
                                    unknown_free ? UnknownPolicy::Free : UnknownPolicy::Blocked);
        if (!plan)
            return py::none();
        py::list pts;
        for (const Vec2& w : plan->waypoints)
            pts.append(py::make_tuple(w.x, w.y));
        return py::make_tuple(pts, plan->cost);
    }, py::arg("map"), py::arg("start"), py::arg("goal"), py::arg("unknown_free") = false);

    m.def("sample_queries", [](const TraversabilityMap& gt, int n, std::uint64_t seed,
                               double min_separation) {
        py::list out;
        for (const auto& q : sample_queries(gt, n, seed, min_separation))
            out.append(py::make_tuple(py::make_tuple(q.start.x, q.start.y),
                                      py::make_tuple(q.goal.x, q.goal.y)));
        return out;
    }, py::arg("ground_truth"), py::arg("n"), py::arg("seed"), py::arg("min_separation") = 2.0);

    m.def("evaluate_map", [](const TraversabilityMap& candidate, const TraversabilityMap& gt,
                             const std::vector<std::pair<std::pair<double, double>,
                                                         std::pair<double, double>>>& queries) {
        std::vector<JourneyQuery> q;
        for (const auto& [s, g] : queries)
            q.push_back({ vec(s), vec(g) });
        const MapScore s = evaluate_map(candidate, gt, q);
        return py::make_tuple(s.score, s.n_failed);
    });

    m.def("run_ablation", [](const std::string& scenario, std::uint64_t seed,
                             const std::vector<std::string>& combos, int n_queries,
                             const std::string& out_dir, const std::string& priority) {
        RunConfig rc;
        rc.scenario = scenario;
        rc.seed = seed;
        if (!combos.empty())
            rc.combos = combos;
        rc.n_queries = n_queries;
        rc.out_dir = out_dir;
        rc.priority = LayerPriority::parse(priority);
        std::optional<AblationResult> r;
        {
            py::gil_scoped_release release;
            r.emplace(run_ablation(rc));
        }
        py::dict maps;
        for (const auto& [label, map] : r->maps)
            maps[py::str(label)] = map;
        return py::make_tuple(report_rows(r->report), r->report.to_csv(), maps);
    }, py::arg("scenario") = "I", py::arg("seed") = 0,
       py::arg("combos") = std::vector<std::string> {}, py::arg("n_queries") = 20,
       py::arg("out_dir") = "", py::arg("priority") = "sfm<ho3<pfh");
}
