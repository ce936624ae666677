#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "travmap/ablation.hpp"
#include "travmap/scenario_io.hpp"

using namespace travmap;
namespace fs = std::filesystem;

namespace {

struct Options
{
    std::string scenario = "I";
    std::string combos;
    std::uint64_t seed = 0;
    std::string out = "travmap_out";
    int queries = 20;
    double omega_max = 0.3;
    std::string priority = "sfm<ho3<pfh";
    std::string unknown = "blocked";
    double min_separation = 2.0;
    std::optional<double> penalty;
};

std::vector<std::string> split_combos(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

RunConfig make_run_config(const Options& o)
{
    RunConfig rc;
    rc.scenario = o.scenario;
    if (!o.combos.empty())
        rc.combos = split_combos(o.combos);
    rc.seed = o.seed;
    rc.out_dir = o.out;
    rc.n_queries = o.queries;
    rc.min_separation = o.min_separation;
    rc.failure_penalty = o.penalty;
    rc.unknown = o.unknown == "free" ? UnknownPolicy::Free : UnknownPolicy::Blocked;
    rc.priority = LayerPriority::parse(o.priority);
    rc.pipeline.omega_max = o.omega_max;
    return rc;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f)
        throw std::runtime_error("cannot write '" + path.string() + "'");
}

nlohmann::json frame_json(const FrameObservation& fr)
{
    nlohmann::json j;
    j["frame"] = fr.frame_index;
    j["t"] = fr.timestamp;
    j["camera"] = { fr.camera_pose.x, fr.camera_pose.y, fr.camera_pose.theta };
    j["odometry"] = { fr.odometry.x, fr.odometry.y, fr.odometry.theta };
    j["angular_speed"] = fr.angular_speed;
    auto& feats = j["features"] = nlohmann::json::array();
    for (const auto& f : fr.features)
        feats.push_back({ { "id", f.feature_id }, { "u", f.u }, { "v", f.v },
                          { "depth", f.true_depth }, { "visible", f.visible } });
    auto& dets = j["detections"] = nlohmann::json::array();
    for (const auto& d : fr.detections)
        dets.push_back({ { "box", { d.box.x_min, d.box.x_max, d.box.y_min, d.box.y_max } },
                         { "depth", d.true_depth },
                         { "world", { d.true_world.x, d.true_world.y } },
                         { "agent", d.agent } });
    return j;
}

int cmd_simulate(const Options& o)
{
    const SceneConfig scene = resolve_scenario(o.scenario, o.seed);
    const SimulationResult sim = simulate_sequence(scene);
    fs::create_directories(o.out);

    std::ofstream f(fs::path(o.out) / "frames.jsonl", std::ios::binary);
    for (const auto& fr : sim.frames)
        f << frame_json(fr).dump() << '\n';
    write_text(fs::path(o.out) / "scenario.ini", to_scenario_text(scene));
    write_pgm_file((fs::path(o.out) / "ground_truth.pgm").string(), ground_truth_map(scene));
    std::printf("%s: %zu frames, %zu features\n", scene.name.c_str(), sim.frames.size(),
                sim.features.size());
    return 0;
}

int cmd_build(const Options& o)
{
    const RunConfig rc = make_run_config(o);
    rc.validate();
    const SceneConfig scene = resolve_scenario(rc.scenario, rc.seed);
    const SimulationResult sim = simulate_sequence(scene);
    const PipelineResult run = run_pipeline(scene, sim, rc.pipeline);

    const fs::path dir(o.out);
    fs::create_directories(dir);
    for (const auto& combo : rc.combos) {
        const EnabledLayers enabled = EnabledLayers::parse(combo);
        write_pgm_file((dir / map_file_name(scene.name, enabled.label())).string(),
                       run.render(enabled, rc.priority));
    }
    write_pgm_file((dir / "ground_truth.pgm").string(), ground_truth_map(scene));
    write_text(dir / "evidence.log", run.store.to_log());
    write_text(dir / "posegraph.g2o", run.graph.to_g2o());

    const auto& d = run.diagnostics;
    std::printf("%s: %d keyframes, %zu landmarks, %zu evidence records, %d loop closures\n",
                scene.name.c_str(), run.graph.size(), run.landmarks.size(), run.store.size(),
                d.loop_closures);
    return 0;
}

int cmd_evaluate(const Options& o, const std::string& gt_path,
                 const std::vector<std::string>& maps, const std::string& label,
                 double resolution)
{
    const TraversabilityMap gt = read_pgm_file(gt_path, {}, resolution);
    const auto queries = sample_queries(gt, o.queries, o.seed, o.min_separation);
    const UnknownPolicy unknown =
        o.unknown == "free" ? UnknownPolicy::Free : UnknownPolicy::Blocked;

    QualityReport report;
    for (const auto& path : maps) {
        const TraversabilityMap m = read_pgm_file(path, {}, resolution);
        const MapScore s = evaluate_map(m, gt, queries, o.penalty, unknown);
        /* <scenario>_<combo>.pgm as written by build and ablate */
        std::string name = fs::path(path).stem().string();
        std::string scenario = label;
        const auto cut = name.find('_');
        if (scenario.empty() && cut != std::string::npos) {
            scenario = name.substr(0, cut);
            name = name.substr(cut + 1);
        } else if (!scenario.empty() && name.rfind(scenario + "_", 0) == 0) {
            name = name.substr(scenario.size() + 1);
        }
        report.rows.push_back({ name, scenario.empty() ? "custom" : scenario, s.score,
                                s.n_queries, s.n_failed });
    }
    report.sort();
    std::cout << report.to_csv();
    return 0;
}

int cmd_ablate(const Options& o)
{
    const AblationResult r = run_ablation(make_run_config(o));
    std::cout << r.report.to_csv();
    return 0;
}

void add_common(CLI::App* sub, Options& o, bool pipeline)
{
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    if (!pipeline)
        return;
    sub->add_option("--scenario", o.scenario, "I, L, T or a scenario file")->capture_default_str();
    sub->add_option("--combos", o.combos, "Comma list of layer combinations, e.g. SfM+PfH,HO3");
    sub->add_option("--omega-max", o.omega_max, "Turn filter threshold, rad/s")
        ->capture_default_str();
    sub->add_option("--priority", o.priority, "Layer priority, lowest first")
        ->capture_default_str();
}

void add_metric(CLI::App* sub, Options& o)
{
    sub->add_option("--queries", o.queries, "Number of journey queries")->capture_default_str();
    sub->add_option("--min-separation", o.min_separation, "Query start/goal separation, m")
        ->capture_default_str();
    sub->add_option("--penalty", o.penalty, "Failure penalty, m (default: oracle cost)");
    sub->add_option("--unknown", o.unknown, "Planner treatment of unknown cells")
        ->check(CLI::IsMember({ "blocked", "free" }))
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Traversability mapping from human trails and occlusion ordering" };
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "Simulate a scenario and dump its frames");
    simulate->add_option("--scenario", o.scenario, "I, L, T or a scenario file")
        ->capture_default_str();
    add_common(simulate, o, false);

    auto* build = app.add_subcommand("build", "Build traversability maps");
    add_common(build, o, true);

    std::string gt_path;
    std::vector<std::string> maps;
    std::string label;
    double resolution = 0.10;
    auto* evaluate = app.add_subcommand("evaluate", "Score PGM maps against a ground truth PGM");
    evaluate->add_option("--ground-truth", gt_path, "Ground truth PGM")->required();
    evaluate->add_option("maps", maps, "Candidate PGM maps")->required();
    evaluate->add_option("--label", label, "Scenario label (default: file name prefix)");
    evaluate->add_option("--resolution", resolution, "Cell size, m")->capture_default_str();
    evaluate->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    add_metric(evaluate, o);

    auto* ablate = app.add_subcommand("ablate", "Score every layer combination");
    add_common(ablate, o, true);
    add_metric(ablate, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return cmd_simulate(o);
        if (build->parsed())
            return cmd_build(o);
        if (evaluate->parsed())
            return cmd_evaluate(o, gt_path, maps, label, resolution);
        return cmd_ablate(o);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
