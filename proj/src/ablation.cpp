#include "travmap/ablation.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "travmap/scenario_io.hpp"

namespace travmap {

void RunConfig::validate() const
{
    if (combos.empty())
        throw std::invalid_argument("at least one layer combination is required");
    std::set<std::string> seen;
    for (const auto& c : combos) {
        const std::string label = EnabledLayers::parse(c).label();
        if (!seen.insert(label).second)
            throw std::invalid_argument("combination " + label + " listed twice");
    }
    if (n_queries < 1)
        throw std::invalid_argument("at least one query is required");
    if (!(min_separation >= 0.0))
        throw std::invalid_argument("query separation must be non-negative");
}

SceneConfig resolve_scenario(const std::string& scenario, std::uint64_t seed)
{
    SceneConfig cfg;
    if (scenario == "I" || scenario == "L" || scenario == "T")
        cfg = builtin_config(parse_scene_kind(scenario));
    else
        cfg = load_scenario(scenario);
    cfg.rng_seed = seed;
    return cfg;
}

std::string map_file_name(const std::string& scenario, const std::string& combo)
{
    return scenario + "_" + combo + ".pgm";
}

AblationResult run_ablation(const RunConfig& cfg)
{
    cfg.validate();
    const SceneConfig scene = resolve_scenario(cfg.scenario, cfg.seed);

    AblationResult out {
        scene.name, {}, ground_truth_map(scene, cfg.pipeline.resolution), {}, {},
    };
    const SimulationResult sim = simulate_sequence(scene);
    const PipelineResult run = run_pipeline(scene, sim, cfg.pipeline);
    out.diagnostics = run.diagnostics;

    const auto queries = sample_queries(out.ground_truth, cfg.n_queries, cfg.seed,
                                        cfg.min_separation);

    for (const auto& combo : cfg.combos) {
        const EnabledLayers enabled = EnabledLayers::parse(combo);
        const std::string label = enabled.label();
        try {
            TraversabilityMap map = run.render(enabled, cfg.priority);
            const MapScore s = evaluate_map(map, out.ground_truth, queries, cfg.failure_penalty,
                                            cfg.unknown);
            out.report.rows.push_back({ label, scene.name, s.score, s.n_queries, s.n_failed });
            out.maps.emplace(label, std::move(map));
        } catch (const std::exception& e) {
            throw std::runtime_error("combination " + label + ": " + e.what());
        }
    }
    out.report.sort();

    if (!cfg.out_dir.empty()) {
        const std::filesystem::path dir(cfg.out_dir);
        std::filesystem::create_directories(dir);
        for (const auto& [label, map] : out.maps)
            write_pgm_file((dir / map_file_name(scene.name, label)).string(), map);
        write_pgm_file((dir / "ground_truth.pgm").string(), out.ground_truth);
        std::ofstream csv(dir / "report.csv", std::ios::binary);
        csv << out.report.to_csv();
        if (!csv)
            throw std::runtime_error("cannot write report.csv in '" + cfg.out_dir + "'");
    }
    return out;
}

} // namespace travmap
