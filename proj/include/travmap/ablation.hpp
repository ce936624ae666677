#ifndef TRAVMAP_ABLATION_HPP
#define TRAVMAP_ABLATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "travmap/gridmap.hpp"
#include "travmap/pipeline.hpp"
#include "travmap/quality.hpp"
#include "travmap/scenesim.hpp"

namespace travmap {

struct RunConfig
{
    std::string scenario = "I";             /* I, L, T or a scenario file */
    std::vector<std::string> combos = canonical_combinations();
    std::uint64_t seed = 0;
    std::string out_dir;                    /* empty: write nothing */
    int n_queries = 20;
    double min_separation = 2.0;            /* m */
    std::optional<double> failure_penalty;  /* default: oracle path cost */
    UnknownPolicy unknown = UnknownPolicy::Blocked;
    LayerPriority priority;
    PipelineParams pipeline;

    void validate() const;
};

/* Built-in kind or scenario file; the seed drives the scene's noise */
SceneConfig resolve_scenario(const std::string& scenario, std::uint64_t seed);

struct AblationResult
{
    std::string scenario;
    QualityReport report;
    TraversabilityMap ground_truth;
    std::map<std::string, TraversabilityMap> maps;   /* by combination label */
    PipelineDiagnostics diagnostics;
};

/*
 * One simulation and one query set shared by every combination. Writes
 * <scenario>_<combo>.pgm, ground_truth.pgm and report.csv when out_dir is
 * set.
 */
AblationResult run_ablation(const RunConfig& cfg);

/* "<scenario>_<combo>.pgm" */
std::string map_file_name(const std::string& scenario, const std::string& combo);

} // namespace travmap

#endif // TRAVMAP_ABLATION_HPP
