#ifndef TRAVMAP_PIPELINE_HPP
#define TRAVMAP_PIPELINE_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "travmap/evidence.hpp"
#include "travmap/mot.hpp"
#include "travmap/posegraph.hpp"
#include "travmap/scenesim.hpp"

namespace travmap {

struct PipelineParams
{
    double resolution = 0.10;          /* m */
    int keyframe_interval = 15;        /* frames */
    double closure_distance = 0.15;    /* m, true distance between keyframes */
    double closure_angle = 0.2;        /* rad */
    int closure_min_gap = 20;          /* keyframes */
    int closure_cooldown = 10;         /* keyframes between closures */
    double omega_max = 0.3;            /* rad/s, kNoTurnFilter disables */
    TrackerParams tracker;
    double assumed_body_height = 1.70; /* m */
    int calibration_samples = 30;
    EvidenceParams evidence;
    OptimizeOptions optimizer;
};

/* Cross-checks gathered while the pipeline runs on simulated data */
struct PipelineDiagnostics
{
    ScaleCalibration calibration;
    std::vector<double> position_errors;   /* m, per processed detection */
    int ordering_checked = 0;              /* in-region cues */
    int ordering_disagreements = 0;        /* visibility rule vs true depth */
    int ho3_emitted = 0;
    int ho3_bracket_violations = 0;
    int loop_closures = 0;
    int optimization_events = 0;
    std::size_t reanchored_records = 0;
};

struct PipelineResult
{
    PoseGraph graph;
    LandmarkTable landmarks;
    EvidenceStore store;
    std::vector<HumanTrack> tracks;
    MapFusion fusion;
    MapGeometry geometry;
    PipelineDiagnostics diagnostics;
    EvidenceParams fusion_params;

    /* Incrementally maintained map for one layer combination */
    TraversabilityMap render(const EnabledLayers& enabled, const LayerPriority& priority) const
    { return fusion.render(enabled, priority); }
    /* From-scratch map at the final poses */
    TraversabilityMap rebuild(const EnabledLayers& enabled, const LayerPriority& priority) const;
};

/*
 * Simulated front-end into the mapping back-end: keyframes every
 * keyframe_interval frames from odometry, loop closures from true revisits
 * (each followed by an optimization and a map re-anchoring), SfM landmarks
 * on first sight, PfH and HO3 evidence from confirmed tracks on frames that
 * pass the turn filter.
 */
PipelineResult run_pipeline(const SceneConfig& cfg, const SimulationResult& sim,
                            const PipelineParams& params = {});

} // namespace travmap

#endif // TRAVMAP_PIPELINE_HPP
