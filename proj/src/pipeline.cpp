#include "travmap/pipeline.hpp"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace travmap {

TraversabilityMap PipelineResult::rebuild(const EnabledLayers& enabled,
                                          const LayerPriority& priority) const
{
    return rebuild_map(store, graph.snapshot(), landmarks, geometry, enabled, priority,
                       fusion_params);
}

namespace {

/* Depth of a world point along the optical axis, <= 0 behind the camera */
double axial_depth(const Pose2& cam, const Vec2& p)
{
    return se2_apply_inverse(cam, p).x;
}

std::vector<CalibrationSample> collect_calibration(const SceneConfig& cfg,
                                                   const SimulationResult& sim,
                                                   const PipelineParams& params)
{
    std::vector<CalibrationSample> samples;
    const double H = params.assumed_body_height;
    for (const auto& frame : sim.frames) {
        for (const auto& d : frame.detections) {
            if (static_cast<int>(samples.size()) >= params.calibration_samples)
                return samples;
            const double h_px = apparent_height_from_head(cfg.intrinsics, d.box.y_min, H);
            if (h_px > 0.0)
                samples.push_back({ d.true_depth, cfg.intrinsics.f, h_px, H });
        }
    }
    return samples;
}

} // namespace

PipelineResult run_pipeline(const SceneConfig& cfg, const SimulationResult& sim,
                            const PipelineParams& params)
{
    if (params.keyframe_interval < 1)
        throw std::invalid_argument("keyframe interval must be at least 1");
    if (sim.frames.empty())
        throw std::invalid_argument("simulation has no frames");

    const CameraIntrinsics& intr = cfg.intrinsics;
    const MapGeometry geometry =
        TraversabilityMap::create(cfg.bounds.x_min, cfg.bounds.y_min, cfg.bounds.x_max,
                                  cfg.bounds.y_max, params.resolution)
            .geometry();

    PipelineResult out {
        PoseGraph(sim.frames.front().camera_pose),
        {}, {}, {},
        MapFusion(geometry, params.evidence),
        geometry,
        {},
        params.evidence,
    };
    PipelineDiagnostics& diag = out.diagnostics;

    std::map<int, const SceneFeature*> feature_by_id;
    for (const auto& f : sim.features)
        feature_by_id[f.feature_id] = &f;

    const auto samples = collect_calibration(cfg, sim, params);
    const ScaleCalibration cal = samples.empty() ? ScaleCalibration {} : calibrate_scale(samples);
    diag.calibration = cal;

    const auto keep = filter_turning_frames(sim.frames, params.omega_max);

    std::vector<Pose2> keyframe_truth { sim.frames.front().camera_pose };
    int keyframe = 0;
    Pose2 since_keyframe;
    int last_closure = -params.closure_cooldown;
    std::set<int> seen_last_frame;

    auto on_event = [&](const OptimizationEvent& event) {
        ++diag.optimization_events;
        out.fusion.ingest(out.store, out.landmarks, out.graph.snapshot());
        out.fusion.apply_event(event, out.store, out.landmarks, out.graph.snapshot());
        diag.reanchored_records += out.fusion.reanchored_last_event();
    };

    for (std::size_t k = 0; k < sim.frames.size(); ++k) {
        const FrameObservation& frame = sim.frames[k];

        if (k > 0) {
            since_keyframe = se2_compose(since_keyframe, frame.odometry);
            if (static_cast<int>(k) % params.keyframe_interval == 0) {
                keyframe = out.graph.add_keyframe(since_keyframe);
                since_keyframe = Pose2();
                keyframe_truth.push_back(frame.camera_pose);

                /* Revisit of an old keyframe closes a loop */
                if (keyframe - last_closure >= params.closure_cooldown) {
                    int best = -1;
                    double best_dist = params.closure_distance;
                    for (int j = 0; j + params.closure_min_gap <= keyframe; ++j) {
                        const Pose2 rel = se2_between(keyframe_truth[j], frame.camera_pose);
                        const double dist = std::hypot(rel.x, rel.y);
                        if (dist < best_dist && std::abs(rel.theta) < params.closure_angle) {
                            best = j;
                            best_dist = dist;
                        }
                    }
                    if (best >= 0) {
                        out.graph.add_loop_closure(
                            best, keyframe, se2_between(keyframe_truth[best], frame.camera_pose));
                        ++diag.loop_closures;
                        last_closure = keyframe;
                        on_event(out.graph.optimize(params.optimizer));
                    }
                }
            }
        }

        const PoseSnapshot poses = out.graph.snapshot();
        const Pose2 keyframe_pose = poses[static_cast<std::size_t>(keyframe)];
        const Pose2 camera = se2_compose(keyframe_pose, since_keyframe);

        /* SfM: anchor landmarks where first seen */
        std::map<int, const FeatureObservation*> observed;
        for (const auto& obs : frame.features) {
            if (!obs.visible)
                continue;
            observed[obs.feature_id] = &obs;
            if (!out.landmarks.contains(obs.feature_id)) {
                const SceneFeature& f = *feature_by_id.at(obs.feature_id);
                out.landmarks[obs.feature_id] = {
                    obs.feature_id, keyframe,
                    se2_apply_inverse(keyframe_truth[static_cast<std::size_t>(keyframe)],
                                      { f.position.x, f.position.y }),
                    f.position.z,
                };
            }
            out.store.add_sfm(obs.feature_id);
        }

        /* People: depth from head height, tracked in the image */
        std::vector<BBox> boxes;
        std::vector<TrackObservation> track_obs;
        std::vector<Vec2> local_offsets;
        for (const auto& d : frame.detections) {
            const double H = params.assumed_body_height;
            const double h_px = apparent_height_from_head(intr, d.box.y_min, H);
            const double depth = estimate_depth(cal, intr.f, H, h_px);
            const Vec2 in_camera { depth, -depth * (d.box.center_u() - intr.cx) / intr.f };
            const Vec2 world = human_map_position(camera, intr, d.box, depth);
            boxes.push_back(d.box);
            track_obs.push_back({ frame.frame_index, keyframe, d.box, depth, world });
            local_offsets.push_back(se2_apply(since_keyframe, in_camera));
        }
        const StepResult assoc = step(out.tracks, boxes, track_obs, params.tracker.gate);
        prune(out.tracks, params.tracker.max_missed);

        if (keep[k]) {
            for (std::size_t di = 0; di < frame.detections.size(); ++di) {
                const Detection& det = frame.detections[di];
                const TrackObservation& tob = track_obs[di];
                diag.position_errors.push_back((tob.world - det.true_world).norm());

                const int t = assoc.track_of_detection[di];
                if (t < 0 || out.tracks[static_cast<std::size_t>(t)].state != TrackState::Confirmed)
                    continue;
                const int track_id = out.tracks[static_cast<std::size_t>(t)].track_id;
                out.store.add_pfh(keyframe, local_offsets[di], track_id);

                /* HO3: landmarks seen inside the person's region are in front,
                 * ones that just vanished there are hidden behind the person */
                std::vector<ClassifiedCue> cues;
                for (const auto& [fid, lm] : out.landmarks) {
                    const bool is_observed = observed.contains(fid);
                    if (!is_observed && !seen_last_frame.contains(fid))
                        continue;
                    const Vec2 lw = landmark_world(lm, poses);
                    if (axial_depth(camera, lw) <= 0.0)
                        continue;
                    const Projection pred = project_point(intr, camera, { lw.x, lw.y, lm.height });
                    if (!is_observed && !(pred.u >= 0.0 && pred.u < intr.image_width &&
                                          pred.v >= 0.0 && pred.v < intr.image_height))
                        continue;
                    FeatureCue cue { fid, pred.u, pred.v, is_observed, pred.depth };
                    if (is_observed) {
                        cue.u = observed.at(fid)->u;
                        cue.v = observed.at(fid)->v;
                    }
                    const OcclusionOrder order =
                        classify_occlusion(cue, det.box, tob.depth, OrderingRule::Visibility);
                    if (order == OcclusionOrder::Unrelated)
                        continue;

                    const SceneFeature& f = *feature_by_id.at(fid);
                    FeatureCue oracle = cue;
                    oracle.predicted_depth = project_point(intr, frame.camera_pose, f.position).depth;
                    ++diag.ordering_checked;
                    if (classify_occlusion(oracle, det.box, det.true_depth, OrderingRule::Depth) != order)
                        ++diag.ordering_disagreements;
                    cues.push_back({ cue, order });
                }

                if (const auto pair = infer_pass_pair(cues, det.box, tob.depth)) {
                    out.store.add_ho3(pair->front_id, pair->behind_id, track_id);
                    ++diag.ho3_emitted;
                    const double df = project_point(intr, frame.camera_pose,
                                                    feature_by_id.at(pair->front_id)->position).depth;
                    const double db = project_point(intr, frame.camera_pose,
                                                    feature_by_id.at(pair->behind_id)->position).depth;
                    if (!(df < det.true_depth && det.true_depth < db))
                        ++diag.ho3_bracket_violations;
                }
            }
        }

        seen_last_frame.clear();
        for (const auto& [fid, obs] : observed)
            seen_last_frame.insert(fid);

        out.fusion.ingest(out.store, out.landmarks, poses);
    }
    return out;
}

} // namespace travmap
