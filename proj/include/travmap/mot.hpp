#ifndef TRAVMAP_MOT_HPP
#define TRAVMAP_MOT_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "travmap/geometry.hpp"
#include "travmap/scenesim.hpp"

namespace travmap {

enum class TrackState : std::uint8_t
{
    Tentative,
    Confirmed,
    Dead,
};

struct TrackObservation
{
    int frame_index = 0;   /* strictly increasing along a track */
    int keyframe_id = 0;   /* anchor keyframe at observation time */
    BBox box;
    double depth = 0.0;
    Vec2 world;
};

struct HumanTrack
{
    int track_id = 0;
    std::vector<TrackObservation> history;
    int missed_count = 0;
    int consecutive_hits = 0;
    TrackState state = TrackState::Tentative;

    bool alive() const { return state != TrackState::Dead; }
};

struct TrackerParams
{
    double gate = 80.0;       /* px, bbox-center distance */
    int max_missed = 15;      /* frames */
};

/* Result of one association step: track index per detection, -1 if none */
struct StepResult
{
    std::vector<int> track_of_detection;
};

/*
 * Greedy nearest-neighbor association of detections to live tracks by bbox
 * center distance. Matched tracks get the observation appended, unmatched
 * detections start tentative tracks with id = max existing id + 1.
 * observations[k] supplies the history entry for detections[k].
 */
StepResult step(std::vector<HumanTrack>& tracks, std::span<const BBox> detections,
                std::span<const TrackObservation> observations, double gate);

/* Tracks missing for more than max_missed frames die; dead tracks stay */
void prune(std::vector<HumanTrack>& tracks, int max_missed);

/* Keep frames whose |angular speed| <= omega_max; infinity disables */
std::vector<bool> filter_turning_frames(std::span<const FrameObservation> frames,
                                        double omega_max = 0.3);

inline constexpr double kNoTurnFilter = std::numeric_limits<double>::infinity();

} // namespace travmap

#endif // TRAVMAP_MOT_HPP
