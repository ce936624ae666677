#include "travmap/mot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace travmap {

namespace {

constexpr int kConfirmHits = 3;

} // namespace

StepResult step(std::vector<HumanTrack>& tracks, std::span<const BBox> detections,
                std::span<const TrackObservation> observations, double gate)
{
    if (!(gate > 0.0))
        throw std::invalid_argument("association gate must be positive");
    if (observations.size() != detections.size())
        throw std::invalid_argument("one observation per detection is required");

    struct Candidate { double dist; int track; int det; };
    std::vector<Candidate> candidates;
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        const HumanTrack& tr = tracks[t];
        if (!tr.alive() || tr.history.empty())
            continue;
        const BBox& last = tr.history.back().box;
        for (std::size_t d = 0; d < detections.size(); ++d) {
            const double dist = std::hypot(detections[d].center_u() - last.center_u(),
                                           detections[d].center_v() - last.center_v());
            if (dist <= gate)
                candidates.push_back({ dist, static_cast<int>(t), static_cast<int>(d) });
        }
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        return std::tie(a.dist, tracks[a.track].track_id, a.det) <
               std::tie(b.dist, tracks[b.track].track_id, b.det);
    });

    StepResult result;
    result.track_of_detection.assign(detections.size(), -1);
    std::vector<bool> track_taken(tracks.size(), false);
    for (const auto& c : candidates) {
        if (track_taken[static_cast<std::size_t>(c.track)] ||
            result.track_of_detection[static_cast<std::size_t>(c.det)] >= 0)
            continue;
        track_taken[static_cast<std::size_t>(c.track)] = true;
        result.track_of_detection[static_cast<std::size_t>(c.det)] = c.track;
    }

    for (std::size_t t = 0; t < tracks.size(); ++t) {
        HumanTrack& tr = tracks[t];
        if (!tr.alive())
            continue;
        if (track_taken[t])
            continue;
        ++tr.missed_count;
        tr.consecutive_hits = 0;
    }

    int max_id = 0;
    for (const auto& tr : tracks)
        max_id = std::max(max_id, tr.track_id);

    for (std::size_t d = 0; d < detections.size(); ++d) {
        int& slot = result.track_of_detection[d];
        if (slot < 0) {
            HumanTrack fresh;
            fresh.track_id = ++max_id;
            tracks.push_back(fresh);
            slot = static_cast<int>(tracks.size()) - 1;
        }
        HumanTrack& tr = tracks[static_cast<std::size_t>(slot)];
        if (!tr.history.empty() && observations[d].frame_index <= tr.history.back().frame_index)
            throw std::invalid_argument("track observations must move forward in time");
        tr.history.push_back(observations[d]);
        tr.missed_count = 0;
        ++tr.consecutive_hits;
        if (tr.state == TrackState::Tentative && tr.consecutive_hits >= kConfirmHits)
            tr.state = TrackState::Confirmed;
    }
    return result;
}

void prune(std::vector<HumanTrack>& tracks, int max_missed)
{
    if (max_missed < 1)
        throw std::invalid_argument("max_missed must be at least 1");
    for (auto& tr : tracks)
        if (tr.alive() && tr.missed_count > max_missed)
            tr.state = TrackState::Dead;
}

std::vector<bool> filter_turning_frames(std::span<const FrameObservation> frames,
                                        double omega_max)
{
    if (!(omega_max > 0.0))
        throw std::invalid_argument("omega_max must be positive");
    std::vector<bool> keep;
    keep.reserve(frames.size());
    for (const auto& f : frames)
        keep.push_back(std::abs(f.angular_speed) <= omega_max);
    return keep;
}

} // namespace travmap
