#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "travmap/mot.hpp"
#include "travmap/random.hpp"

using namespace travmap;

namespace {

BBox box_at(double u, double v = 200.0)
{
    return { u - 20.0, u + 20.0, v - 80.0, v + 80.0 };
}

StepResult feed(std::vector<HumanTrack>& tracks, int frame, const std::vector<BBox>& boxes,
                double gate = 80.0)
{
    std::vector<TrackObservation> obs;
    for (const auto& b : boxes)
        obs.push_back({ frame, 0, b, 3.0, {} });
    return step(tracks, boxes, obs, gate);
}

} // namespace

TEST_CASE("nearby detection keeps its track")
{
    std::vector<HumanTrack> tracks;
    feed(tracks, 0, { box_at(120) });
    REQUIRE(tracks.size() == 1);
    const int id = tracks[0].track_id;
    const auto r = feed(tracks, 1, { box_at(125) });
    CHECK(tracks.size() == 1);
    CHECK(r.track_of_detection[0] == 0);
    CHECK(tracks[0].track_id == id);
    CHECK(tracks[0].history.size() == 2);
}

TEST_CASE("far detection spawns a fresh id")
{
    std::vector<HumanTrack> tracks;
    feed(tracks, 0, { box_at(100) });
    feed(tracks, 1, { box_at(100), box_at(600) });
    REQUIRE(tracks.size() == 2);
    CHECK(tracks[1].track_id == tracks[0].track_id + 1);
    CHECK(tracks[1].state == TrackState::Tentative);
}

TEST_CASE("no detections only ages tracks")
{
    std::vector<HumanTrack> tracks;
    feed(tracks, 0, { box_at(100), box_at(400) });
    feed(tracks, 1, {});
    CHECK(tracks.size() == 2);
    for (const auto& t : tracks)
        CHECK(t.missed_count == 1);
}

TEST_CASE("confirmation after three consecutive hits")
{
    std::vector<HumanTrack> tracks;
    feed(tracks, 0, { box_at(100) });
    feed(tracks, 1, { box_at(102) });
    CHECK(tracks[0].state == TrackState::Tentative);
    feed(tracks, 2, { box_at(104) });
    CHECK(tracks[0].state == TrackState::Confirmed);

    std::vector<HumanTrack> broken;
    feed(broken, 0, { box_at(100) });
    feed(broken, 1, { box_at(102) });
    feed(broken, 2, {});
    feed(broken, 3, { box_at(104) });
    CHECK(broken[0].state == TrackState::Tentative);
}

TEST_CASE("pruning and no re-identification")
{
    std::vector<HumanTrack> tracks;
    feed(tracks, 0, { box_at(100) });
    for (int f = 1; f <= 15; ++f) {
        feed(tracks, f, {});
        prune(tracks, 15);
    }
    CHECK(tracks[0].missed_count == 15);
    CHECK(tracks[0].alive());
    feed(tracks, 16, {});
    prune(tracks, 15);
    CHECK(tracks[0].state == TrackState::Dead);

    feed(tracks, 17, { box_at(100) });
    REQUIRE(tracks.size() == 2);
    CHECK(tracks[1].track_id == 2);
    CHECK(tracks[0].history.size() == 1);
    CHECK_THROWS_AS(prune(tracks, 0), std::invalid_argument);
}

TEST_CASE("greedy matching takes the closest pair first")
{
    std::vector<HumanTrack> tracks;
    feed(tracks, 0, { box_at(100), box_at(160) });
    const auto r = feed(tracks, 1, { box_at(150), box_at(95) });
    CHECK(r.track_of_detection[0] == 1);
    CHECK(r.track_of_detection[1] == 0);
}

TEST_CASE("association is a partial matching with unique ids")
{
    Rng rng(8);
    std::vector<HumanTrack> tracks;
    for (int f = 0; f < 300; ++f) {
        std::vector<BBox> boxes;
        const auto n = rng.below(4);
        for (std::uint64_t k = 0; k < n; ++k)
            boxes.push_back(box_at(640.0 * rng.uniform(), 480.0 * rng.uniform()));
        const std::size_t before = tracks.size();
        const auto r = feed(tracks, f, boxes);
        prune(tracks, 3);
        std::set<int> used;
        for (int t : r.track_of_detection) {
            REQUIRE(t >= 0);
            CHECK(used.insert(t).second);
            if (static_cast<std::size_t>(t) < before)
                CHECK(tracks[static_cast<std::size_t>(t)].history.back().frame_index == f);
        }
    }
    std::set<int> ids;
    for (const auto& t : tracks)
        CHECK(ids.insert(t.track_id).second);
    for (const auto& t : tracks)
        for (std::size_t k = 1; k < t.history.size(); ++k)
            CHECK(t.history[k].frame_index > t.history[k - 1].frame_index);
}

TEST_CASE("turn filter")
{
    std::vector<FrameObservation> frames(3);
    frames[1].angular_speed = 0.5;
    frames[2].angular_speed = -0.3;
    CHECK(filter_turning_frames(frames, 0.3) == std::vector<bool> { true, false, true });
    CHECK(filter_turning_frames(frames, kNoTurnFilter) == std::vector<bool> { true, true, true });
    CHECK_THROWS_AS(filter_turning_frames(frames, 0.0), std::invalid_argument);
}

TEST_CASE("single person in a clear scene gives one confirmed track")
{
    SceneConfig cfg;
    cfg.robot.waypoints = { { 0.0, Pose2(0.2, 0.5, 0.0) }, { 10.0, Pose2(0.2, 5.5, 0.0) } };
    AgentTrajectory h;
    h.waypoints = { { 0.0, Pose2(2.5, 0.5, 1.57) }, { 10.0, Pose2(2.5, 5.5, 1.57) } };
    cfg.humans = { h };
    const auto sim = simulate_sequence(cfg);

    std::vector<HumanTrack> tracks;
    for (const auto& f : sim.frames) {
        std::vector<BBox> boxes;
        std::vector<TrackObservation> obs;
        for (const auto& d : f.detections) {
            boxes.push_back(d.box);
            obs.push_back({ f.frame_index, 0, d.box, d.true_depth, d.true_world });
        }
        step(tracks, boxes, obs, 80.0);
        prune(tracks, 15);
    }
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].state == TrackState::Confirmed);
    CHECK(tracks[0].history.size() == sim.frames.size());
}
