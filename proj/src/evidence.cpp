#include "travmap/evidence.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace travmap {

ScaleCalibration calibrate_scale(std::span<const CalibrationSample> samples)
{
    if (samples.empty())
        throw std::invalid_argument("scale calibration needs at least one sample");
    std::vector<double> ks;
    ks.reserve(samples.size());
    for (const auto& s : samples) {
        if (!(s.slam_distance > 0.0 && s.f > 0.0 && s.h_px > 0.0 && s.H > 0.0))
            throw std::invalid_argument("calibration sample values must be positive");
        ks.push_back(s.slam_distance * s.h_px / (s.f * s.H));
    }
    std::sort(ks.begin(), ks.end());
    const std::size_t n = ks.size();
    const double k = (n % 2 == 1) ? ks[n / 2] : 0.5 * (ks[n / 2 - 1] + ks[n / 2]);
    return { k };
}

double estimate_depth(const ScaleCalibration& cal, double f, double H, double h_px)
{
    if (!(h_px > 0.0))
        throw std::invalid_argument("apparent height must be positive");
    return cal.k * f * H / h_px;
}

double apparent_height_from_head(const CameraIntrinsics& intr, double head_v, double H)
{
    const double rise = H - intr.cam_height;
    if (!(std::abs(rise) > 1e-6))
        throw std::invalid_argument("head at camera height carries no depth cue");
    /* head_v = cy - f (H - h_c) / D and h_px = f H / D */
    return (intr.cy - head_v) * H / rise;
}

Vec2 human_map_position(const Pose2& cam, const CameraIntrinsics& intr,
                        const BBox& box, double depth)
{
    const double lateral = depth * (box.center_u() - intr.cx) / intr.f;
    /* Right of the heading is -y in the camera's planar frame */
    return se2_apply(cam, { depth, -lateral });
}

const char* to_string(OcclusionOrder o)
{
    switch (o) {
    case OcclusionOrder::Front: return "front";
    case OcclusionOrder::Behind: return "behind";
    case OcclusionOrder::Unrelated: return "unrelated";
    }
    return "?";
}

OcclusionOrder classify_occlusion(const FeatureCue& cue, const BBox& human,
                                  double human_depth, OrderingRule rule)
{
    if (cue.u < human.x_min || cue.u > human.x_max)
        return OcclusionOrder::Unrelated;
    if (rule == OrderingRule::Depth && cue.predicted_depth)
        return *cue.predicted_depth < human_depth ? OcclusionOrder::Front
                                                  : OcclusionOrder::Behind;
    return cue.observed ? OcclusionOrder::Front : OcclusionOrder::Behind;
}

std::optional<PassPair> infer_pass_pair(std::span<const ClassifiedCue> cues,
                                        const BBox& human, double human_depth)
{
    std::vector<const FeatureCue*> fronts;
    std::vector<const FeatureCue*> behinds;
    bool all_depths = true;
    for (const auto& c : cues) {
        if (c.order == OcclusionOrder::Unrelated)
            continue;
        (c.order == OcclusionOrder::Front ? fronts : behinds).push_back(&c.cue);
        all_depths = all_depths && c.cue.predicted_depth.has_value();
    }
    if (fronts.empty() || behinds.empty())
        return std::nullopt;

    const FeatureCue* front = nullptr;
    const FeatureCue* behind = nullptr;
    if (all_depths) {
        for (const FeatureCue* f : fronts) {
            const double d = *f->predicted_depth;
            if (!(d < human_depth))
                continue;
            if (!front || d > *front->predicted_depth ||
                (d == *front->predicted_depth && f->feature_id < front->feature_id))
                front = f;
        }
        for (const FeatureCue* b : behinds) {
            const double d = *b->predicted_depth;
            if (!(d > human_depth))
                continue;
            if (!behind || d < *behind->predicted_depth ||
                (d == *behind->predicted_depth && b->feature_id < behind->feature_id))
                behind = b;
        }
    } else {
        const double uc = human.center_u();
        auto nearest = [uc](const std::vector<const FeatureCue*>& list) {
            const FeatureCue* best = nullptr;
            for (const FeatureCue* c : list) {
                const double d = std::abs(c->u - uc);
                if (!best || d < std::abs(best->u - uc) ||
                    (d == std::abs(best->u - uc) && c->feature_id < best->feature_id))
                    best = c;
            }
            return best;
        };
        front = nearest(fronts);
        behind = nearest(behinds);
    }
    if (!front || !behind || front->feature_id == behind->feature_id)
        return std::nullopt;
    return PassPair { front->feature_id, behind->feature_id };
}

namespace {

int parse_int(const std::string& token, const char* what)
{
    int v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw std::invalid_argument(std::string("bad ") + what + " '" + token + "'");
    return v;
}

double parse_double(const std::string& token, const char* what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size())
            throw std::invalid_argument(what);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("bad ") + what + " '" + token + "'");
    }
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string EvidenceRecord::to_line() const
{
    switch (kind) {
    case EvidenceKind::SfM:
        return "SFM " + std::to_string(feature_id);
    case EvidenceKind::PfH:
        return "PFH " + std::to_string(keyframe_id) + " " + format_double(offset.x) + " " +
               format_double(offset.y) + " " + std::to_string(track_id);
    case EvidenceKind::HO3:
        return "HO3 " + std::to_string(front_id) + " " + std::to_string(behind_id) + " " +
               std::to_string(track_id) + " " + std::to_string(weight);
    }
    return {};
}

EvidenceRecord EvidenceRecord::from_line(std::string_view line)
{
    std::istringstream in { std::string(line) };
    std::vector<std::string> tok;
    for (std::string t; in >> t;)
        tok.push_back(t);
    if (tok.empty())
        throw std::invalid_argument("empty evidence line");

    EvidenceRecord r;
    if (tok[0] == "SFM" && tok.size() == 2) {
        r.kind = EvidenceKind::SfM;
        r.feature_id = parse_int(tok[1], "feature id");
    } else if (tok[0] == "PFH" && tok.size() == 5) {
        r.kind = EvidenceKind::PfH;
        r.keyframe_id = parse_int(tok[1], "keyframe id");
        r.offset = { parse_double(tok[2], "offset"), parse_double(tok[3], "offset") };
        r.track_id = parse_int(tok[4], "track id");
    } else if (tok[0] == "HO3" && tok.size() == 5) {
        r.kind = EvidenceKind::HO3;
        r.front_id = parse_int(tok[1], "feature id");
        r.behind_id = parse_int(tok[2], "feature id");
        r.track_id = parse_int(tok[3], "track id");
        r.weight = parse_int(tok[4], "weight");
        if (r.front_id == r.behind_id)
            throw std::invalid_argument("HO3 record needs two distinct features");
        if (r.weight < 1)
            throw std::invalid_argument("HO3 weight must be positive");
    } else {
        throw std::invalid_argument("malformed evidence line '" + std::string(line) + "'");
    }
    return r;
}

void EvidenceStore::add_sfm(int feature_id)
{
    if (auto it = mSfmIndex.find(feature_id); it != mSfmIndex.end()) {
        ++mRecords[it->second].weight;
        return;
    }
    EvidenceRecord r;
    r.kind = EvidenceKind::SfM;
    r.feature_id = feature_id;
    mSfmIndex.emplace(feature_id, mRecords.size());
    mRecords.push_back(r);
}

void EvidenceStore::add_pfh(int keyframe_id, const Vec2& offset, int track_id)
{
    EvidenceRecord r;
    r.kind = EvidenceKind::PfH;
    r.keyframe_id = keyframe_id;
    r.offset = offset;
    r.track_id = track_id;
    mRecords.push_back(r);
}

void EvidenceStore::add_ho3(int front_id, int behind_id, int track_id)
{
    if (front_id == behind_id)
        throw std::invalid_argument("HO3 record needs two distinct features");
    const auto key = std::make_tuple(front_id, behind_id, track_id);
    if (auto it = mHo3Index.find(key); it != mHo3Index.end()) {
        ++mRecords[it->second].weight;
        return;
    }
    EvidenceRecord r;
    r.kind = EvidenceKind::HO3;
    r.front_id = front_id;
    r.behind_id = behind_id;
    r.track_id = track_id;
    mHo3Index.emplace(key, mRecords.size());
    mRecords.push_back(r);
}

void EvidenceStore::add(const EvidenceRecord& record)
{
    switch (record.kind) {
    case EvidenceKind::SfM:
        this->add_sfm(record.feature_id);
        break;
    case EvidenceKind::PfH:
        this->add_pfh(record.keyframe_id, record.offset, record.track_id);
        break;
    case EvidenceKind::HO3: {
        const auto key = std::make_tuple(record.front_id, record.behind_id, record.track_id);
        if (auto it = mHo3Index.find(key); it != mHo3Index.end()) {
            mRecords[it->second].weight += record.weight;
        } else {
            this->add_ho3(record.front_id, record.behind_id, record.track_id);
            mRecords.back().weight = record.weight;
        }
        break;
    }
    }
}

std::string EvidenceStore::to_log() const
{
    std::string out;
    for (const auto& r : mRecords)
        out += r.to_line() + "\n";
    return out;
}

EvidenceStore EvidenceStore::from_log(std::string_view text)
{
    EvidenceStore store;
    std::istringstream in { std::string(text) };
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        store.add(EvidenceRecord::from_line(line));
    }
    return store;
}

std::string EnabledLayers::label() const
{
    std::string s;
    auto append = [&](bool on, const char* name) {
        if (!on)
            return;
        if (!s.empty())
            s += '+';
        s += name;
    };
    append(sfm, "SfM");
    append(pfh, "PfH");
    append(ho3, "HO3");
    return s;
}

EnabledLayers EnabledLayers::parse(std::string_view label)
{
    EnabledLayers e { false, false, false };
    std::string token;
    auto flush = [&]() {
        const Layer l = parse_layer(token);
        bool& slot = (l == Layer::SfM) ? e.sfm : (l == Layer::PfH) ? e.pfh : e.ho3;
        if (slot)
            throw std::invalid_argument("layer listed twice in '" + std::string(label) + "'");
        slot = true;
        token.clear();
    };
    for (char c : label) {
        if (c == '+')
            flush();
        else if (!std::isspace(static_cast<unsigned char>(c)))
            token.push_back(c);
    }
    flush();
    return e;
}

namespace {

const Pose2& keyframe_pose(const PoseSnapshot& poses, int id)
{
    if (id < 0 || static_cast<std::size_t>(id) >= poses.size())
        throw std::out_of_range("evidence refers to unknown keyframe " + std::to_string(id));
    return poses[static_cast<std::size_t>(id)];
}

const Landmark& find_landmark(const LandmarkTable& landmarks, int feature_id)
{
    const auto it = landmarks.find(feature_id);
    if (it == landmarks.end())
        throw std::out_of_range("evidence refers to unknown feature " + std::to_string(feature_id));
    return it->second;
}

} // namespace

Vec2 landmark_world(const Landmark& lm, const PoseSnapshot& poses)
{
    return se2_apply(keyframe_pose(poses, lm.anchor_keyframe), lm.offset);
}

ResolvedEvidence resolve_evidence(const EvidenceStore& store, const PoseSnapshot& poses,
                                  const LandmarkTable& landmarks)
{
    ResolvedEvidence out;
    for (const auto& r : store.records()) {
        switch (r.kind) {
        case EvidenceKind::SfM:
            out.obstacles.push_back(landmark_world(find_landmark(landmarks, r.feature_id), poses));
            break;
        case EvidenceKind::PfH:
            out.trails[r.track_id].push_back(se2_apply(keyframe_pose(poses, r.keyframe_id), r.offset));
            break;
        case EvidenceKind::HO3:
            out.passages.emplace_back(
                landmark_world(find_landmark(landmarks, r.front_id), poses),
                landmark_world(find_landmark(landmarks, r.behind_id), poses));
            break;
        }
    }
    return out;
}

TraversabilityMap rasterize_evidence(const ResolvedEvidence& resolved, const MapGeometry& geometry,
                                     const EnabledLayers& enabled, const LayerPriority& priority,
                                     const EvidenceParams& params)
{
    TraversabilityMap sfm(geometry);
    TraversabilityMap pfh(geometry);
    TraversabilityMap ho3(geometry);

    if (enabled.sfm)
        for (const Vec2& p : resolved.obstacles)
            sfm.mark_disk(p, params.robot_radius, CellState::Untraversable);

    if (enabled.pfh)
        for (const auto& [track, points] : resolved.trails) {
            for (std::size_t k = 0; k < points.size(); ++k) {
                pfh.mark_disk(points[k], params.pfh_radius, CellState::Traversable);
                if (k > 0)
                    pfh.mark_band(points[k - 1], points[k], params.pfh_half_width,
                                  CellState::Traversable);
            }
        }

    if (enabled.ho3)
        for (const auto& [a, b] : resolved.passages)
            ho3.mark_band(a, b, params.ho3_half_width, CellState::Traversable);

    /* Human evidence from both trackers must agree */
    if (enabled.pfh && enabled.ho3) {
        auto pc = pfh.cells();
        auto hc = ho3.cells();
        for (std::size_t c = 0; c < pc.size(); ++c)
            if (pc[c] != hc[c])
                pc[c] = hc[c] = CellState::Unknown;
    }

    std::vector<LayeredMap> layers;
    if (enabled.sfm)
        layers.push_back({ &sfm, Layer::SfM });
    if (enabled.pfh)
        layers.push_back({ &pfh, Layer::PfH });
    if (enabled.ho3)
        layers.push_back({ &ho3, Layer::HO3 });
    if (layers.empty())
        return TraversabilityMap(geometry);
    return fuse(layers, priority);
}

TraversabilityMap rebuild_map(const EvidenceStore& store, const PoseSnapshot& poses,
                              const LandmarkTable& landmarks, const MapGeometry& geometry,
                              const EnabledLayers& enabled, const LayerPriority& priority,
                              const EvidenceParams& params)
{
    return rasterize_evidence(resolve_evidence(store, poses, landmarks), geometry, enabled,
                              priority, params);
}

MapFusion::MapFusion(const MapGeometry& geometry, EvidenceParams params)
    : mGeometry(geometry), mParams(params) { }

void MapFusion::resolve_into(std::size_t index, const EvidenceRecord& r,
                             const LandmarkTable& landmarks, const PoseSnapshot& poses)
{
    CachedRecord& c = mCache[index];
    c.kind = r.kind;
    c.track_id = r.track_id;
    switch (r.kind) {
    case EvidenceKind::SfM:
        c.a = landmark_world(find_landmark(landmarks, r.feature_id), poses);
        break;
    case EvidenceKind::PfH:
        c.a = se2_apply(keyframe_pose(poses, r.keyframe_id), r.offset);
        break;
    case EvidenceKind::HO3:
        c.a = landmark_world(find_landmark(landmarks, r.front_id), poses);
        c.b = landmark_world(find_landmark(landmarks, r.behind_id), poses);
        break;
    }
}

void MapFusion::ingest(const EvidenceStore& store, const LandmarkTable& landmarks,
                       const PoseSnapshot& poses)
{
    const auto& records = store.records();
    for (std::size_t n = mCache.size(); n < records.size(); ++n) {
        mCache.emplace_back();
        const EvidenceRecord& r = records[n];
        this->resolve_into(n, r, landmarks, poses);

        std::set<int> anchors;
        switch (r.kind) {
        case EvidenceKind::SfM:
            anchors.insert(find_landmark(landmarks, r.feature_id).anchor_keyframe);
            break;
        case EvidenceKind::PfH:
            anchors.insert(r.keyframe_id);
            break;
        case EvidenceKind::HO3:
            anchors.insert(find_landmark(landmarks, r.front_id).anchor_keyframe);
            anchors.insert(find_landmark(landmarks, r.behind_id).anchor_keyframe);
            break;
        }
        for (int kf : anchors)
            mDependents[kf].push_back(n);
    }
}

void MapFusion::apply_event(const OptimizationEvent& event, const EvidenceStore& store,
                            const LandmarkTable& landmarks, const PoseSnapshot& poses)
{
    std::set<std::size_t> touched;
    for (int node : event.updated_nodes)
        if (auto it = mDependents.find(node); it != mDependents.end())
            touched.insert(it->second.begin(), it->second.end());
    for (std::size_t n : touched)
        this->resolve_into(n, store.records()[n], landmarks, poses);
    mReanchored = touched.size();
}

TraversabilityMap MapFusion::render(const EnabledLayers& enabled,
                                    const LayerPriority& priority) const
{
    ResolvedEvidence view;
    for (const auto& c : mCache) {
        switch (c.kind) {
        case EvidenceKind::SfM: view.obstacles.push_back(c.a); break;
        case EvidenceKind::PfH: view.trails[c.track_id].push_back(c.a); break;
        case EvidenceKind::HO3: view.passages.emplace_back(c.a, c.b); break;
        }
    }
    return rasterize_evidence(view, mGeometry, enabled, priority, mParams);
}

} // namespace travmap
