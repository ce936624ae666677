#ifndef TRAVMAP_EVIDENCE_HPP
#define TRAVMAP_EVIDENCE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "travmap/geometry.hpp"
#include "travmap/gridmap.hpp"
#include "travmap/posegraph.hpp"
#include "travmap/scenesim.hpp"

namespace travmap {

/* ---- Depth from apparent human height ---- */

struct ScaleCalibration
{
    double k = 1.0;
};

struct CalibrationSample
{
    double slam_distance = 0.0; /* map units */
    double f = 0.0;             /* px */
    double h_px = 0.0;          /* apparent body height, px */
    double H = 0.0;             /* assumed body height, m */
};

/* Median of per-sample k = D * h_px / (f * H) */
ScaleCalibration calibrate_scale(std::span<const CalibrationSample> samples);

/* D = k * f * H / h_px */
double estimate_depth(const ScaleCalibration& cal, double f, double H, double h_px);

/*
 * Full-body pixel height implied by the head reference point alone, for a
 * person of height H standing on a flat floor seen by a level camera.
 * Independent of how much of the lower body is hidden.
 */
double apparent_height_from_head(const CameraIntrinsics& intr, double head_v, double H);

/* Floor point of a person seen at the bbox horizontal center and depth */
Vec2 human_map_position(const Pose2& cam, const CameraIntrinsics& intr,
                        const BBox& box, double depth);

/* ---- Occlusion ordering ---- */

enum class OcclusionOrder : std::uint8_t
{
    Front,
    Behind,
    Unrelated,
};

const char* to_string(OcclusionOrder o);

/* A landmark as seen (or predicted) in the current frame */
struct FeatureCue
{
    int feature_id = 0;
    double u = 0.0;
    double v = 0.0;
    bool observed = false;
    std::optional<double> predicted_depth;
};

enum class OrderingRule : std::uint8_t
{
    Visibility, /* observed inside the person's region -> in front */
    Depth,      /* compare predicted depth with the person's depth */
};

/*
 * Unrelated when the cue falls outside the person's image region,
 * otherwise front/behind by the chosen rule. The depth rule falls back to
 * visibility when the cue has no predicted depth.
 */
OcclusionOrder classify_occlusion(const FeatureCue& cue, const BBox& human,
                                  double human_depth,
                                  OrderingRule rule = OrderingRule::Visibility);

struct ClassifiedCue
{
    FeatureCue cue;
    OcclusionOrder order = OcclusionOrder::Unrelated;
};

struct PassPair
{
    int front_id = 0;
    int behind_id = 0;
};

/*
 * Tightest bracket: the front landmark deepest below the person's depth and
 * the behind landmark shallowest above it. Without depths, the pair nearest
 * the bbox center horizontally, ties to the lower feature id.
 */
std::optional<PassPair> infer_pass_pair(std::span<const ClassifiedCue> cues,
                                        const BBox& human, double human_depth);

/* ---- Re-anchorable evidence ---- */

struct Landmark
{
    int feature_id = 0;
    int anchor_keyframe = 0;
    Vec2 offset;        /* floor position in the anchor keyframe frame */
    double height = 0.0; /* above the floor, used to predict projections */
};

/* Landmarks by feature id */
using LandmarkTable = std::map<int, Landmark>;

enum class EvidenceKind : std::uint8_t
{
    SfM,
    PfH,
    HO3,
};

struct EvidenceRecord
{
    EvidenceKind kind = EvidenceKind::SfM;
    int feature_id = 0;          /* SfM */
    int keyframe_id = 0;         /* PfH */
    Vec2 offset;                 /* PfH, person in keyframe frame */
    int track_id = 0;            /* PfH, HO3 */
    int front_id = 0;            /* HO3 */
    int behind_id = 0;           /* HO3 */
    int weight = 1;

    std::string to_line() const;
    static EvidenceRecord from_line(std::string_view line);
};

/* Append-only store; duplicates of SfM and HO3 records only gain weight */
class EvidenceStore
{
public:
    void add_sfm(int feature_id);
    void add_pfh(int keyframe_id, const Vec2& offset, int track_id);
    void add_ho3(int front_id, int behind_id, int track_id);
    void add(const EvidenceRecord& record);

    const std::vector<EvidenceRecord>& records() const { return mRecords; }
    std::size_t size() const { return mRecords.size(); }

    /* One record per line, replayable with from_log */
    std::string to_log() const;
    static EvidenceStore from_log(std::string_view text);

private:
    std::vector<EvidenceRecord> mRecords;
    std::map<int, std::size_t> mSfmIndex;
    std::map<std::tuple<int, int, int>, std::size_t> mHo3Index;
};

struct EvidenceParams
{
    double robot_radius = 0.50;    /* SfM disk radius */
    double pfh_radius = 0.20;      /* disk around each person position */
    double pfh_half_width = 0.20;  /* band joining consecutive positions */
    double ho3_half_width = 0.30;  /* band between the bracketing landmarks */
};

struct EnabledLayers
{
    bool sfm = true;
    bool pfh = true;
    bool ho3 = true;

    bool any() const { return sfm || pfh || ho3; }
    std::string label() const;
    static EnabledLayers parse(std::string_view label);
    friend bool operator==(const EnabledLayers&, const EnabledLayers&) = default;
};

/* World-frame geometry of every record under one pose snapshot */
struct ResolvedEvidence
{
    std::vector<Vec2> obstacles;                      /* SfM */
    std::map<int, std::vector<Vec2>> trails;          /* PfH, per track, in order */
    std::vector<std::pair<Vec2, Vec2>> passages;      /* HO3 */
};

Vec2 landmark_world(const Landmark& lm, const PoseSnapshot& poses);

ResolvedEvidence resolve_evidence(const EvidenceStore& store, const PoseSnapshot& poses,
                                  const LandmarkTable& landmarks);

/* Rasterize resolved evidence into per-layer maps and fuse them */
TraversabilityMap rasterize_evidence(const ResolvedEvidence& resolved, const MapGeometry& geometry,
                                     const EnabledLayers& enabled, const LayerPriority& priority,
                                     const EvidenceParams& params);

/*
 * From-scratch map: fresh Unknown layers filled from the store under the
 * given poses. Cost is linear in the amount of evidence.
 */
TraversabilityMap rebuild_map(const EvidenceStore& store, const PoseSnapshot& poses,
                              const LandmarkTable& landmarks, const MapGeometry& geometry,
                              const EnabledLayers& enabled, const LayerPriority& priority,
                              const EvidenceParams& params);

/*
 * Incremental map fusion. Keeps the world geometry of every record and,
 * after an optimization event, recomputes only the records anchored to
 * moved keyframes.
 */
class MapFusion
{
public:
    MapFusion(const MapGeometry& geometry, EvidenceParams params);

    /* Bring the cache up to date with records appended since the last call */
    void ingest(const EvidenceStore& store, const LandmarkTable& landmarks,
                const PoseSnapshot& poses);
    /* Re-anchor cached geometry after the graph moved the listed nodes */
    void apply_event(const OptimizationEvent& event, const EvidenceStore& store,
                     const LandmarkTable& landmarks, const PoseSnapshot& poses);

    TraversabilityMap render(const EnabledLayers& enabled, const LayerPriority& priority) const;

    std::size_t reanchored_last_event() const { return mReanchored; }

private:
    struct CachedRecord
    {
        EvidenceKind kind = EvidenceKind::SfM;
        int track_id = 0;
        Vec2 a;
        Vec2 b;
    };

    void resolve_into(std::size_t index, const EvidenceRecord& record,
                      const LandmarkTable& landmarks, const PoseSnapshot& poses);

    MapGeometry mGeometry;
    EvidenceParams mParams;
    std::vector<CachedRecord> mCache;
    /* keyframe id -> records whose geometry depends on it */
    std::map<int, std::vector<std::size_t>> mDependents;
    std::size_t mReanchored = 0;
};

} // namespace travmap

#endif // TRAVMAP_EVIDENCE_HPP
