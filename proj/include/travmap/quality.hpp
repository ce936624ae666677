#ifndef TRAVMAP_QUALITY_HPP
#define TRAVMAP_QUALITY_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "travmap/geometry.hpp"
#include "travmap/gridmap.hpp"

namespace travmap {

/* How the map user's planner treats Unknown cells */
enum class UnknownPolicy : std::uint8_t
{
    Blocked,
    Free,
};

/*
 * Length of an 8-connected grid path as (straight steps, diagonal steps).
 * Compared exactly: s1 + d1 sqrt2 vs s2 + d2 sqrt2 reduces to integers.
 */
struct OctileCost
{
    std::int64_t straight = 0;
    std::int64_t diagonal = 0;

    double length(double resolution) const;
    OctileCost operator+(const OctileCost& o) const
    { return { straight + o.straight, diagonal + o.diagonal }; }
    friend bool operator==(const OctileCost&, const OctileCost&) = default;
    friend bool operator<(const OctileCost& a, const OctileCost& b);
};

OctileCost octile_heuristic(const CellIndex& a, const CellIndex& b);

struct PathPlan
{
    std::vector<CellIndex> cells;
    std::vector<Vec2> waypoints;   /* cell centers */
    OctileCost steps;
    double cost = 0.0;             /* m */
};

/*
 * Optimal 8-connected A* over passable cells, octile heuristic. Among equal
 * f-values the open cell with lower (j, i) is expanded first. Returns
 * nullopt (no path) when start or goal is blocked or unreachable.
 */
std::optional<PathPlan> plan_path(const TraversabilityMap& map, const Vec2& start,
                                  const Vec2& goal,
                                  UnknownPolicy unknown = UnknownPolicy::Blocked);

bool passable(CellState s, UnknownPolicy unknown);

/* Mean over oracle waypoints of the distance to the nearest user waypoint */
double journey_error(const PathPlan& oracle, const PathPlan& user);

struct JourneyQuery
{
    Vec2 start;
    Vec2 goal;
};

struct MapScore
{
    double score = 0.0;   /* m, lower is better */
    int n_queries = 0;
    int n_failed = 0;
};

/*
 * Journey-based map quality: per query, the journey error of the path
 * planned on the candidate against the one planned on the ground truth,
 * or failure_penalty (default: the oracle path cost) when the candidate
 * has no path. Averaged over queries.
 */
MapScore evaluate_map(const TraversabilityMap& candidate, const TraversabilityMap& ground_truth,
                      std::span<const JourneyQuery> queries,
                      std::optional<double> failure_penalty = std::nullopt,
                      UnknownPolicy unknown = UnknownPolicy::Blocked);

/* Seeded rejection sampling of solvable start/goal cell-center pairs */
std::vector<JourneyQuery> sample_queries(const TraversabilityMap& ground_truth, int n,
                                         std::uint64_t seed, double min_separation = 2.0);

struct QualityRow
{
    std::string combination;
    std::string scenario;
    double score = 0.0;
    int n_queries = 0;
    int n_failed = 0;
};

struct QualityReport
{
    std::vector<QualityRow> rows;

    /* Rows ordered by scenario, then by the canonical combination order */
    void sort();
    std::string to_csv() const;
};

/* SfM+PfH+HO3, SfM+PfH, SfM+HO3, PfH+HO3, SfM, PfH, HO3 */
const std::vector<std::string>& canonical_combinations();
/* Position in canonical_combinations(), or its size for unknown labels */
int combination_rank(const std::string& label);

} // namespace travmap

#endif // TRAVMAP_QUALITY_HPP
