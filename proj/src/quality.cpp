#include "travmap/quality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "travmap/random.hpp"

namespace travmap {

double OctileCost::length(double resolution) const
{
    return resolution * (static_cast<double>(straight) +
                         std::numbers::sqrt2 * static_cast<double>(diagonal));
}

bool operator<(const OctileCost& a, const OctileCost& b)
{
    /* a.s + a.d r < b.s + b.d r  <=>  x < y r  with x = a.s - b.s, y = b.d - a.d */
    const std::int64_t x = a.straight - b.straight;
    const std::int64_t y = b.diagonal - a.diagonal;
    if (y >= 0)
        return x < 0 || x * x < 2 * y * y;
    return x < 0 && x * x > 2 * y * y;
}

OctileCost octile_heuristic(const CellIndex& a, const CellIndex& b)
{
    const std::int64_t dx = std::abs(a.i - b.i);
    const std::int64_t dy = std::abs(a.j - b.j);
    return { std::max(dx, dy) - std::min(dx, dy), std::min(dx, dy) };
}

bool passable(CellState s, UnknownPolicy unknown)
{
    return s == CellState::Traversable ||
           (s == CellState::Unknown && unknown == UnknownPolicy::Free);
}

std::optional<PathPlan> plan_path(const TraversabilityMap& map, const Vec2& start,
                                  const Vec2& goal, UnknownPolicy unknown)
{
    const CellIndex s = map.world_to_cell(start);
    const CellIndex g = map.world_to_cell(goal);
    if (!passable(map.at(s), unknown) || !passable(map.at(g), unknown))
        return std::nullopt;

    const int w = map.width();
    const auto n = static_cast<std::size_t>(w) * map.height();
    auto flat = [w](const CellIndex& c) { return static_cast<std::size_t>(c.j) * w + c.i; };

    std::vector<OctileCost> best(n);
    std::vector<bool> reached(n, false);
    std::vector<bool> closed(n, false);
    std::vector<std::int64_t> parent(n, -1);

    struct Open
    {
        OctileCost f;
        CellIndex cell;
    };
    /* Pops the smallest f, then lowest j, then lowest i */
    auto later = [](const Open& a, const Open& b) {
        if (a.f < b.f)
            return false;
        if (b.f < a.f)
            return true;
        return std::tie(a.cell.j, a.cell.i) > std::tie(b.cell.j, b.cell.i);
    };
    std::priority_queue<Open, std::vector<Open>, decltype(later)> open(later);

    best[flat(s)] = {};
    reached[flat(s)] = true;
    open.push({ octile_heuristic(s, g), s });

    static constexpr int kDi[8] = { 1, -1, 0, 0, 1, 1, -1, -1 };
    static constexpr int kDj[8] = { 0, 0, 1, -1, 1, -1, 1, -1 };

    bool found = false;
    while (!open.empty()) {
        const Open top = open.top();
        open.pop();
        const std::size_t idx = flat(top.cell);
        if (closed[idx])
            continue;
        closed[idx] = true;
        if (top.cell == g) {
            found = true;
            break;
        }
        for (int k = 0; k < 8; ++k) {
            const CellIndex nb { top.cell.i + kDi[k], top.cell.j + kDj[k] };
            if (!map.contains(nb) || !passable(map.at(nb), unknown))
                continue;
            const std::size_t nidx = flat(nb);
            if (closed[nidx])
                continue;
            const OctileCost step = (k < 4) ? OctileCost { 1, 0 } : OctileCost { 0, 1 };
            const OctileCost cand = best[idx] + step;
            if (!reached[nidx] || cand < best[nidx]) {
                reached[nidx] = true;
                best[nidx] = cand;
                parent[nidx] = static_cast<std::int64_t>(idx);
                open.push({ cand + octile_heuristic(nb, g), nb });
            }
        }
    }
    if (!found)
        return std::nullopt;

    PathPlan plan;
    for (std::int64_t c = static_cast<std::int64_t>(flat(g)); c >= 0;
         c = parent[static_cast<std::size_t>(c)])
        plan.cells.push_back({ static_cast<int>(c % w), static_cast<int>(c / w) });
    std::reverse(plan.cells.begin(), plan.cells.end());
    for (const auto& c : plan.cells)
        plan.waypoints.push_back(map.cell_to_world(c));
    plan.steps = best[flat(g)];
    plan.cost = plan.steps.length(map.resolution());
    return plan;
}

double journey_error(const PathPlan& oracle, const PathPlan& user)
{
    if (oracle.waypoints.empty() || user.waypoints.empty())
        throw std::invalid_argument("journey error needs two non-empty paths");
    double total = 0.0;
    for (const Vec2& o : oracle.waypoints) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const Vec2& u : user.waypoints)
            nearest = std::min(nearest, (o - u).norm());
        total += nearest;
    }
    return total / static_cast<double>(oracle.waypoints.size());
}

MapScore evaluate_map(const TraversabilityMap& candidate, const TraversabilityMap& ground_truth,
                      std::span<const JourneyQuery> queries,
                      std::optional<double> failure_penalty, UnknownPolicy unknown)
{
    if (!(candidate.geometry() == ground_truth.geometry()))
        throw std::invalid_argument("candidate and ground truth must share geometry");
    if (queries.empty())
        throw std::invalid_argument("map evaluation needs at least one query");

    MapScore out;
    double total = 0.0;
    for (const auto& q : queries) {
        /* The oracle never plans through unknown floor */
        const auto oracle = plan_path(ground_truth, q.start, q.goal, UnknownPolicy::Blocked);
        if (!oracle)
            throw std::invalid_argument("query is not solvable on the ground truth map");
        const auto user = plan_path(candidate, q.start, q.goal, unknown);
        ++out.n_queries;
        if (user) {
            total += journey_error(*oracle, *user);
        } else {
            ++out.n_failed;
            total += failure_penalty.value_or(oracle->cost);
        }
    }
    out.score = total / out.n_queries;
    return out;
}

namespace {

/* 8-connected component label per traversable cell, -1 elsewhere */
std::vector<int> label_components(const TraversabilityMap& map)
{
    const int w = map.width();
    const int h = map.height();
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    int next = 0;
    std::vector<CellIndex> stack;
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            const auto idx = static_cast<std::size_t>(j) * w + i;
            if (label[idx] >= 0 || map.at({ i, j }) != CellState::Traversable)
                continue;
            label[idx] = next;
            stack.push_back({ i, j });
            while (!stack.empty()) {
                const CellIndex c = stack.back();
                stack.pop_back();
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di) {
                        const CellIndex nb { c.i + di, c.j + dj };
                        if (!map.contains(nb) || map.at(nb) != CellState::Traversable)
                            continue;
                        const auto nidx = static_cast<std::size_t>(nb.j) * w + nb.i;
                        if (label[nidx] < 0) {
                            label[nidx] = next;
                            stack.push_back(nb);
                        }
                    }
            }
            ++next;
        }
    return label;
}

} // namespace

std::vector<JourneyQuery> sample_queries(const TraversabilityMap& ground_truth, int n,
                                         std::uint64_t seed, double min_separation)
{
    if (n < 1)
        throw std::invalid_argument("at least one query is required");

    std::vector<CellIndex> free_cells;
    for (int j = 0; j < ground_truth.height(); ++j)
        for (int i = 0; i < ground_truth.width(); ++i)
            if (ground_truth.at({ i, j }) == CellState::Traversable)
                free_cells.push_back({ i, j });
    if (free_cells.size() < 2)
        throw std::invalid_argument("ground truth has fewer than two traversable cells");

    const auto label = label_components(ground_truth);
    auto component = [&](const CellIndex& c) {
        return label[static_cast<std::size_t>(c.j) * ground_truth.width() + c.i];
    };

    Rng rng(seed);
    std::vector<JourneyQuery> out;
    const std::int64_t max_attempts = 10000LL * n;
    std::int64_t attempts = 0;
    while (static_cast<int>(out.size()) < n) {
        if (attempts++ >= max_attempts)
            throw std::runtime_error("could not sample enough journey queries");
        const CellIndex a = free_cells[rng.below(free_cells.size())];
        const CellIndex b = free_cells[rng.below(free_cells.size())];
        const Vec2 pa = ground_truth.cell_to_world(a);
        const Vec2 pb = ground_truth.cell_to_world(b);
        if (a == b || (pa - pb).norm() < min_separation || component(a) != component(b))
            continue;
        out.push_back({ pa, pb });
    }
    return out;
}

const std::vector<std::string>& canonical_combinations()
{
    static const std::vector<std::string> combos {
        "SfM+PfH+HO3", "SfM+PfH", "SfM+HO3", "PfH+HO3", "SfM", "PfH", "HO3",
    };
    return combos;
}

int combination_rank(const std::string& label)
{
    const auto& combos = canonical_combinations();
    const auto it = std::find(combos.begin(), combos.end(), label);
    return static_cast<int>(it - combos.begin());
}

void QualityReport::sort()
{
    std::stable_sort(rows.begin(), rows.end(), [](const QualityRow& a, const QualityRow& b) {
        return std::make_tuple(a.scenario, combination_rank(a.combination), a.combination) <
               std::make_tuple(b.scenario, combination_rank(b.combination), b.combination);
    });
}

std::string QualityReport::to_csv() const
{
    std::string out = "combination,scenario,score_m,n_queries,n_failed\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6f", r.score);
        out += r.combination + "," + r.scenario + "," + buf + "," +
               std::to_string(r.n_queries) + "," + std::to_string(r.n_failed) + "\n";
    }
    return out;
}

} // namespace travmap
