#ifndef TRAVMAP_POSEGRAPH_HPP
#define TRAVMAP_POSEGRAPH_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "travmap/geometry.hpp"

namespace travmap {

using Information = Eigen::Matrix3d;

enum class EdgeKind : std::uint8_t
{
    Odometry,
    LoopClosure,
};

struct PoseEdge
{
    int from = 0;
    int to = 0;
    Pose2 measurement;   /* pose of `to` in the frame of `from` */
    Information information = Information::Identity();
    EdgeKind kind = EdgeKind::Odometry;
};

struct OptimizationEvent
{
    std::uint64_t event_id = 0;
    std::vector<int> updated_nodes;
};

struct OptimizeOptions
{
    int max_iters = 50;
    /* Stop once an accepted step improves chi2 by less than this */
    double tol = 1e-12;
    double initial_lambda = 1e-3;
};

struct OptimizeReport
{
    int iterations = 0;
    double initial_chi2 = 0.0;
    double final_chi2 = 0.0;
    /* chi2 after every accepted step, starting with the initial value */
    std::vector<double> accepted_chi2;
    int rejected_steps = 0;
};

/* Read-only copy of node poses, indexed by keyframe id */
using PoseSnapshot = std::vector<Pose2>;

/*
 * SE(2) pose graph with odometry and loop-closure edges. Node 0 is the
 * gauge and never moves during optimization. Adding a loop closure does
 * not touch any pose; poses change only inside optimize(), which reports
 * the moved nodes through an OptimizationEvent.
 */
class PoseGraph
{
public:
    explicit PoseGraph(const Pose2& origin = {});

    /* Append a node at last_pose (+) odom linked by an odometry edge */
    int add_keyframe(const Pose2& odom,
                     const Information& info = Information::Identity());
    void add_loop_closure(int i, int j, const Pose2& rel,
                          const Information& info = Information::Identity());

    /* Raw construction, used by the graph loader and tests */
    int add_node(const Pose2& initial);
    void add_edge(const PoseEdge& edge);
    void set_pose(int id, const Pose2& pose);

    OptimizationEvent optimize(const OptimizeOptions& options = {},
                               OptimizeReport* report = nullptr);

    double chi2() const;
    /* Residual of one edge under the current poses */
    Eigen::Vector3d residual(const PoseEdge& edge) const;

    const Pose2& pose(int id) const;
    int size() const { return static_cast<int>(mNodes.size()); }
    int next_id() const { return this->size(); }
    const std::vector<Pose2>& poses() const { return mNodes; }
    const std::vector<PoseEdge>& edges() const { return mEdges; }
    PoseSnapshot snapshot() const { return mNodes; }
    std::uint64_t last_event_id() const { return mEventCounter; }

    bool connected() const;

    /* Plain-text VERTEX_SE2 / EDGE_SE2 interchange format */
    std::string to_g2o() const;
    static PoseGraph from_g2o(std::string_view text);

private:
    void check_node(int id) const;

    std::vector<Pose2>    mNodes;
    std::vector<PoseEdge> mEdges;
    std::uint64_t         mEventCounter = 0;
};

/* Edge residual e = t2v(Z^-1 (+) Xi^-1 (+) Xj) with the angle wrapped */
Eigen::Vector3d edge_residual(const Pose2& xi, const Pose2& xj, const Pose2& z);

/* Jacobians of edge_residual with respect to (x, y, theta) of xi and xj */
void edge_jacobians(const Pose2& xi, const Pose2& xj, const Pose2& z,
                    Eigen::Matrix3d& jac_i, Eigen::Matrix3d& jac_j);

bool is_symmetric_positive_definite(const Information& info);

} // namespace travmap

#endif // TRAVMAP_POSEGRAPH_HPP
