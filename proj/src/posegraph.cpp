#include "travmap/posegraph.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace travmap {

bool is_symmetric_positive_definite(const Information& info)
{
    if (!info.allFinite() || !info.isApprox(info.transpose(), 1e-12))
        return false;
    Eigen::LLT<Information> llt(info);
    return llt.info() == Eigen::Success;
}

Eigen::Vector3d edge_residual(const Pose2& xi, const Pose2& xj, const Pose2& z)
{
    const Pose2 e = se2_compose(se2_inverse(z), se2_between(xi, xj));
    return { e.x, e.y, e.theta };
}

void edge_jacobians(const Pose2& xi, const Pose2& xj, const Pose2& z,
                    Eigen::Matrix3d& jac_i, Eigen::Matrix3d& jac_j)
{
    const double ci = std::cos(xi.theta);
    const double si = std::sin(xi.theta);
    const double cz = std::cos(z.theta);
    const double sz = std::sin(z.theta);

    Eigen::Matrix2d rit;  /* R_i^T */
    rit << ci, si, -si, ci;
    Eigen::Matrix2d drit; /* d(R_i^T)/d(theta_i) */
    drit << -si, ci, -ci, -si;
    Eigen::Matrix2d rzt;  /* R_z^T */
    rzt << cz, sz, -sz, cz;

    const Eigen::Vector2d dt(xj.x - xi.x, xj.y - xi.y);

    jac_i.setZero();
    jac_i.block<2, 2>(0, 0) = -rzt * rit;
    jac_i.block<2, 1>(0, 2) = rzt * drit * dt;
    jac_i(2, 2) = -1.0;

    jac_j.setZero();
    jac_j.block<2, 2>(0, 0) = rzt * rit;
    jac_j(2, 2) = 1.0;
}

PoseGraph::PoseGraph(const Pose2& origin)
{
    mNodes.push_back(origin);
}

void PoseGraph::check_node(int id) const
{
    if (id < 0 || id >= this->size())
        throw std::invalid_argument("unknown keyframe id " + std::to_string(id));
}

const Pose2& PoseGraph::pose(int id) const
{
    this->check_node(id);
    return mNodes[static_cast<std::size_t>(id)];
}

int PoseGraph::add_node(const Pose2& initial)
{
    mNodes.push_back(initial);
    return this->size() - 1;
}

void PoseGraph::set_pose(int id, const Pose2& pose)
{
    this->check_node(id);
    mNodes[static_cast<std::size_t>(id)] = pose;
}

void PoseGraph::add_edge(const PoseEdge& edge)
{
    this->check_node(edge.from);
    this->check_node(edge.to);
    if (edge.from == edge.to)
        throw std::invalid_argument("edge endpoints must differ");
    if (!is_symmetric_positive_definite(edge.information))
        throw std::invalid_argument("information matrix must be symmetric positive definite");
    mEdges.push_back(edge);
}

int PoseGraph::add_keyframe(const Pose2& odom, const Information& info)
{
    if (!is_symmetric_positive_definite(info))
        throw std::invalid_argument("information matrix must be symmetric positive definite");
    const int prev = this->size() - 1;
    const int id = this->add_node(se2_compose(mNodes.back(), odom));
    mEdges.push_back({ prev, id, odom, info, EdgeKind::Odometry });
    return id;
}

void PoseGraph::add_loop_closure(int i, int j, const Pose2& rel, const Information& info)
{
    this->add_edge({ i, j, rel, info, EdgeKind::LoopClosure });
}

Eigen::Vector3d PoseGraph::residual(const PoseEdge& edge) const
{
    return edge_residual(mNodes[static_cast<std::size_t>(edge.from)],
                         mNodes[static_cast<std::size_t>(edge.to)], edge.measurement);
}

double PoseGraph::chi2() const
{
    double total = 0.0;
    for (const auto& e : mEdges) {
        const Eigen::Vector3d r = this->residual(e);
        total += r.dot(e.information * r);
    }
    return total;
}

bool PoseGraph::connected() const
{
    std::vector<std::vector<int>> adj(mNodes.size());
    for (const auto& e : mEdges) {
        adj[static_cast<std::size_t>(e.from)].push_back(e.to);
        adj[static_cast<std::size_t>(e.to)].push_back(e.from);
    }
    std::vector<bool> seen(mNodes.size(), false);
    std::queue<int> open;
    open.push(0);
    seen[0] = true;
    std::size_t reached = 1;
    while (!open.empty()) {
        const int n = open.front();
        open.pop();
        for (int m : adj[static_cast<std::size_t>(n)])
            if (!seen[static_cast<std::size_t>(m)]) {
                seen[static_cast<std::size_t>(m)] = true;
                ++reached;
                open.push(m);
            }
    }
    return reached == mNodes.size();
}

OptimizationEvent PoseGraph::optimize(const OptimizeOptions& options,
                                      OptimizeReport* report)
{
    if (!this->connected())
        throw std::runtime_error("pose graph is not connected through node 0");

    const std::vector<Pose2> before = mNodes;
    const int free_nodes = this->size() - 1;
    const int dim = 3 * free_nodes;

    double chi2 = this->chi2();
    OptimizeReport local;
    local.initial_chi2 = chi2;
    local.accepted_chi2.push_back(chi2);

    double lambda = options.initial_lambda;
    Eigen::MatrixXd hessian(dim, dim);
    Eigen::VectorXd gradient(dim);

    for (int iter = 0; iter < options.max_iters && dim > 0; ++iter) {
        local.iterations = iter + 1;

        hessian.setZero();
        gradient.setZero();
        for (const auto& e : mEdges) {
            const Pose2& xi = mNodes[static_cast<std::size_t>(e.from)];
            const Pose2& xj = mNodes[static_cast<std::size_t>(e.to)];
            Eigen::Matrix3d ji, jj;
            edge_jacobians(xi, xj, e.measurement, ji, jj);
            const Eigen::Vector3d r = edge_residual(xi, xj, e.measurement);

            /* Node 0 is fixed: its block simply drops out */
            const int bi = 3 * (e.from - 1);
            const int bj = 3 * (e.to - 1);
            if (e.from > 0) {
                hessian.block<3, 3>(bi, bi) += ji.transpose() * e.information * ji;
                gradient.segment<3>(bi) += ji.transpose() * e.information * r;
            }
            if (e.to > 0) {
                hessian.block<3, 3>(bj, bj) += jj.transpose() * e.information * jj;
                gradient.segment<3>(bj) += jj.transpose() * e.information * r;
            }
            if (e.from > 0 && e.to > 0) {
                const Eigen::Matrix3d hij = ji.transpose() * e.information * jj;
                hessian.block<3, 3>(bi, bj) += hij;
                hessian.block<3, 3>(bj, bi) += hij.transpose();
            }
        }

        /* Damped steps until one lowers chi2 or lambda blows up */
        bool accepted = false;
        double improvement = 0.0;
        while (!accepted && lambda < 1e12) {
            Eigen::MatrixXd damped = hessian;
            damped.diagonal() += lambda * (hessian.diagonal().array() + 1e-12).matrix();
            const Eigen::VectorXd delta = damped.ldlt().solve(-gradient);
            if (!delta.allFinite()) {
                lambda *= 10.0;
                ++local.rejected_steps;
                continue;
            }

            std::vector<Pose2> candidate = mNodes;
            for (int n = 0; n < free_nodes; ++n) {
                Pose2& p = candidate[static_cast<std::size_t>(n + 1)];
                p = Pose2(p.x + delta(3 * n), p.y + delta(3 * n + 1),
                          p.theta + delta(3 * n + 2));
            }

            std::swap(candidate, mNodes);
            const double new_chi2 = this->chi2();
            if (new_chi2 < chi2) {
                improvement = chi2 - new_chi2;
                chi2 = new_chi2;
                lambda /= 10.0;
                accepted = true;
                local.accepted_chi2.push_back(chi2);
            } else {
                std::swap(candidate, mNodes);
                lambda *= 10.0;
                ++local.rejected_steps;
                /* Zero-length step: already at a stationary point */
                if (delta.lpNorm<Eigen::Infinity>() == 0.0)
                    break;
            }
        }

        if (!accepted || improvement < options.tol)
            break;
    }

    local.final_chi2 = chi2;
    if (report)
        *report = local;

    OptimizationEvent event;
    event.event_id = ++mEventCounter;
    for (std::size_t n = 0; n < mNodes.size(); ++n)
        if (!(mNodes[n] == before[n]))
            event.updated_nodes.push_back(static_cast<int>(n));
    return event;
}

std::string PoseGraph::to_g2o() const
{
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t n = 0; n < mNodes.size(); ++n) {
        const Pose2& p = mNodes[n];
        os << "VERTEX_SE2 " << n << ' ' << p.x << ' ' << p.y << ' ' << p.theta << '\n';
    }
    for (const auto& e : mEdges) {
        const Information& m = e.information;
        os << "EDGE_SE2 " << e.from << ' ' << e.to << ' ' << e.measurement.x << ' '
           << e.measurement.y << ' ' << e.measurement.theta << ' ' << m(0, 0) << ' '
           << m(0, 1) << ' ' << m(0, 2) << ' ' << m(1, 1) << ' ' << m(1, 2) << ' '
           << m(2, 2) << '\n';
    }
    return os.str();
}

PoseGraph PoseGraph::from_g2o(std::string_view text)
{
    struct Vertex { int id; Pose2 pose; };
    std::vector<Vertex> vertices;
    std::vector<PoseEdge> edges;

    std::istringstream in { std::string(text) };
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#')
            continue;
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": " + why);
        };
        if (tag == "VERTEX_SE2") {
            Vertex v {};
            double x, y, t;
            if (!(ls >> v.id >> x >> y >> t))
                fail("malformed VERTEX_SE2");
            v.pose = Pose2(x, y, t);
            vertices.push_back(v);
        } else if (tag == "EDGE_SE2") {
            PoseEdge e;
            double dx, dy, dt, i11, i12, i13, i22, i23, i33;
            if (!(ls >> e.from >> e.to >> dx >> dy >> dt >> i11 >> i12 >> i13 >> i22 >> i23 >> i33))
                fail("malformed EDGE_SE2");
            e.measurement = Pose2(dx, dy, dt);
            e.information << i11, i12, i13, i12, i22, i23, i13, i23, i33;
            /* Consecutive ids read as odometry, anything else as a closure */
            e.kind = (e.to == e.from + 1) ? EdgeKind::Odometry : EdgeKind::LoopClosure;
            edges.push_back(e);
        } else {
            fail("unknown record '" + tag + "'");
        }
    }

    if (vertices.empty())
        throw std::invalid_argument("graph has no vertices");
    std::sort(vertices.begin(), vertices.end(),
              [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
    for (std::size_t n = 0; n < vertices.size(); ++n)
        if (vertices[n].id != static_cast<int>(n))
            throw std::invalid_argument("vertex ids must be contiguous from 0");

    PoseGraph g(vertices.front().pose);
    for (std::size_t n = 1; n < vertices.size(); ++n)
        g.add_node(vertices[n].pose);
    for (const auto& e : edges)
        g.add_edge(e);
    return g;
}

} // namespace travmap
