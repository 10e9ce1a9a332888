#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gridattack/errors.hpp"
#include "gridattack/grid.hpp"

namespace gridattack {

/// One solved operating point. Entries for dead nodes/links are NaN and
/// must be ignored; the `live_*` masks say what is valid.
struct FlowState {
    std::vector<double> voltages;    // per bus, per-unit
    std::vector<double> currents;    // per branch, signed (positive from->to)
    std::vector<double> node_loads;  // per bus, nonnegative
    std::vector<char> live_nodes;
    std::vector<char> live_links;

    bool node_live(int id) const { return live_nodes[static_cast<std::size_t>(id)] != 0; }
    bool link_live(int id) const { return live_links[static_cast<std::size_t>(id)] != 0; }
};

/// Kirchhoff current-law system restricted to the live subgrid.
/// Row/column r corresponds to bus node_of_row[r]; rows are ordered by
/// ascending bus id. Generator rows pin the voltage (coefficient 1, rhs
/// v_i); consumer rows carry the weighted Laplacian (diagonal sum of live
/// incident admittances, off-diagonal -Y) with rhs -I_j, so that positive
/// demand draws current from the generators.
struct LinearSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    std::vector<int> node_of_row;
    std::vector<int> row_of_node;  // -1 for dead buses
};

namespace detail {

inline void check_live_masks(const GridNetwork& net, const std::vector<char>& live_nodes,
                             const std::vector<char>& live_links) {
    if (static_cast<int>(live_nodes.size()) != net.node_count() ||
        static_cast<int>(live_links.size()) != net.link_count())
        throw std::invalid_argument("live masks do not match network size");
    for (const Branch& br : net.branches) {
        if (live_links[static_cast<std::size_t>(br.id)] &&
            (!live_nodes[static_cast<std::size_t>(br.from)] ||
             !live_nodes[static_cast<std::size_t>(br.to)]))
            throw std::invalid_argument("live branch " + std::to_string(br.id) +
                                        " joins a dead bus");
    }
}

inline std::vector<char> all_live(int n) { return std::vector<char>(static_cast<std::size_t>(n), 1); }

/// Connected components of the live subgraph, each a sorted bus-id list.
/// Traversal order is fixed (ascending seeds, FIFO) for reproducibility.
inline std::vector<std::vector<int>> live_components(const GridNetwork& net,
                                                     const std::vector<char>& live_nodes,
                                                     const std::vector<char>& live_links) {
    const int n = net.node_count();
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<int>> components;
    std::vector<int> queue;
    for (int start = 0; start < n; ++start) {
        if (!live_nodes[static_cast<std::size_t>(start)] || seen[static_cast<std::size_t>(start)])
            continue;
        std::vector<int> comp;
        queue.clear();
        queue.push_back(start);
        seen[static_cast<std::size_t>(start)] = 1;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int u = queue[head];
            comp.push_back(u);
            for (int b : net.adjacency[static_cast<std::size_t>(u)]) {
                if (!live_links[static_cast<std::size_t>(b)]) continue;
                const int v = net.other_end(b, u);
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    queue.push_back(v);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
    }
    return components;
}

}  // namespace detail

inline LinearSystem build_system(const GridNetwork& net, const std::vector<char>& live_nodes,
                                 const std::vector<char>& live_links) {
    detail::check_live_masks(net, live_nodes, live_links);
    const int n = net.node_count();

    LinearSystem sys;
    sys.row_of_node.assign(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        if (live_nodes[static_cast<std::size_t>(i)]) {
            sys.row_of_node[static_cast<std::size_t>(i)] = static_cast<int>(sys.node_of_row.size());
            sys.node_of_row.push_back(i);
        }
    }
    const int dim = static_cast<int>(sys.node_of_row.size());
    if (dim == 0) throw std::invalid_argument("build_system: no live nodes");

    std::vector<Eigen::Triplet<double>> triplets;
    sys.rhs = Eigen::VectorXd::Zero(dim);
    for (int r = 0; r < dim; ++r) {
        const int i = sys.node_of_row[static_cast<std::size_t>(r)];
        const Bus& bus = net.buses[static_cast<std::size_t>(i)];
        if (bus.is_generator()) {
            triplets.emplace_back(r, r, 1.0);
            sys.rhs[r] = bus.setpoint;
            continue;
        }
        double diagonal = 0.0;
        bool any_link = false;
        for (int b : net.adjacency[static_cast<std::size_t>(i)]) {
            if (!live_links[static_cast<std::size_t>(b)]) continue;
            any_link = true;
            const double y = net.branches[static_cast<std::size_t>(b)].admittance;
            const int j = net.other_end(b, i);
            diagonal += y;
            triplets.emplace_back(r, sys.row_of_node[static_cast<std::size_t>(j)], -y);
        }
        if (!any_link)
            throw SolverError("isolated live consumer bus " + std::to_string(i) +
                              " (no live incident links)");
        triplets.emplace_back(r, r, diagonal);
        sys.rhs[r] = -bus.setpoint;  // consumption withdraws current
    }
    sys.matrix.resize(dim, dim);
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return sys;
}

/// Current through a live branch: (v_from - v_to) * Y.
inline double link_current(const FlowState& flow, const Branch& branch) {
    if (!flow.link_live(branch.id))
        throw std::invalid_argument("branch " + std::to_string(branch.id) +
                                    " is not live in this flow");
    return (flow.voltages[static_cast<std::size_t>(branch.from)] -
            flow.voltages[static_cast<std::size_t>(branch.to)]) *
           branch.admittance;
}

/// Node load L(i) = v_i times the gross positive outflow at i. Clamped at
/// zero: heavily loaded grids can solve to negative voltages, and a load
/// is a nonnegative quantity by definition.
inline double node_load(const GridNetwork& net, const FlowState& flow, int bus_id) {
    if (!flow.node_live(bus_id))
        throw std::invalid_argument("bus " + std::to_string(bus_id) + " is not live in this flow");
    double outflow = 0.0;
    for (int b : net.adjacency[static_cast<std::size_t>(bus_id)]) {
        if (!flow.link_live(b)) continue;
        const Branch& br = net.branches[static_cast<std::size_t>(b)];
        const double away = br.from == bus_id ? flow.currents[static_cast<std::size_t>(b)]
                                              : -flow.currents[static_cast<std::size_t>(b)];
        if (away > 0.0) outflow += away;
    }
    const double load = flow.voltages[static_cast<std::size_t>(bus_id)] * outflow;
    return load > 0.0 ? load : 0.0;
}

/// Solves the live subgrid component by component. Every live component
/// must contain a generator (prune islands with generator_reachability
/// first). Generator voltages are pinned structurally; consumer voltages
/// come from a sparse Cholesky factorization of the reduced system, then
/// the full system from build_system is checked to a 1e-9 relative
/// residual.
inline FlowState solve_flow(const GridNetwork& net, const std::vector<char>& live_nodes,
                            const std::vector<char>& live_links) {
    detail::check_live_masks(net, live_nodes, live_links);
    const int n = net.node_count();
    const int m = net.link_count();
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

    FlowState flow;
    flow.voltages.assign(static_cast<std::size_t>(n), kNaN);
    flow.currents.assign(static_cast<std::size_t>(m), kNaN);
    flow.node_loads.assign(static_cast<std::size_t>(n), kNaN);
    flow.live_nodes = live_nodes;
    flow.live_links = live_links;

    for (const std::vector<int>& comp : detail::live_components(net, live_nodes, live_links)) {
        std::vector<char> comp_nodes(static_cast<std::size_t>(n), 0);
        for (int i : comp) comp_nodes[static_cast<std::size_t>(i)] = 1;
        std::vector<char> comp_links(static_cast<std::size_t>(m), 0);
        for (int i : comp)
            for (int b : net.adjacency[static_cast<std::size_t>(i)])
                if (live_links[static_cast<std::size_t>(b)]) comp_links[static_cast<std::size_t>(b)] = 1;

        std::vector<int> consumers;
        bool has_generator = false;
        for (int i : comp) {
            if (net.buses[static_cast<std::size_t>(i)].is_generator()) {
                has_generator = true;
                flow.voltages[static_cast<std::size_t>(i)] = net.buses[static_cast<std::size_t>(i)].setpoint;
            } else {
                consumers.push_back(i);
            }
        }
        if (!has_generator)
            throw SolverError("component containing bus " + std::to_string(comp.front()) +
                              " has no live generator");

        if (!consumers.empty()) {
            // Reduced system over the component's consumers: generator
            // voltages are substituted into the right-hand side.
            const int dim = static_cast<int>(consumers.size());
            std::vector<int> sub(static_cast<std::size_t>(n), -1);
            for (int r = 0; r < dim; ++r) sub[static_cast<std::size_t>(consumers[static_cast<std::size_t>(r)])] = r;

            std::vector<Eigen::Triplet<double>> triplets;
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
            for (int r = 0; r < dim; ++r) {
                const int i = consumers[static_cast<std::size_t>(r)];
                rhs[r] = -net.buses[static_cast<std::size_t>(i)].setpoint;
                double diagonal = 0.0;
                for (int b : net.adjacency[static_cast<std::size_t>(i)]) {
                    if (!comp_links[static_cast<std::size_t>(b)]) continue;
                    const double y = net.branches[static_cast<std::size_t>(b)].admittance;
                    const int j = net.other_end(b, i);
                    diagonal += y;
                    if (sub[static_cast<std::size_t>(j)] >= 0)
                        triplets.emplace_back(r, sub[static_cast<std::size_t>(j)], -y);
                    else
                        rhs[r] += y * flow.voltages[static_cast<std::size_t>(j)];
                }
                if (diagonal == 0.0)
                    throw SolverError("isolated live consumer bus " + std::to_string(i) +
                                      " (no live incident links)");
                triplets.emplace_back(r, r, diagonal);
            }
            Eigen::SparseMatrix<double> reduced(dim, dim);
            reduced.setFromTriplets(triplets.begin(), triplets.end());

            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
            solver.compute(reduced);
            if (solver.info() != Eigen::Success)
                throw SolverError("flow solve failed in component containing bus " +
                                  std::to_string(comp.front()) + " (factorization)");
            const Eigen::VectorXd solution = solver.solve(rhs);
            if (solver.info() != Eigen::Success)
                throw SolverError("flow solve failed in component containing bus " +
                                  std::to_string(comp.front()) + " (solve)");
            for (int r = 0; r < dim; ++r)
                flow.voltages[static_cast<std::size_t>(consumers[static_cast<std::size_t>(r)])] = solution[r];
        }

        // Residual check against the full pinned system for this component.
        const LinearSystem sys = build_system(net, comp_nodes, comp_links);
        Eigen::VectorXd v(sys.node_of_row.size());
        for (std::size_t r = 0; r < sys.node_of_row.size(); ++r)
            v[static_cast<Eigen::Index>(r)] = flow.voltages[static_cast<std::size_t>(sys.node_of_row[r])];
        const double residual = (sys.matrix * v - sys.rhs).lpNorm<Eigen::Infinity>();
        const double scale = std::max(1.0, sys.rhs.lpNorm<Eigen::Infinity>());
        if (!(residual <= 1e-9 * scale))
            throw SolverError("flow solve failed in component containing bus " +
                              std::to_string(comp.front()) + " (numerically singular, residual " +
                              std::to_string(residual) + ")");
    }

    for (const Branch& br : net.branches)
        if (flow.link_live(br.id)) flow.currents[static_cast<std::size_t>(br.id)] = link_current(flow, br);
    for (const Bus& bus : net.buses)
        if (flow.node_live(bus.id)) flow.node_loads[static_cast<std::size_t>(bus.id)] = node_load(net, flow, bus.id);
    return flow;
}

/// Solve the intact grid.
inline FlowState solve_flow(const GridNetwork& net) {
    return solve_flow(net, detail::all_live(net.node_count()), detail::all_live(net.link_count()));
}

}  // namespace gridattack
