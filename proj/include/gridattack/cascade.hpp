#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gridattack/errors.hpp"
#include "gridattack/flow.hpp"
#include "gridattack/grid.hpp"

namespace gridattack {

/// Frozen capacities, built once from the intact grid and never updated
/// during a cascade. node_max = (1+alpha) * original load, link_max =
/// (1+beta) * original |current|. Infinite margins give infinite capacity.
struct CapacityTable {
    std::vector<double> node_max;
    std::vector<double> link_max;
    double alpha = 0.0;
    double beta = 0.0;
};

struct CascadeRound {
    std::vector<int> islanded_nodes;    // cut off from every generator
    std::vector<int> overloaded_nodes;  // load > node_max
    std::vector<int> overloaded_links;  // |current| > link_max
};

struct CascadeReport {
    std::vector<CascadeRound> rounds;
    std::vector<int> failed_nodes;  // includes the initial node removals
    std::vector<int> failed_links;  // every link dead at termination
    double damage = 0.0;            // |failed_nodes| / N
};

struct Reachability {
    std::vector<int> alive;     // live nodes in generator-containing components
    std::vector<int> islanded;  // live nodes with no path to any generator
};

namespace detail {

inline double scaled_capacity(double base, double margin) {
    if (std::isinf(margin)) return std::numeric_limits<double>::infinity();
    return (1.0 + margin) * base;
}

}  // namespace detail

/// Splits the live nodes into generator-reachable and islanded sets by a
/// connected-components sweep over the live links.
inline Reachability generator_reachability(const GridNetwork& net,
                                           const std::vector<char>& live_nodes,
                                           const std::vector<char>& live_links) {
    Reachability result;
    for (const std::vector<int>& comp : detail::live_components(net, live_nodes, live_links)) {
        const bool has_generator =
            std::any_of(comp.begin(), comp.end(),
                        [&](int i) { return net.buses[static_cast<std::size_t>(i)].is_generator(); });
        auto& target = has_generator ? result.alive : result.islanded;
        target.insert(target.end(), comp.begin(), comp.end());
    }
    std::sort(result.alive.begin(), result.alive.end());
    std::sort(result.islanded.begin(), result.islanded.end());
    return result;
}

/// Solves the intact grid and freezes node and link capacities.
inline CapacityTable compute_capacities(const GridNetwork& net, double alpha, double beta) {
    if (!(alpha >= 0.0) || !(beta >= 0.0))
        throw ConfigError("safety margins alpha and beta must be nonnegative");
    const auto live_n = detail::all_live(net.node_count());
    const auto live_l = detail::all_live(net.link_count());
    const Reachability reach = generator_reachability(net, live_n, live_l);
    if (!reach.islanded.empty())
        throw ConfigError("intact grid is not solvable: bus " +
                          std::to_string(reach.islanded.front()) +
                          " is unreachable from every generator");

    const FlowState flow = solve_flow(net, live_n, live_l);
    CapacityTable cap;
    cap.alpha = alpha;
    cap.beta = beta;
    cap.node_max.resize(static_cast<std::size_t>(net.node_count()));
    cap.link_max.resize(static_cast<std::size_t>(net.link_count()));
    for (int i = 0; i < net.node_count(); ++i)
        cap.node_max[static_cast<std::size_t>(i)] =
            detail::scaled_capacity(flow.node_loads[static_cast<std::size_t>(i)], alpha);
    for (int b = 0; b < net.link_count(); ++b)
        cap.link_max[static_cast<std::size_t>(b)] =
            detail::scaled_capacity(std::abs(flow.currents[static_cast<std::size_t>(b)]), beta);
    return cap;
}

/// Round-based overload cascade. Each round prunes generator-free islands,
/// re-solves the flow on the survivors, then fails every node with
/// load > node_max and every link with |current| > link_max, all at once.
/// The loop stops at the first round that produces no failure. Failure is
/// strict exceedance: a component at exactly its maximum survives.
///
/// A failed node takes its incident links with it; islanded nodes count as
/// failed. The report lists per-round failures; damage is the fraction of
/// failed nodes, counting the initial node removals.
inline CascadeReport simulate_cascade(const GridNetwork& net, const CapacityTable& cap,
                                      std::span<const int> initial_links,
                                      std::span<const int> initial_nodes) {
    const int n = net.node_count();
    const int m = net.link_count();
    if (static_cast<int>(cap.node_max.size()) != n || static_cast<int>(cap.link_max.size()) != m)
        throw std::invalid_argument("capacity table does not match network");

    std::vector<char> live_n(static_cast<std::size_t>(n), 1);
    std::vector<char> live_l(static_cast<std::size_t>(m), 1);

    const auto kill_link = [&](int b) { live_l[static_cast<std::size_t>(b)] = 0; };
    const auto kill_node = [&](int i) {
        live_n[static_cast<std::size_t>(i)] = 0;
        for (int b : net.adjacency[static_cast<std::size_t>(i)]) kill_link(b);
    };

    for (int i : initial_nodes) {
        if (i < 0 || i >= n) throw std::invalid_argument("initial node id out of range");
        kill_node(i);
    }
    for (int b : initial_links) {
        if (b < 0 || b >= m) throw std::invalid_argument("initial link id out of range");
        kill_link(b);
    }

    CascadeReport report;
    for (int round = 1;; ++round) {
        if (round > n + m + 1)
            throw std::logic_error("cascade failed to terminate within N + M rounds");

        const Reachability reach = generator_reachability(net, live_n, live_l);
        for (int i : reach.islanded) kill_node(i);

        std::vector<int> overloaded_nodes;
        std::vector<int> overloaded_links;
        if (!reach.alive.empty()) {
            FlowState flow;
            try {
                flow = solve_flow(net, live_n, live_l);
            } catch (const SolverError& err) {
                throw SolverError("cascade aborted in round " + std::to_string(round) + ": " +
                                  err.what());
            }
            for (int i = 0; i < n; ++i)
                if (live_n[static_cast<std::size_t>(i)] &&
                    flow.node_loads[static_cast<std::size_t>(i)] > cap.node_max[static_cast<std::size_t>(i)])
                    overloaded_nodes.push_back(i);
            for (int b = 0; b < m; ++b)
                if (live_l[static_cast<std::size_t>(b)] &&
                    std::abs(flow.currents[static_cast<std::size_t>(b)]) > cap.link_max[static_cast<std::size_t>(b)])
                    overloaded_links.push_back(b);
        }

        if (reach.islanded.empty() && overloaded_nodes.empty() && overloaded_links.empty()) break;

        for (int b : overloaded_links) kill_link(b);
        for (int i : overloaded_nodes) kill_node(i);
        report.rounds.push_back({reach.islanded, overloaded_nodes, overloaded_links});
    }

    for (int i = 0; i < n; ++i)
        if (!live_n[static_cast<std::size_t>(i)]) report.failed_nodes.push_back(i);
    for (int b = 0; b < m; ++b)
        if (!live_l[static_cast<std::size_t>(b)]) report.failed_links.push_back(b);
    report.damage = static_cast<double>(report.failed_nodes.size()) / static_cast<double>(n);
    return report;
}

/// Damage ratio: failed nodes over total nodes, in [0, 1].
inline double damage(const CascadeReport& report, int node_count) {
    if (node_count <= 0) throw std::invalid_argument("node count must be positive");
    return static_cast<double>(report.failed_nodes.size()) / static_cast<double>(node_count);
}

}  // namespace gridattack
