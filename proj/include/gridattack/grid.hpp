#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridattack/errors.hpp"

namespace gridattack {

enum class BusKind { Generator, Consumer };

/// A node of the resistive grid model. `setpoint` is the per-unit voltage
/// for generators and the per-unit current demand for consumers.
struct Bus {
    int id = 0;  // dense, 0..N-1
    BusKind kind = BusKind::Consumer;
    double setpoint = 1.0;
    int external_id = 0;  // numbering from the source case file

    bool is_generator() const { return kind == BusKind::Generator; }
};

/// An undirected transmission line with scalar admittance. Currents are
/// reported signed, positive when flowing from `from` to `to`.
struct Branch {
    int id = 0;  // dense, 0..M-1
    int from = 0;
    int to = 0;
    double admittance = 0.0;
};

class GridNetwork {
public:
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<std::vector<int>> adjacency;  // bus id -> incident branch ids

    GridNetwork() = default;

    /// Assembles adjacency and checks structural invariants (dense ids,
    /// no self-loops, no parallel branches, positive finite admittance).
    static GridNetwork build(std::vector<Bus> buses, std::vector<Branch> branches) {
        GridNetwork net;
        net.buses = std::move(buses);
        net.branches = std::move(branches);
        const int n = net.node_count();
        const int m = net.link_count();
        for (int i = 0; i < n; ++i) {
            if (net.buses[static_cast<std::size_t>(i)].id != i)
                throw ConfigError("bus ids must be dense 0..N-1 in order; got " +
                                  std::to_string(net.buses[static_cast<std::size_t>(i)].id) +
                                  " at position " + std::to_string(i));
        }
        net.adjacency.assign(static_cast<std::size_t>(n), {});
        std::map<std::pair<int, int>, int> seen;
        for (int b = 0; b < m; ++b) {
            const Branch& br = net.branches[static_cast<std::size_t>(b)];
            if (br.id != b)
                throw ConfigError("branch ids must be dense 0..M-1 in order");
            if (br.from < 0 || br.from >= n || br.to < 0 || br.to >= n)
                throw ConfigError("branch " + std::to_string(b) + " references unknown bus");
            if (br.from == br.to)
                throw ConfigError("branch " + std::to_string(b) + " is a self-loop at bus " +
                                  std::to_string(br.from));
            if (!(br.admittance > 0.0) || !std::isfinite(br.admittance))
                throw ConfigError("branch " + std::to_string(b) +
                                  " must have positive finite admittance");
            const auto key = std::minmax(br.from, br.to);
            if (auto [it, inserted] = seen.emplace(key, b); !inserted)
                throw ConfigError("parallel branches " + std::to_string(it->second) + " and " +
                                  std::to_string(b) + " between buses " + std::to_string(key.first) +
                                  " and " + std::to_string(key.second) + " (merge at ingest)");
            net.adjacency[static_cast<std::size_t>(br.from)].push_back(b);
            net.adjacency[static_cast<std::size_t>(br.to)].push_back(b);
        }
        return net;
    }

    int node_count() const { return static_cast<int>(buses.size()); }
    int link_count() const { return static_cast<int>(branches.size()); }

    /// The bus at the opposite end of `branch_id` as seen from `node`.
    int other_end(int branch_id, int node) const {
        const Branch& br = branches[static_cast<std::size_t>(branch_id)];
        return br.from == node ? br.to : br.from;
    }
};

/// Full invariant check for networks handed to the solvers: structure,
/// setpoint signs, and at least one generator. Throws ConfigError.
inline void validate(const GridNetwork& net) {
    if (net.node_count() < 2) throw ConfigError("network needs at least 2 buses");
    if (net.link_count() < 1) throw ConfigError("network needs at least 1 branch");
    bool any_generator = false;
    for (const Bus& bus : net.buses) {
        if (bus.is_generator()) {
            any_generator = true;
            if (!(bus.setpoint > 0.0))
                throw ConfigError("generator bus " + std::to_string(bus.id) +
                                  " needs positive voltage setpoint");
        } else if (bus.setpoint < 0.0) {
            throw ConfigError("consumer bus " + std::to_string(bus.id) +
                              " needs nonnegative demand");
        }
    }
    if (!any_generator) throw ConfigError("network has no generator bus");
    // Rebuild to re-check the structural invariants on the same data.
    (void)GridNetwork::build(net.buses, net.branches);
}

}  // namespace gridattack
