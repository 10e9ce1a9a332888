#pragma once

#include <string>
#include <vector>

#include "gridattack/grid.hpp"

namespace fixtures {

using gridattack::Branch;
using gridattack::Bus;
using gridattack::BusKind;
using gridattack::GridNetwork;

inline std::string source_dir() { return GRIDATTACK_SOURCE_DIR; }
inline std::string data_path(const std::string& name) { return source_dir() + "/data/" + name; }

inline Bus generator(int id, double voltage = 1.0) {
    return Bus{.id = id, .kind = BusKind::Generator, .setpoint = voltage, .external_id = id + 1};
}

inline Bus consumer(int id, double demand) {
    return Bus{.id = id, .kind = BusKind::Consumer, .setpoint = demand, .external_id = id + 1};
}

inline Branch branch(int id, int from, int to, double admittance) {
    return Branch{.id = id, .from = from, .to = to, .admittance = admittance};
}

/// G(v=1) -- C(demand 1), admittance 1.
inline GridNetwork two_bus(double demand = 1.0) {
    return GridNetwork::build({generator(0), consumer(1, demand)}, {branch(0, 0, 1, 1.0)});
}

/// Path G(v=1) - C1(demand 1) - C2(demand 1), admittances 1.
inline GridNetwork three_bus_path() {
    return GridNetwork::build({generator(0), consumer(1, 1.0), consumer(2, 1.0)},
                              {branch(0, 0, 1, 1.0), branch(1, 1, 2, 1.0)});
}

/// Two parallel two-hop paths 0-1-3 and 0-2-3 feeding a tail 3-4-5; all
/// admittances 10, demands 2.0 at node 3 and 1.0 at node 5. The same grid
/// as data/case6.m with bus 1 generating.
///
/// Hand-solved intact state: currents (1.5, 1.5, 1.5, 1.5, 1.0, 1.0),
/// voltages (1, 0.85, 0.85, 0.7, 0.6, 0.5), node loads
/// (3.0, 1.275, 1.275, 0.7, 0.6, 0). Removing branch 0 with 20% margins
/// overloads branches 2 and 3 plus node 2 in round one, islands nodes
/// 1, 3, 4, 5 in round two: damage 5/6.
inline GridNetwork golden_six_bus() {
    return GridNetwork::build(
        {generator(0), consumer(1, 0.0), consumer(2, 0.0), consumer(3, 2.0), consumer(4, 0.0),
         consumer(5, 1.0)},
        {branch(0, 0, 1, 10.0), branch(1, 1, 3, 10.0), branch(2, 0, 2, 10.0),
         branch(3, 2, 3, 10.0), branch(4, 3, 4, 10.0), branch(5, 4, 5, 10.0)});
}

/// Per-link single-removal damages on the golden fixture (hand-traced).
inline std::vector<double> golden_single_link_damages() {
    return {5.0 / 6, 4.0 / 6, 5.0 / 6, 4.0 / 6, 2.0 / 6, 1.0 / 6};
}

}  // namespace fixtures
