#pragma once

#include <string>

#include "json.hpp"  // vendored nlohmann/json

#include "gridattack/attacks.hpp"
#include "gridattack/cascade.hpp"
#include "gridattack/grid.hpp"

namespace gridattack {

using Json = nlohmann::json;

inline Json report_to_json(const CascadeReport& report) {
    Json rounds = Json::array();
    for (const CascadeRound& round : report.rounds) {
        rounds.push_back({{"islanded_nodes", round.islanded_nodes},
                          {"overloaded_nodes", round.overloaded_nodes},
                          {"overloaded_links", round.overloaded_links}});
    }
    return Json{{"rounds", std::move(rounds)},
                {"failed_nodes", report.failed_nodes},
                {"failed_links", report.failed_links},
                {"damage", report.damage}};
}

/// Attack plan with links labeled by the case file's bus numbering.
inline Json plan_to_json(const AttackPlan& plan, const GridNetwork& net) {
    Json links = Json::array();
    for (int b : plan.links) {
        const Branch& br = net.branches[static_cast<std::size_t>(b)];
        links.push_back({{"id", b},
                         {"from", net.buses[static_cast<std::size_t>(br.from)].external_id},
                         {"to", net.buses[static_cast<std::size_t>(br.to)].external_id}});
    }
    Json j{{"algorithm", plan.algorithm}, {"k", plan.k},
           {"seed", plan.seed},          {"links", std::move(links)},
           {"damage", plan.damage},      {"evaluations", plan.evaluations},
           {"memo_hits", plan.memo_hits}};
    if (!plan.trace.empty()) j["trace"] = plan.trace;
    return j;
}

}  // namespace gridattack
