#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gridattack/flow.hpp"
#include "gridattack/grid.hpp"

namespace gridattack {

/// Weights of the combined link score: theta = degree_weight * D +
/// current_weight * |I|. Raw values are combined without normalization;
/// the weight search absorbs scale differences between the two terms.
struct CentralityWeights {
    double degree_weight = 1.0;   // h1
    double current_weight = 1.0;  // h2
};

struct LinkScore {
    int branch = 0;
    int degree = 0;          // links incident to the two endpoints, minus itself
    double current_mag = 0;  // |I| on the intact grid
    double theta = 0;
};

/// Number of links (other than the branch itself) touching its endpoints.
inline int link_degree(const GridNetwork& net, const Branch& branch) {
    const auto deg = [&](int node) {
        return static_cast<int>(net.adjacency[static_cast<std::size_t>(node)].size());
    };
    return deg(branch.from) + deg(branch.to) - 2;
}

/// Scores every branch from the intact grid's flow. Degree and current are
/// deliberately taken from the original state; scores are never recomputed
/// mid-cascade.
inline std::vector<LinkScore> score_links(const GridNetwork& net, const FlowState& intact,
                                          CentralityWeights weights) {
    if (static_cast<int>(intact.voltages.size()) != net.node_count() ||
        static_cast<int>(intact.currents.size()) != net.link_count())
        throw std::invalid_argument("flow state does not match network");
    std::vector<LinkScore> scores;
    scores.reserve(net.branches.size());
    for (const Branch& br : net.branches) {
        if (!intact.link_live(br.id))
            throw std::invalid_argument("score_links needs the intact grid's flow");
        LinkScore s;
        s.branch = br.id;
        s.degree = link_degree(net, br);
        s.current_mag = std::abs(intact.currents[static_cast<std::size_t>(br.id)]);
        s.theta = weights.degree_weight * s.degree + weights.current_weight * s.current_mag;
        scores.push_back(s);
    }
    return scores;
}

/// Branch ids by descending theta; ties broken by ascending id so rankings
/// are reproducible.
inline std::vector<int> rank_links(const std::vector<LinkScore>& scores) {
    std::vector<const LinkScore*> order;
    order.reserve(scores.size());
    for (const LinkScore& s : scores) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const LinkScore* a, const LinkScore* b) {
        if (a->theta != b->theta) return a->theta > b->theta;
        return a->branch < b->branch;
    });
    std::vector<int> ids;
    ids.reserve(order.size());
    for (const LinkScore* s : order) ids.push_back(s->branch);
    return ids;
}

}  // namespace gridattack
