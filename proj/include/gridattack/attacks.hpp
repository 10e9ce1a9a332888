#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gridattack/cascade.hpp"
#include "gridattack/centrality.hpp"
#include "gridattack/errors.hpp"
#include "gridattack/pso.hpp"
#include "gridattack/rng.hpp"

namespace gridattack {

/// One instance of the K-link selection problem: find the K-link removal
/// that maximizes cascade damage on this grid.
struct AttackProblem {
    const GridNetwork& net;
    const CapacityTable& cap;
    int k = 1;
    std::uint64_t seed = 0;
};

struct AttackPlan {
    std::string algorithm;
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<int> links;  // sorted branch ids, |links| == k
    double damage = 0.0;
    long long evaluations = 0;  // cascade evaluations requested by the run
    long long memo_hits = 0;    // of those, answered from the memo
    std::vector<double> trace;  // per-iteration best damage, when applicable
};

namespace detail {

struct LinkSetHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::size_t h = 1469598103934665603ull;
        for (int x : v) {
            h ^= static_cast<std::size_t>(x) + 0x9e3779b9u;
            h *= 1099511628211ull;
        }
        return h;
    }
};

}  // namespace detail

/// Cascade damage of removing exactly `links` from the intact grid, with
/// no memoization. Prefer CascadeEvaluator in search loops.
inline double evaluate_attack(const AttackProblem& prob, std::span<const int> links) {
    return simulate_cascade(prob.net, prob.cap, links, {}).damage;
}

/// Damage oracle shared by the attack algorithms. Every call counts as one
/// cascade evaluation (that is what the complexity accounting measures);
/// repeated link-sets are answered from a memo keyed by the canonical
/// sorted set and reported separately as memo hits. Safe for concurrent
/// use; values are deterministic so racing inserts are harmless.
class CascadeEvaluator {
public:
    CascadeEvaluator(const GridNetwork& net, const CapacityTable& cap) : net_(net), cap_(cap) {}

    double evaluate(std::vector<int> links) {
        std::sort(links.begin(), links.end());
        if (std::adjacent_find(links.begin(), links.end()) != links.end())
            throw std::invalid_argument("link set contains duplicates");
        evaluations_.fetch_add(1, std::memory_order_relaxed);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (auto it = memo_.find(links); it != memo_.end()) {
                memo_hits_.fetch_add(1, std::memory_order_relaxed);
                return it->second;
            }
        }
        const double value = simulate_cascade(net_, cap_, links, {}).damage;
        std::lock_guard<std::mutex> lock(mutex_);
        memo_.emplace(std::move(links), value);
        return value;
    }

    CascadeReport report(std::span<const int> links) const {
        return simulate_cascade(net_, cap_, links, {});
    }

    const GridNetwork& net() const { return net_; }
    const CapacityTable& capacities() const { return cap_; }
    long long evaluations() const { return evaluations_.load(std::memory_order_relaxed); }
    long long memo_hits() const { return memo_hits_.load(std::memory_order_relaxed); }

private:
    const GridNetwork& net_;
    const CapacityTable& cap_;
    std::unordered_map<std::vector<int>, double, detail::LinkSetHash> memo_;
    mutable std::mutex mutex_;
    std::atomic<long long> evaluations_{0};
    std::atomic<long long> memo_hits_{0};
};

namespace detail {

class EvalCounter {
public:
    explicit EvalCounter(const CascadeEvaluator& eval)
        : eval_(eval), evaluations0_(eval.evaluations()), memo_hits0_(eval.memo_hits()) {}

    void finish(AttackPlan& plan) const {
        plan.evaluations = eval_.evaluations() - evaluations0_;
        plan.memo_hits = eval_.memo_hits() - memo_hits0_;
    }

private:
    const CascadeEvaluator& eval_;
    long long evaluations0_;
    long long memo_hits0_;
};

inline void check_budget(const AttackProblem& prob) {
    if (prob.k < 1 || prob.k > prob.net.link_count())
        throw ConfigError("attack budget K must satisfy 1 <= K <= M");
}

}  // namespace detail

/// Uniform random K-set baseline.
inline AttackPlan attack_random(const AttackProblem& prob, CascadeEvaluator& eval) {
    detail::check_budget(prob);
    detail::EvalCounter counter(eval);
    Rng rng(prob.seed);
    AttackPlan plan{.algorithm = "random", .k = prob.k, .seed = prob.seed};
    plan.links = rng.sample(prob.net.link_count(), prob.k);
    plan.damage = eval.evaluate(plan.links);
    counter.finish(plan);
    return plan;
}

/// Ground-truth single-link attack: evaluates every link and returns the
/// argmax (ties go to the lowest branch id).
inline AttackPlan attack_exhaustive_single(const AttackProblem& prob, CascadeEvaluator& eval) {
    if (prob.k != 1) throw std::invalid_argument("attack_exhaustive_single requires K = 1");
    detail::EvalCounter counter(eval);
    AttackPlan plan{.algorithm = "oracle", .k = 1, .seed = prob.seed};
    plan.damage = -1.0;
    for (int b = 0; b < prob.net.link_count(); ++b) {
        const double d = eval.evaluate({b});
        if (d > plan.damage) {
            plan.damage = d;
            plan.links = {b};
        }
    }
    counter.finish(plan);
    return plan;
}

/// Full enumeration over all C(M, K) link sets. Exponential; intended as a
/// small-instance oracle.
inline AttackPlan attack_exhaustive(const AttackProblem& prob, CascadeEvaluator& eval) {
    detail::check_budget(prob);
    detail::EvalCounter counter(eval);
    const int m = prob.net.link_count();
    const int k = prob.k;
    AttackPlan plan{.algorithm = "exhaustive", .k = k, .seed = prob.seed};
    plan.damage = -1.0;
    std::vector<int> combo(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) combo[static_cast<std::size_t>(i)] = i;
    while (true) {
        const double d = eval.evaluate(combo);
        if (d > plan.damage) {
            plan.damage = d;
            plan.links = combo;
        }
        int pos = k - 1;
        while (pos >= 0 && combo[static_cast<std::size_t>(pos)] == m - k + pos) --pos;
        if (pos < 0) break;
        ++combo[static_cast<std::size_t>(pos)];
        for (int i = pos + 1; i < k; ++i)
            combo[static_cast<std::size_t>(i)] = combo[static_cast<std::size_t>(i - 1)] + 1;
    }
    counter.finish(plan);
    return plan;
}

/// Binary-projected swarm search directly over K-link sets.
inline AttackPlan attack_pso_oa(const AttackProblem& prob, const SwarmConfig& cfg,
                                CascadeEvaluator& eval) {
    detail::check_budget(prob);
    detail::EvalCounter counter(eval);
    const TopKResult res = run_topk_binary(
        [&](const std::vector<int>& set) { return eval.evaluate(set); }, prob.net.link_count(),
        prob.k, cfg);
    AttackPlan plan{.algorithm = "pso-oa", .k = prob.k, .seed = cfg.seed};
    plan.links = res.best_set;
    plan.damage = res.best_value;
    plan.trace = res.trace;
    counter.finish(plan);
    return plan;
}

/// Greedy attack filtered by link score: rank all links by theta, measure
/// the damage of the top ceil(M * top_fraction) links one at a time, keep
/// the K individually most damaging (ties to the lower id), and evaluate
/// that K-set jointly once. ceil(M * top_fraction) + 1 evaluations total.
inline AttackPlan attack_lc_ga(const AttackProblem& prob, CentralityWeights weights,
                               double top_fraction, CascadeEvaluator& eval) {
    detail::check_budget(prob);
    if (!(top_fraction > 0.0) || top_fraction > 1.0)
        throw ConfigError("top_fraction must be in (0, 1]");
    const int m = prob.net.link_count();
    const int shortlist =
        static_cast<int>(std::ceil(static_cast<double>(m) * top_fraction));
    if (shortlist < prob.k)
        throw ConfigError("top_fraction shortlist smaller than K: ceil(M * L) = " +
                          std::to_string(shortlist) + " < " + std::to_string(prob.k));

    detail::EvalCounter counter(eval);
    const FlowState intact = solve_flow(prob.net);
    const std::vector<int> ranked = rank_links(score_links(prob.net, intact, weights));

    std::vector<std::pair<double, int>> individual;  // (damage, branch id)
    individual.reserve(static_cast<std::size_t>(shortlist));
    for (int i = 0; i < shortlist; ++i) {
        const int b = ranked[static_cast<std::size_t>(i)];
        individual.emplace_back(eval.evaluate({b}), b);
    }
    std::sort(individual.begin(), individual.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    AttackPlan plan{.algorithm = "lc-ga", .k = prob.k, .seed = prob.seed};
    for (int i = 0; i < prob.k; ++i) plan.links.push_back(individual[static_cast<std::size_t>(i)].second);
    std::sort(plan.links.begin(), plan.links.end());
    plan.damage = eval.evaluate(plan.links);
    counter.finish(plan);
    return plan;
}

struct LcOaResult {
    AttackPlan plan;
    CentralityWeights weights;  // best (h1, h2) found
};

namespace detail {

/// Top-K links under a given weight pair, from precomputed degree and
/// current magnitudes. Ordered by descending theta, ties by ascending id.
inline std::vector<int> topk_by_weights(const std::vector<int>& degrees,
                                        const std::vector<double>& currents, double h1, double h2,
                                        int k) {
    const int m = static_cast<int>(degrees.size());
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> theta(static_cast<std::size_t>(m));
    for (int b = 0; b < m; ++b)
        theta[static_cast<std::size_t>(b)] =
            h1 * degrees[static_cast<std::size_t>(b)] + h2 * currents[static_cast<std::size_t>(b)];
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (theta[static_cast<std::size_t>(a)] != theta[static_cast<std::size_t>(b)])
            return theta[static_cast<std::size_t>(a)] > theta[static_cast<std::size_t>(b)];
        return a < b;
    });
    std::vector<int> set(order.begin(), order.begin() + k);
    std::sort(set.begin(), set.end());
    return set;
}

}  // namespace detail

/// Swarm search over the two score weights: each candidate (h1, h2) in
/// [-1,1]^2 is scored by the damage of removing the K top-ranked links
/// under those weights. Rankings are invariant under positive scaling of
/// the weights, so the box covers every achievable ranking.
inline LcOaResult attack_lc_oa(const AttackProblem& prob, const SwarmConfig& cfg,
                               CascadeEvaluator& eval) {
    detail::check_budget(prob);
    detail::EvalCounter counter(eval);
    const FlowState intact = solve_flow(prob.net);
    const int m = prob.net.link_count();
    std::vector<int> degrees(static_cast<std::size_t>(m));
    std::vector<double> currents(static_cast<std::size_t>(m));
    for (const Branch& br : prob.net.branches) {
        degrees[static_cast<std::size_t>(br.id)] = link_degree(prob.net, br);
        currents[static_cast<std::size_t>(br.id)] = std::abs(intact.currents[static_cast<std::size_t>(br.id)]);
    }

    SwarmConfig local = cfg;
    local.bounds = {{-1.0, 1.0}};
    const ContinuousResult res = run_continuous(
        [&](const std::vector<double>& w) {
            return eval.evaluate(detail::topk_by_weights(degrees, currents, w[0], w[1], prob.k));
        },
        2, local);

    LcOaResult out;
    out.weights = {res.best_position[0], res.best_position[1]};
    out.plan = AttackPlan{.algorithm = "lc-oa", .k = prob.k, .seed = cfg.seed};
    out.plan.links = detail::topk_by_weights(degrees, currents, out.weights.degree_weight,
                                             out.weights.current_weight, prob.k);
    out.plan.damage = res.best_value;
    out.plan.trace = res.trace;
    counter.finish(out.plan);
    return out;
}

}  // namespace gridattack
