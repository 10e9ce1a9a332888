#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridattack/errors.hpp"
#include "gridattack/rng.hpp"

namespace gridattack {

/// Swarm parameters. Defaults are the experiment settings: 10 particles,
/// 30 iterations, w0 = 0.96, c1 = c2 = 0.7.
struct SwarmConfig {
    int particles = 10;
    int max_iterations = 30;
    double inertia0 = 0.96;  // w0
    double cognitive = 0.7;  // c1
    double social = 0.7;     // c2
    std::uint64_t seed = 0;
    std::optional<std::pair<double, double>> bounds;  // position clamp, every dimension
    std::optional<double> velocity_clamp;             // symmetric |v| cap per dimension
    // Add the pre-update velocity in the position step instead of the fresh
    // one. Off by default: the standard x' = x + v' reading.
    bool literal_position_update = false;
};

struct Particle {
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> best_position;
    double best_value = -std::numeric_limits<double>::infinity();
};

struct ContinuousResult {
    std::vector<double> best_position;
    double best_value = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;  // global best value after each iteration
};

struct TopKResult {
    std::vector<int> best_set;  // sorted branch indices
    double best_value = -std::numeric_limits<double>::infinity();
    std::vector<double> trace;
};

/// Inertia schedule w = w0 - iter/iter_max, taken literally: with the
/// default w0 = 0.96 the final iteration runs at w = -0.04.
inline double inertia(int iteration, const SwarmConfig& cfg) {
    if (iteration < 1 || iteration > cfg.max_iterations)
        throw std::invalid_argument("inertia: iteration out of range");
    return cfg.inertia0 - static_cast<double>(iteration) / static_cast<double>(cfg.max_iterations);
}

/// v' = w*v + c1*r1*(p_best - x) + c2*r2*(g_best - x), clamped if configured.
/// r1 and r2 are scalars drawn once per particle per iteration.
inline std::vector<double> step_velocity(const Particle& p, const std::vector<double>& g_best,
                                         double w, double r1, double r2, const SwarmConfig& cfg) {
    const std::size_t dim = p.position.size();
    if (p.velocity.size() != dim || p.best_position.size() != dim || g_best.size() != dim)
        throw std::invalid_argument("step_velocity: dimension mismatch");
    std::vector<double> v(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        v[d] = w * p.velocity[d] + cfg.cognitive * r1 * (p.best_position[d] - p.position[d]) +
               cfg.social * r2 * (g_best[d] - p.position[d]);
        if (cfg.velocity_clamp) v[d] = std::clamp(v[d], -*cfg.velocity_clamp, *cfg.velocity_clamp);
    }
    return v;
}

/// x' = x + v (fresh velocity, or the old one in literal mode), clamped to
/// the configured bounds.
inline std::vector<double> step_position(const Particle& p, const std::vector<double>& new_velocity,
                                         const SwarmConfig& cfg) {
    const std::size_t dim = p.position.size();
    if (new_velocity.size() != dim || p.velocity.size() != dim)
        throw std::invalid_argument("step_position: dimension mismatch");
    const std::vector<double>& v = cfg.literal_position_update ? p.velocity : new_velocity;
    std::vector<double> x(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        x[d] = p.position[d] + v[d];
        if (cfg.bounds) x[d] = std::clamp(x[d], cfg.bounds->first, cfg.bounds->second);
    }
    return x;
}

namespace detail {

inline void check_swarm_config(const SwarmConfig& cfg) {
    if (cfg.particles < 1) throw ConfigError("swarm needs at least one particle");
    if (cfg.max_iterations < 1) throw ConfigError("swarm needs at least one iteration");
    if (!std::isfinite(cfg.inertia0) || !std::isfinite(cfg.cognitive) || !std::isfinite(cfg.social))
        throw ConfigError("swarm coefficients must be finite");
}

inline void check_finite(double value, int particle) {
    if (!std::isfinite(value))
        throw SolverError("objective returned a non-finite value for particle " +
                          std::to_string(particle));
}

}  // namespace detail

/// Plain continuous maximizer. Positions start uniform in the bounds
/// ([-1,1] per dimension when none are set), velocities at zero; each
/// iteration evaluates every particle, updates the personal and global
/// bests on strict improvement, then moves the swarm. Deterministic for a
/// fixed seed; the trace holds the global best after each iteration.
inline ContinuousResult run_continuous(const std::function<double(const std::vector<double>&)>& objective,
                                       int dim, const SwarmConfig& cfg) {
    detail::check_swarm_config(cfg);
    if (dim < 1) throw ConfigError("run_continuous: dimension must be positive");
    Rng rng(cfg.seed);
    const auto [lo, hi] = cfg.bounds.value_or(std::pair<double, double>{-1.0, 1.0});

    std::vector<Particle> swarm(static_cast<std::size_t>(cfg.particles));
    for (Particle& p : swarm) {
        p.position.resize(static_cast<std::size_t>(dim));
        for (double& x : p.position) x = rng.uniform(lo, hi);
        p.velocity.assign(static_cast<std::size_t>(dim), 0.0);
        p.best_position = p.position;
    }

    ContinuousResult result;
    std::vector<double> values(swarm.size());
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        for (std::size_t j = 0; j < swarm.size(); ++j) {
            values[j] = objective(swarm[j].position);
            detail::check_finite(values[j], static_cast<int>(j));
        }
        for (std::size_t s = 0; s < swarm.size(); ++s) {
            if (values[s] > swarm[s].best_value) {
                swarm[s].best_value = values[s];
                swarm[s].best_position = swarm[s].position;
            }
            if (values[s] > result.best_value) {
                result.best_value = values[s];
                result.best_position = swarm[s].position;
            }
        }
        const double w = inertia(iter, cfg);
        for (Particle& p : swarm) {
            const double r1 = rng.uniform01();
            const double r2 = rng.uniform01();
            std::vector<double> v = step_velocity(p, result.best_position, w, r1, r2, cfg);
            std::vector<double> x = step_position(p, v, cfg);
            p.velocity = std::move(v);
            p.position = std::move(x);
        }
        result.trace.push_back(result.best_value);
    }
    return result;
}

/// Top-K projection: the K largest coordinates (ties by lower index) map
/// to 1, the rest to 0. Returns the selected indices, ascending.
inline std::vector<int> project_topk(const std::vector<double>& position, int k) {
    if (k < 0 || k > static_cast<int>(position.size()))
        throw std::invalid_argument("project_topk: k out of range");
    std::vector<int> order(position.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return position[static_cast<std::size_t>(a)] > position[static_cast<std::size_t>(b)];
    });
    std::vector<int> set(order.begin(), order.begin() + k);
    std::sort(set.begin(), set.end());
    return set;
}

/// K-of-M subset search. Particles live in R^M; after every move the
/// position is reset to its top-K binary projection and the objective is
/// evaluated on that K-set, so every evaluated candidate has exactly K
/// ones. A particle whose projected set matches the global best's set is
/// re-initialized (fresh random K-hot position, zero velocity) before the
/// move step, which keeps the swarm from collapsing onto one set. Velocity
/// is clamped to +-1 per dimension unless configured otherwise.
inline TopKResult run_topk_binary(const std::function<double(const std::vector<int>&)>& objective,
                                  int total, int k, const SwarmConfig& cfg) {
    detail::check_swarm_config(cfg);
    if (k < 1 || k > total) throw ConfigError("run_topk_binary: need 1 <= K <= M");
    Rng rng(cfg.seed);
    SwarmConfig local = cfg;
    local.velocity_clamp = cfg.velocity_clamp.value_or(1.0);

    const auto random_khot = [&]() {
        std::vector<double> x(static_cast<std::size_t>(total), 0.0);
        for (int idx : rng.sample(total, k)) x[static_cast<std::size_t>(idx)] = 1.0;
        return x;
    };

    std::vector<Particle> swarm(static_cast<std::size_t>(local.particles));
    for (Particle& p : swarm) {
        p.position = random_khot();
        p.velocity.assign(static_cast<std::size_t>(total), 0.0);
        p.best_position = p.position;
    }

    TopKResult result;
    std::vector<double> g_best_position;
    std::vector<double> values(swarm.size());
    std::vector<std::vector<int>> sets(swarm.size());
    for (int iter = 1; iter <= local.max_iterations; ++iter) {
        for (std::size_t j = 0; j < swarm.size(); ++j) {
            sets[j] = project_topk(swarm[j].position, k);
            std::vector<double>& x = swarm[j].position;
            std::fill(x.begin(), x.end(), 0.0);
            for (int idx : sets[j]) x[static_cast<std::size_t>(idx)] = 1.0;
            values[j] = objective(sets[j]);
            detail::check_finite(values[j], static_cast<int>(j));
        }
        for (std::size_t s = 0; s < swarm.size(); ++s) {
            if (values[s] > swarm[s].best_value) {
                swarm[s].best_value = values[s];
                swarm[s].best_position = swarm[s].position;
            }
            if (values[s] > result.best_value) {
                result.best_value = values[s];
                result.best_set = sets[s];
                g_best_position = swarm[s].position;
            }
            if (sets[s] == result.best_set) {
                swarm[s].position = random_khot();
                std::fill(swarm[s].velocity.begin(), swarm[s].velocity.end(), 0.0);
            }
        }
        const double w = inertia(iter, local);
        for (Particle& p : swarm) {
            const double r1 = rng.uniform01();
            const double r2 = rng.uniform01();
            std::vector<double> v = step_velocity(p, g_best_position, w, r1, r2, local);
            std::vector<double> x = step_position(p, v, local);
            p.velocity = std::move(v);
            p.position = std::move(x);
        }
        result.trace.push_back(result.best_value);
    }
    return result;
}

}  // namespace gridattack
