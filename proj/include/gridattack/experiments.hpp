#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gridattack/attacks.hpp"
#include "gridattack/ingest.hpp"
#include "gridattack/serialize.hpp"
#include "gridattack/version.hpp"

namespace gridattack {

/// Everything a study run needs; round-trips through JSON so any output
/// file can be replayed bit-exactly from its embedded header.
struct ExperimentConfig {
    std::string study = "single";  // single | multi | converge | score
    std::string case_path;
    std::optional<CaseFormat> format;  // nullopt = detect from content
    bool use_file_loads = false;
    double generator_fraction = 0.10;
    bool fixed_generators = false;  // one placement for all repetitions
    std::uint64_t base_seed = 1;    // repetition r uses base_seed + r
    double alpha = 0.2;
    double beta = 0.2;
    int k = 1;      // single / converge budget
    int k_min = 1;  // multi study range
    int k_max = 5;
    int repetitions = 100;
    SwarmConfig swarm;
    CentralityWeights weights;
    double top_fraction = 0.5;  // LC-GA shortlist fraction
    std::vector<std::string> algorithms = {"pso-oa", "lc-ga", "lc-oa"};
    int threads = 0;  // 0 = hardware concurrency
};

using FileMap = std::map<std::string, std::string>;  // file name -> contents

inline Json to_json(const ExperimentConfig& cfg) {
    Json j;
    j["study"] = cfg.study;
    j["case"] = cfg.case_path;
    j["format"] = !cfg.format ? "auto"
                 : *cfg.format == CaseFormat::Matpower ? "matpower"
                                                       : "cdf";
    j["use_file_loads"] = cfg.use_file_loads;
    j["generator_fraction"] = cfg.generator_fraction;
    j["fixed_generators"] = cfg.fixed_generators;
    j["base_seed"] = cfg.base_seed;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["k"] = cfg.k;
    j["k_min"] = cfg.k_min;
    j["k_max"] = cfg.k_max;
    j["repetitions"] = cfg.repetitions;
    j["particles"] = cfg.swarm.particles;
    j["max_iterations"] = cfg.swarm.max_iterations;
    j["inertia0"] = cfg.swarm.inertia0;
    j["cognitive"] = cfg.swarm.cognitive;
    j["social"] = cfg.swarm.social;
    if (cfg.swarm.velocity_clamp) j["velocity_clamp"] = *cfg.swarm.velocity_clamp;
    j["literal_position_update"] = cfg.swarm.literal_position_update;
    j["degree_weight"] = cfg.weights.degree_weight;
    j["current_weight"] = cfg.weights.current_weight;
    j["top_fraction"] = cfg.top_fraction;
    j["algorithms"] = cfg.algorithms;
    // threads is an execution detail: it never changes the output bytes, so
    // it stays out of the embedded config that `verify` replays from.
    return j;
}

/// Overlays the keys present in `j` onto `cfg` (config-file layering).
inline void apply_json(ExperimentConfig& cfg, const Json& j) {
    const auto get = [&](const char* key, auto& target) {
        if (j.contains(key)) target = j.at(key).template get<std::decay_t<decltype(target)>>();
    };
    get("study", cfg.study);
    get("case", cfg.case_path);
    if (j.contains("format")) {
        const std::string f = j.at("format").get<std::string>();
        if (f == "auto")
            cfg.format.reset();
        else if (f == "matpower")
            cfg.format = CaseFormat::Matpower;
        else if (f == "cdf")
            cfg.format = CaseFormat::Cdf;
        else
            throw ConfigError("unknown case format: " + f);
    }
    get("use_file_loads", cfg.use_file_loads);
    get("generator_fraction", cfg.generator_fraction);
    get("fixed_generators", cfg.fixed_generators);
    get("base_seed", cfg.base_seed);
    get("alpha", cfg.alpha);
    get("beta", cfg.beta);
    get("k", cfg.k);
    get("k_min", cfg.k_min);
    get("k_max", cfg.k_max);
    get("repetitions", cfg.repetitions);
    get("particles", cfg.swarm.particles);
    get("max_iterations", cfg.swarm.max_iterations);
    get("inertia0", cfg.swarm.inertia0);
    get("cognitive", cfg.swarm.cognitive);
    get("social", cfg.swarm.social);
    if (j.contains("velocity_clamp")) cfg.swarm.velocity_clamp = j.at("velocity_clamp").get<double>();
    get("literal_position_update", cfg.swarm.literal_position_update);
    get("degree_weight", cfg.weights.degree_weight);
    get("current_weight", cfg.weights.current_weight);
    get("top_fraction", cfg.top_fraction);
    get("algorithms", cfg.algorithms);
    get("threads", cfg.threads);
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string file_header(const ExperimentConfig& cfg) {
    return std::string("# gridattack ") + kVersion + "\n# config: " + to_json(cfg).dump() + "\n";
}

/// Runs fn(0..reps-1) on a small pool; results land in repetition order so
/// output never depends on scheduling.
template <typename T, typename Fn>
std::vector<T> parallel_reps(int reps, int threads, Fn&& fn) {
    std::vector<T> out(static_cast<std::size_t>(reps));
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, reps));
    if (threads == 1) {
        for (int r = 0; r < reps; ++r) out[static_cast<std::size_t>(r)] = fn(r);
        return out;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
                try {
                    out[static_cast<std::size_t>(r)] = fn(r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

inline GridNetwork load_base_network(const ExperimentConfig& cfg) {
    if (cfg.case_path.empty()) throw ConfigError("no case file given");
    return to_network(load_case_file(cfg.case_path, cfg.format), cfg.use_file_loads);
}

inline std::uint64_t rep_seed(const ExperimentConfig& cfg, int rep) {
    return cfg.base_seed + static_cast<std::uint64_t>(rep);
}

inline GridNetwork rep_network(const ExperimentConfig& cfg, const GridNetwork& base, int rep) {
    const std::uint64_t seed = cfg.fixed_generators ? cfg.base_seed : rep_seed(cfg, rep);
    return assign_generators(base, cfg.generator_fraction, seed);
}

inline void check_algorithms(const std::vector<std::string>& algorithms) {
    for (const std::string& a : algorithms)
        if (a != "pso-oa" && a != "lc-ga" && a != "lc-oa")
            throw ConfigError("unknown algorithm: " + a);
    if (algorithms.empty()) throw ConfigError("no algorithms selected");
}

/// Single evaluation of a fixed link choice, packaged like the search
/// algorithms' plans.
inline AttackPlan fixed_link_plan(const std::string& name, int link, std::uint64_t seed,
                                  CascadeEvaluator& eval) {
    EvalCounter counter(eval);
    AttackPlan plan{.algorithm = name, .k = 1, .seed = seed};
    plan.links = {link};
    plan.damage = eval.evaluate(plan.links);
    counter.finish(plan);
    return plan;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Study results (consumed by the CLI renderers and by tests directly)

struct SingleRow {
    int run = 0;
    std::uint64_t seed = 0;
    std::string strategy;
    int link = 0;
    double phi = 0.0;
    long long evaluations = 0;
};

struct SingleStudy {
    ExperimentConfig cfg;
    GridNetwork base;
    std::vector<SingleRow> rows;  // repetitions x strategies, in order
};

inline const std::vector<std::string>& single_strategies() {
    static const std::vector<std::string> kStrategies = {"random", "degree", "current", "lc-oa",
                                                         "oracle"};
    return kStrategies;
}

/// Critical-link comparison: per repetition, the damage of a random link,
/// the top link by degree, the top link by |current|, the LC-OA pick, and
/// the exhaustive single-link optimum.
inline SingleStudy compute_single_link_study(const ExperimentConfig& cfg) {
    SingleStudy study;
    study.cfg = cfg;
    study.base = detail::load_base_network(cfg);
    if (cfg.repetitions < 1) throw ConfigError("repetitions must be positive");

    auto blocks = detail::parallel_reps<std::vector<SingleRow>>(
        cfg.repetitions, cfg.threads, [&](int rep) {
            const std::uint64_t seed = detail::rep_seed(cfg, rep);
            const GridNetwork net = detail::rep_network(cfg, study.base, rep);
            const CapacityTable cap = compute_capacities(net, cfg.alpha, cfg.beta);
            CascadeEvaluator eval(net, cap);
            const AttackProblem prob{net, cap, 1, seed};

            const FlowState intact = solve_flow(net);
            const int degree_link = rank_links(score_links(net, intact, {1.0, 0.0})).front();
            const int current_link = rank_links(score_links(net, intact, {0.0, 1.0})).front();

            SwarmConfig swarm = cfg.swarm;
            swarm.seed = seed;

            std::vector<AttackPlan> plans;
            plans.push_back(attack_random(prob, eval));
            plans.push_back(detail::fixed_link_plan("degree", degree_link, seed, eval));
            plans.push_back(detail::fixed_link_plan("current", current_link, seed, eval));
            plans.push_back(attack_lc_oa(prob, swarm, eval).plan);
            plans.push_back(attack_exhaustive_single(prob, eval));

            std::vector<SingleRow> rows;
            for (std::size_t i = 0; i < plans.size(); ++i)
                rows.push_back({rep, seed, single_strategies()[i], plans[i].links.front(),
                                plans[i].damage, plans[i].evaluations});
            return rows;
        });

    for (auto& block : blocks)
        study.rows.insert(study.rows.end(), block.begin(), block.end());
    return study;
}

struct MultiRow {
    int k = 0;
    std::string algorithm;
    std::uint64_t seed = 0;
    double phi = 0.0;
    long long evaluations = 0;
};

struct MultiStudy {
    ExperimentConfig cfg;
    GridNetwork base;
    std::vector<MultiRow> rows;  // ordered by (k, algorithm, seed)
    // best plan per (k, algorithm), by damage then earliest repetition
    std::map<std::pair<int, std::string>, std::pair<AttackPlan, int>> best;  // -> (plan, rep)
};

/// Damage versus budget: every selected algorithm at every K in the range,
/// repeated with shared per-repetition seeds.
inline MultiStudy compute_multi_link_study(const ExperimentConfig& cfg) {
    MultiStudy study;
    study.cfg = cfg;
    study.base = detail::load_base_network(cfg);
    detail::check_algorithms(cfg.algorithms);
    if (cfg.repetitions < 1) throw ConfigError("repetitions must be positive");
    if (cfg.k_min < 1 || cfg.k_max < cfg.k_min) throw ConfigError("bad K range");
    if (cfg.k_max > study.base.link_count())
        throw ConfigError("K range exceeds the number of branches");

    struct RepResult {
        std::vector<MultiRow> rows;
        std::vector<std::pair<std::pair<int, std::string>, AttackPlan>> plans;
    };

    auto blocks = detail::parallel_reps<RepResult>(cfg.repetitions, cfg.threads, [&](int rep) {
        const std::uint64_t seed = detail::rep_seed(cfg, rep);
        const GridNetwork net = detail::rep_network(cfg, study.base, rep);
        const CapacityTable cap = compute_capacities(net, cfg.alpha, cfg.beta);
        CascadeEvaluator eval(net, cap);
        SwarmConfig swarm = cfg.swarm;
        swarm.seed = seed;

        RepResult result;
        for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
            const AttackProblem prob{net, cap, k, seed};
            for (const std::string& algorithm : cfg.algorithms) {
                AttackPlan plan;
                if (algorithm == "pso-oa")
                    plan = attack_pso_oa(prob, swarm, eval);
                else if (algorithm == "lc-ga")
                    plan = attack_lc_ga(prob, cfg.weights, cfg.top_fraction, eval);
                else
                    plan = attack_lc_oa(prob, swarm, eval).plan;
                result.rows.push_back({k, algorithm, seed, plan.damage, plan.evaluations});
                result.plans.emplace_back(std::make_pair(k, algorithm), std::move(plan));
            }
        }
        return result;
    });

    // Merge in repetition order; rows are regrouped by (k, algorithm).
    for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
        for (const std::string& algorithm : cfg.algorithms) {
            for (int rep = 0; rep < cfg.repetitions; ++rep) {
                const RepResult& block = blocks[static_cast<std::size_t>(rep)];
                for (std::size_t i = 0; i < block.rows.size(); ++i) {
                    if (block.rows[i].k != k || block.rows[i].algorithm != algorithm) continue;
                    study.rows.push_back(block.rows[i]);
                    const auto key = std::make_pair(k, algorithm);
                    auto it = study.best.find(key);
                    if (it == study.best.end() || block.plans[i].second.damage > it->second.first.damage)
                        study.best.insert_or_assign(key, std::make_pair(block.plans[i].second, rep));
                }
            }
        }
    }
    return study;
}

struct ConvergeRow {
    std::string algorithm;
    std::uint64_t seed = 0;
    int iteration = 0;  // 1-based
    double phi = 0.0;
};

struct ConvergeStudy {
    ExperimentConfig cfg;
    GridNetwork base;
    std::vector<ConvergeRow> rows;
};

/// Per-iteration global best damage for PSO-OA and LC-OA at a fixed K,
/// with shared seeds.
inline ConvergeStudy compute_convergence_study(const ExperimentConfig& cfg) {
    ConvergeStudy study;
    study.cfg = cfg;
    study.base = detail::load_base_network(cfg);
    if (cfg.repetitions < 1) throw ConfigError("repetitions must be positive");
    if (cfg.k < 1 || cfg.k > study.base.link_count()) throw ConfigError("bad K");

    auto blocks = detail::parallel_reps<std::vector<ConvergeRow>>(
        cfg.repetitions, cfg.threads, [&](int rep) {
            const std::uint64_t seed = detail::rep_seed(cfg, rep);
            const GridNetwork net = detail::rep_network(cfg, study.base, rep);
            const CapacityTable cap = compute_capacities(net, cfg.alpha, cfg.beta);
            CascadeEvaluator eval(net, cap);
            const AttackProblem prob{net, cap, cfg.k, seed};
            SwarmConfig swarm = cfg.swarm;
            swarm.seed = seed;

            std::vector<ConvergeRow> rows;
            const AttackPlan pso = attack_pso_oa(prob, swarm, eval);
            const AttackPlan lcoa = attack_lc_oa(prob, swarm, eval).plan;
            for (const AttackPlan* plan : {&pso, &lcoa})
                for (std::size_t i = 0; i < plan->trace.size(); ++i)
                    rows.push_back({plan->algorithm, seed, static_cast<int>(i) + 1, plan->trace[i]});
            return rows;
        });

    for (const std::string& algorithm : {std::string("pso-oa"), std::string("lc-oa")})
        for (auto& block : blocks)
            for (const ConvergeRow& row : block)
                if (row.algorithm == algorithm) study.rows.push_back(row);
    return study;
}

struct ScoreStudy {
    ExperimentConfig cfg;
    GridNetwork net;  // with generators assigned from base_seed
    std::vector<LinkScore> scores;
};

/// Link score table on the intact grid (one generator placement).
inline ScoreStudy compute_score_study(const ExperimentConfig& cfg) {
    ScoreStudy study;
    study.cfg = cfg;
    study.net = assign_generators(detail::load_base_network(cfg), cfg.generator_fraction,
                                  cfg.base_seed);
    study.scores = score_links(study.net, solve_flow(study.net), cfg.weights);
    return study;
}

// ---------------------------------------------------------------------------
// Rendering: deterministic text so `verify` can replay and byte-compare.

inline FileMap render_single(const SingleStudy& study) {
    std::string csv = detail::file_header(study.cfg);
    csv += "run,seed,strategy,link_id,link_from,link_to,phi,evaluations\n";
    for (const SingleRow& row : study.rows) {
        const Branch& br = study.base.branches[static_cast<std::size_t>(row.link)];
        csv += std::to_string(row.run) + "," + std::to_string(row.seed) + "," + row.strategy + "," +
               std::to_string(row.link) + "," +
               std::to_string(study.base.buses[static_cast<std::size_t>(br.from)].external_id) +
               "," +
               std::to_string(study.base.buses[static_cast<std::size_t>(br.to)].external_id) +
               "," + detail::format_double(row.phi) + "," + std::to_string(row.evaluations) + "\n";
    }
    for (const std::string& strategy : single_strategies()) {
        double sum = 0.0;
        long count = 0;
        for (const SingleRow& row : study.rows)
            if (row.strategy == strategy) {
                sum += row.phi;
                ++count;
            }
        csv += "mean,," + strategy + ",,,," + detail::format_double(sum / static_cast<double>(count)) +
               ",\n";
    }
    return {{"single.csv", std::move(csv)}};
}

inline FileMap render_multi(const MultiStudy& study) {
    FileMap files;
    std::string csv = detail::file_header(study.cfg);
    csv += "k,algorithm,seed,phi,evaluations\n";
    for (const MultiRow& row : study.rows)
        csv += std::to_string(row.k) + "," + row.algorithm + "," + std::to_string(row.seed) + "," +
               detail::format_double(row.phi) + "," + std::to_string(row.evaluations) + "\n";
    for (int k = study.cfg.k_min; k <= study.cfg.k_max; ++k) {
        for (const std::string& algorithm : study.cfg.algorithms) {
            double sum = 0.0;
            long count = 0;
            for (const MultiRow& row : study.rows)
                if (row.k == k && row.algorithm == algorithm) {
                    sum += row.phi;
                    ++count;
                }
            csv += std::to_string(k) + "," + algorithm + ",mean," +
                   detail::format_double(sum / static_cast<double>(count)) + ",\n";
        }
    }
    files.emplace("multi.csv", std::move(csv));

    for (const auto& [key, value] : study.best) {
        const auto& [plan, rep] = value;
        const GridNetwork net = detail::rep_network(study.cfg, study.base, rep);
        const CapacityTable cap = compute_capacities(net, study.cfg.alpha, study.cfg.beta);
        Json j;
        j["gridattack"] = kVersion;
        j["config"] = to_json(study.cfg);
        j["plan"] = plan_to_json(plan, study.base);
        j["report"] = report_to_json(simulate_cascade(net, cap, plan.links, {}));
        files.emplace("plan_k" + std::to_string(key.first) + "_" + key.second + ".json",
                      j.dump(2) + "\n");
    }
    return files;
}

inline FileMap render_converge(const ConvergeStudy& study) {
    std::string csv = detail::file_header(study.cfg);
    csv += "algorithm,seed,iteration,phi\n";
    for (const ConvergeRow& row : study.rows)
        csv += row.algorithm + "," + std::to_string(row.seed) + "," + std::to_string(row.iteration) +
               "," + detail::format_double(row.phi) + "\n";
    return {{"converge.csv", std::move(csv)}};
}

inline FileMap render_score(const ScoreStudy& study) {
    std::string csv = detail::file_header(study.cfg);
    csv += "link_id,from,to,degree,current,theta\n";
    for (const LinkScore& s : study.scores) {
        const Branch& br = study.net.branches[static_cast<std::size_t>(s.branch)];
        csv += std::to_string(s.branch) + "," +
               std::to_string(study.net.buses[static_cast<std::size_t>(br.from)].external_id) + "," +
               std::to_string(study.net.buses[static_cast<std::size_t>(br.to)].external_id) + "," +
               std::to_string(s.degree) + "," + detail::format_double(s.current_mag) + "," +
               detail::format_double(s.theta) + "\n";
    }
    return {{"score.csv", std::move(csv)}};
}

inline FileMap run_study(const ExperimentConfig& cfg) {
    if (cfg.study == "single") return render_single(compute_single_link_study(cfg));
    if (cfg.study == "multi") return render_multi(compute_multi_link_study(cfg));
    if (cfg.study == "converge") return render_converge(compute_convergence_study(cfg));
    if (cfg.study == "score") return render_score(compute_score_study(cfg));
    throw ConfigError("unknown study: " + cfg.study);
}

inline void write_files(const std::string& out_dir, const FileMap& files) {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, content] : files) {
        const std::filesystem::path path = std::filesystem::path(out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("cannot write file: " + path.string());
        out << content;
    }
}

struct VerifyResult {
    bool ok = false;
    std::string message;
};

/// Replays the experiment embedded in an output file's header and compares
/// the regenerated bytes with what is on disk.
inline VerifyResult verify_file(const std::string& path) {
    const std::string content = read_file(path);
    Json config_json;
    if (content.rfind("# gridattack", 0) == 0) {
        const std::string marker = "# config: ";
        const auto pos = content.find(marker);
        const auto end = content.find('\n', pos);
        if (pos == std::string::npos || end == std::string::npos)
            return {false, path + ": no embedded config header"};
        config_json = Json::parse(content.substr(pos + marker.size(), end - pos - marker.size()));
    } else {
        const Json j = Json::parse(content, nullptr, false);
        if (j.is_discarded() || !j.contains("config"))
            return {false, path + ": no embedded config"};
        config_json = j.at("config");
    }

    ExperimentConfig cfg;
    apply_json(cfg, config_json);
    const FileMap files = run_study(cfg);
    const std::string name = std::filesystem::path(path).filename().string();
    const auto it = files.find(name);
    if (it == files.end()) return {false, path + ": replay does not produce a file named " + name};
    if (it->second != content) return {false, path + ": replay differs from file contents"};
    return {true, path + ": verified, replay is bit-identical"};
}

}  // namespace gridattack
