// Experiment driver: seeded attack studies on power grid case files with
// machine-readable CSV/JSON outputs that the `verify` subcommand can replay
// bit-exactly.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gridattack/experiments.hpp"
#include "gridattack/version.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string case_path;
    std::string format = "auto";
    bool use_file_loads = false;
    double generator_fraction = 0.10;
    bool fixed_generators = false;
    std::uint64_t base_seed = 1;
    double alpha = 0.2;
    double beta = 0.2;
    int k = 1;
    int k_min = 1;
    int k_max = 5;
    int repetitions = 100;
    int particles = 10;
    int max_iterations = 30;
    double inertia0 = 0.96;
    double cognitive = 0.7;
    double social = 0.7;
    double velocity_clamp = 0.0;
    bool literal_position_update = false;
    double degree_weight = 1.0;
    double current_weight = 1.0;
    double top_fraction = 0.5;
    std::vector<std::string> algorithms;
    int threads = 0;
    std::string out_dir = "out";
};

void add_study_options(CLI::App* sub, CliOptions& opt) {
    sub->add_option("--config", opt.config_path, "JSON config file; explicit flags override it");
    sub->add_option("--case", opt.case_path, "case file (MATPOWER-style .m or IEEE CDF)");
    sub->add_option("--format", opt.format, "case format: auto, matpower, cdf")
        ->check(CLI::IsMember({"auto", "matpower", "cdf"}));
    sub->add_flag("--use-file-loads", opt.use_file_loads,
                  "take consumer demands from the case file's load column (per-unit)");
    sub->add_option("--gen-fraction", opt.generator_fraction,
                    "fraction of buses made generators (default 0.10)");
    sub->add_flag("--fixed-generators", opt.fixed_generators,
                  "use one generator placement for all repetitions");
    sub->add_option("--seed", opt.base_seed, "base seed; repetition r uses base+r");
    sub->add_option("--alpha", opt.alpha, "node safety margin (default 0.2)");
    sub->add_option("--beta", opt.beta, "link safety margin (default 0.2)");
    sub->add_option("--k", opt.k, "attack budget K");
    sub->add_option("--k-min", opt.k_min, "smallest K (multi study)");
    sub->add_option("--k-max", opt.k_max, "largest K (multi study)");
    sub->add_option("--reps", opt.repetitions, "independent repetitions (default 100)");
    sub->add_option("--particles", opt.particles, "swarm size m (default 10)");
    sub->add_option("--iters", opt.max_iterations, "swarm iterations (default 30)");
    sub->add_option("--w0", opt.inertia0, "initial inertia coefficient (default 0.96)");
    sub->add_option("--c1", opt.cognitive, "cognitive coefficient (default 0.7)");
    sub->add_option("--c2", opt.social, "social coefficient (default 0.7)");
    sub->add_option("--v-clamp", opt.velocity_clamp,
                    "velocity clamp; 0 disables (binary search defaults to 1)");
    sub->add_flag("--literal-position-update", opt.literal_position_update,
                  "position step adds the pre-update velocity");
    sub->add_option("--degree-weight", opt.degree_weight, "link score degree weight h1");
    sub->add_option("--current-weight", opt.current_weight, "link score current weight h2");
    sub->add_option("--top-fraction", opt.top_fraction, "LC-GA shortlist fraction (default 0.5)");
    sub->add_option("--algorithms", opt.algorithms,
                    "multi study algorithms (pso-oa, lc-ga, lc-oa)")
        ->delimiter(',');
    sub->add_option("--threads", opt.threads, "worker threads; 0 = hardware");
    sub->add_option("--out", opt.out_dir, "output directory (default ./out)");
}

gridattack::ExperimentConfig resolve(const CLI::App* sub, const CliOptions& opt) {
    gridattack::ExperimentConfig cfg;
    if (sub->count("--config"))
        gridattack::apply_json(cfg, gridattack::Json::parse(gridattack::read_file(opt.config_path)));

    const auto if_set = [&](const char* flag, auto apply) {
        if (sub->count(flag)) apply();
    };
    if_set("--case", [&] { cfg.case_path = opt.case_path; });
    if_set("--format", [&] {
        if (opt.format == "auto")
            cfg.format.reset();
        else
            cfg.format = opt.format == "matpower" ? gridattack::CaseFormat::Matpower
                                                  : gridattack::CaseFormat::Cdf;
    });
    if_set("--use-file-loads", [&] { cfg.use_file_loads = opt.use_file_loads; });
    if_set("--gen-fraction", [&] { cfg.generator_fraction = opt.generator_fraction; });
    if_set("--fixed-generators", [&] { cfg.fixed_generators = opt.fixed_generators; });
    if_set("--seed", [&] { cfg.base_seed = opt.base_seed; });
    if_set("--alpha", [&] { cfg.alpha = opt.alpha; });
    if_set("--beta", [&] { cfg.beta = opt.beta; });
    if_set("--k", [&] {
        cfg.k = opt.k;
        if (!sub->count("--k-min")) cfg.k_min = opt.k;
        if (!sub->count("--k-max")) cfg.k_max = opt.k;
    });
    if_set("--k-min", [&] { cfg.k_min = opt.k_min; });
    if_set("--k-max", [&] { cfg.k_max = opt.k_max; });
    if_set("--reps", [&] { cfg.repetitions = opt.repetitions; });
    if_set("--particles", [&] { cfg.swarm.particles = opt.particles; });
    if_set("--iters", [&] { cfg.swarm.max_iterations = opt.max_iterations; });
    if_set("--w0", [&] { cfg.swarm.inertia0 = opt.inertia0; });
    if_set("--c1", [&] { cfg.swarm.cognitive = opt.cognitive; });
    if_set("--c2", [&] { cfg.swarm.social = opt.social; });
    if_set("--v-clamp", [&] {
        if (opt.velocity_clamp > 0.0)
            cfg.swarm.velocity_clamp = opt.velocity_clamp;
        else
            cfg.swarm.velocity_clamp.reset();
    });
    if_set("--literal-position-update",
           [&] { cfg.swarm.literal_position_update = opt.literal_position_update; });
    if_set("--degree-weight", [&] { cfg.weights.degree_weight = opt.degree_weight; });
    if_set("--current-weight", [&] { cfg.weights.current_weight = opt.current_weight; });
    if_set("--top-fraction", [&] { cfg.top_fraction = opt.top_fraction; });
    if_set("--algorithms", [&] { cfg.algorithms = opt.algorithms; });
    if_set("--threads", [&] { cfg.threads = opt.threads; });
    cfg.study = sub->get_name();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"power grid cascade vulnerability assessment"};
    app.set_version_flag("--version", std::string("gridattack ") + gridattack::kVersion);
    app.require_subcommand(1);

    CliOptions opt;
    CLI::App* single = app.add_subcommand("single", "critical single-link comparison study");
    CLI::App* multi = app.add_subcommand("multi", "damage vs. attack budget K study");
    CLI::App* converge = app.add_subcommand("converge", "swarm convergence traces at fixed K");
    CLI::App* score = app.add_subcommand("score", "dump the link score table");
    for (CLI::App* sub : {single, multi, converge, score}) add_study_options(sub, opt);

    std::vector<std::string> verify_paths;
    CLI::App* verify = app.add_subcommand("verify", "replay output files and compare bit-exactly");
    verify->add_option("files", verify_paths, "output files to verify")->required();

    try {
        app.parse(argc, argv);

        if (verify->parsed()) {
            bool all_ok = true;
            for (const std::string& path : verify_paths) {
                const gridattack::VerifyResult result = gridattack::verify_file(path);
                std::cout << (result.ok ? "ok   " : "FAIL ") << result.message << "\n";
                all_ok = all_ok && result.ok;
            }
            return all_ok ? 0 : 1;
        }

        CLI::App* sub = app.get_subcommands().front();
        const gridattack::ExperimentConfig cfg = resolve(sub, opt);
        const gridattack::FileMap files = gridattack::run_study(cfg);
        gridattack::write_files(opt.out_dir, files);
        for (const auto& [name, content] : files)
            std::cout << "wrote " << opt.out_dir << "/" << name << " (" << content.size()
                      << " bytes)\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const gridattack::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const gridattack::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
