// ============================================================================
// cli.hpp -- command-line front end (tools/ehwsn.cpp is a thin main)
//
// Exit codes: 0 success, 1 failed validation checks or unexpected error,
// 2 bad usage or invalid config, 3 numerical non-convergence.
// ============================================================================
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ehwsn/config.hpp"
#include "ehwsn/errors.hpp"
#include "ehwsn/experiments.hpp"

namespace ehwsn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitConvergence = 3;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::optional<std::uint64_t> trials;
    unsigned threads = 0;
};

inline ExperimentConfig effective_config(const CommonOptions& o) {
    ExperimentConfig cfg = o.config_path.empty() ? paper_config() : load_config(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.trials) {
        cfg.validation_trials = *o.trials;
        cfg.sweep_trials = *o.trials;
    }
    validate(cfg);
    return cfg;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << j.dump(2) << "\n";
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Distributed detection in energy-harvesting sensor networks"};
    app.require_subcommand(1);
    CommonOptions opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "experiment config (JSON); built-in three-sensor setup if omitted")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "override the config seed");
        sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
        sub->add_option("--trials", opt.trials, "override Monte Carlo trial counts")->check(CLI::PositiveNumber);
        sub->add_option("--threads", opt.threads, "worker threads (0 = all cores)")->capture_default_str();
    };

    auto* battery = app.add_subcommand("battery-dist", "stationary battery pmf/CDF tables");
    auto* roc = app.add_subcommand("roc", "ROC points for every threshold design");
    auto* sweep = app.add_subcommand("sweep", "P_D versus P_av or battery capacity");
    std::string axis;
    sweep->add_option("--axis", axis, "sweep axis")->required()->check(CLI::IsMember({"pav", "capacity"}));
    auto* optimize = app.add_subcommand("optimize", "local threshold optimization");
    std::string scheme;
    optimize->add_option("--scheme", scheme, "1 = max P_D, 2 = max KL, 1c/2c = common threshold")
        ->required()
        ->check(CLI::IsMember({"1", "2", "1c", "2c"}));
    auto* validate_cmd = app.add_subcommand("validate", "closed forms versus oracles report");
    for (auto* sub : {battery, roc, sweep, optimize, validate_cmd}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const ExperimentConfig cfg = effective_config(opt);
        const std::filesystem::path dir = opt.out_dir;
        std::filesystem::path written;
        int status = kExitOk;
        if (battery->parsed()) {
            written = run_battery_figure(cfg).table.write(dir, "battery_distribution");
        } else if (roc->parsed()) {
            written = run_roc(cfg, opt.threads).table.write(dir, "roc");
        } else if (sweep->parsed()) {
            const SweepAxis ax = axis == "pav" ? SweepAxis::Pav : SweepAxis::Capacity;
            written = run_sweep(cfg, ax, opt.threads).table.write(dir, "sweep_" + axis);
        } else if (optimize->parsed()) {
            const OptimizeResult r = run_optimize(cfg, parse_scheme(scheme), opt.threads);
            written = r.table.write(dir, "optimize_" + scheme);
            write_json(dir / ("optimize_" + scheme + "_summary.json"), r.summary);
        } else if (validate_cmd->parsed()) {
            const ValidationReport rep = run_validation(cfg, opt.threads);
            written = rep.table.write(dir, "validation");
            if (rep.failures() > 0) {
                err << rep.failures() << " of " << rep.rows.size() << " validation checks failed\n";
                status = kExitFailed;
            }
        }
        out << written.string() << "\n";
        return status;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConvergenceError& e) {
        err << "non-convergence: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailed;
    }
}

}  // namespace ehwsn::cli
