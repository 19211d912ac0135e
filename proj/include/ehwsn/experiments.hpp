// ============================================================================
// experiments.hpp -- figure reproduction runners and the validation report
//
// Every runner takes an ExperimentConfig and returns plain result structs plus
// a CsvTable view. Seeds:
//   channel draws for threshold design : cfg.seed (shared by all sweep points)
//   Monte Carlo for sweep point i       : mix_seed(cfg.seed ^ i, scheme stream)
// so a one-point sweep reproduces run_roc exactly.
// ============================================================================
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "ehwsn/battery.hpp"
#include "ehwsn/config.hpp"
#include "ehwsn/csv.hpp"
#include "ehwsn/network.hpp"
#include "ehwsn/optimizer.hpp"
#include "ehwsn/parallel.hpp"
#include "ehwsn/random.hpp"
#include "ehwsn/roc_simulation.hpp"

namespace ehwsn {

/// Threshold designs reported by the ROC and sweep runners.
enum class Design { SchemeI, SchemeIIGaussian, SchemeIILowSnr, SchemeICommon, SchemeIICommon };

inline const std::vector<Design>& all_designs() {
    static const std::vector<Design> d{Design::SchemeI, Design::SchemeIIGaussian, Design::SchemeIILowSnr,
                                       Design::SchemeICommon, Design::SchemeIICommon};
    return d;
}

inline std::string design_name(Design d) {
    switch (d) {
        case Design::SchemeI: return "I";
        case Design::SchemeIIGaussian: return "II-gaussian";
        case Design::SchemeIILowSnr: return "II-lowsnr";
        case Design::SchemeICommon: return "I-common";
        case Design::SchemeIICommon: return "II-common";
    }
    return "?";
}

/// Only scheme I (and its common variant) depend on the budget a.
inline bool design_depends_on_budget(Design d) { return d == Design::SchemeI || d == Design::SchemeICommon; }

inline OptimizationResult design_thresholds(const ThresholdEvaluator& ev, Design d, double a, KlMethod common_kl) {
    switch (d) {
        case Design::SchemeI: return scheme1_max_pd(ev, a);
        case Design::SchemeIIGaussian: return scheme2_max_kl(ev, KlMethod::Gaussian);
        case Design::SchemeIILowSnr: return scheme2_max_kl(ev, KlMethod::LowSnr);
        case Design::SchemeICommon: return common_threshold(ev, CommonObjective::Pd, a);
        case Design::SchemeIICommon: return common_threshold(ev, CommonObjective::KlTotal, a, common_kl);
    }
    throw DomainError("design_thresholds: unknown design");
}

inline std::uint64_t point_seed(std::uint64_t base, std::size_t index) { return base ^ static_cast<std::uint64_t>(index); }

// Every design sees the same Monte Carlo stream, so design differences are not
// swamped by independent sampling noise.
inline constexpr std::uint64_t kRocStream = 0xD0C0ULL;

/// Per-run metadata common to every table.
inline CsvTable make_table(std::vector<std::string> columns, const ExperimentConfig& cfg, const std::string& command) {
    CsvTable t(std::move(columns));
    t.meta("command", command);
    t.meta("config_hash", fmt_hex(config_hash(cfg)));
    t.meta("seed", std::to_string(cfg.seed));
    t.meta("channel_draws", std::to_string(cfg.channel_draws));
    return t;
}

inline std::vector<std::string> theta_columns(std::size_t K) {
    std::vector<std::string> out;
    for (std::size_t k = 1; k <= K; ++k) out.push_back("theta_" + std::to_string(k));
    return out;
}

// ----------------------------------------------------------------------------
// Battery distribution figure

struct BatteryCurve {
    std::string panel;  // "cdf" or "pmf"
    int capacity = 0;
    double p_e = 0.0;
    StationaryBattery battery;
    BatteryParams params;
};

struct BatteryFigure {
    std::vector<BatteryCurve> curves;
    CsvTable table{{}};
};

/// Chain parameters of sensor `k` at its reference threshold, with zeta from
/// the base network and the given capacity / harvest probability.
inline BatteryParams battery_params_for(const Network& net, std::size_t k, int capacity, double p_e) {
    const SensorParams& s = net.spec.sensors[k];
    const double theta =
        net.spec.reference_thetas.empty() ? default_reference_theta(s) : net.spec.reference_thetas[k];
    const NodeState node = evaluate_node(s.with_theta(theta), net.channels[k], capacity, p_e, net.spec.prior_h1);
    return BatteryParams{capacity, p_e, node.transmit_prob, node.consumption};
}

inline BatteryFigure run_battery_figure(const ExperimentConfig& cfg) {
    validate(cfg);
    const Network net = Network::solve(cfg.network);
    const auto& bf = cfg.battery_figure;
    BatteryFigure fig;
    auto add = [&](const std::string& panel, int capacity, double p_e) {
        BatteryCurve c;
        c.panel = panel;
        c.capacity = capacity;
        c.p_e = p_e;
        c.params = battery_params_for(net, bf.sensor, capacity, p_e);
        c.battery = stationary_pmf(c.params);
        fig.curves.push_back(std::move(c));
    };
    for (double p : bf.cdf_p_e) add("cdf", bf.cdf_capacity, p);
    add("pmf", bf.pmf_capacity, bf.pmf_p_e);

    fig.table = make_table({"panel", "capacity", "p_e", "state", "pmf", "cdf"}, cfg, "battery-dist");
    fig.table.meta("sensor", std::to_string(bf.sensor + 1));
    for (const auto& c : fig.curves) {
        const auto cdf = c.battery.cdf();
        for (std::size_t b = 0; b < c.battery.pmf.size(); ++b) {
            fig.table.row({c.panel, std::to_string(c.capacity), fmt_num(c.p_e), std::to_string(b),
                           fmt_num(c.battery.pmf[b]), fmt_num(cdf[b])});
        }
    }
    return fig;
}

// ----------------------------------------------------------------------------
// ROC and sweeps

struct DesignPoint {
    Design design = Design::SchemeI;
    double a = 0.0;
    std::vector<double> thetas;
    double objective = 0.0;  // P_D (scheme I family) or KL_tot (scheme II family)
    double pd_closed = 0.0;  // channel-averaged closed-form P_D
    double pd_closed_sd = 0.0;
    double pf_emp = 0.0;
    double pd_emp = 0.0;
    double pd_stderr = 0.0;
};

inline double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Runs every design at each budget: thresholds, closed-form P_D and an
/// end-to-end Monte Carlo ROC with the exact fusion LRT.
inline std::vector<DesignPoint> evaluate_designs(const ThresholdEvaluator& ev, const ExperimentConfig& cfg,
                                                 std::span<const double> budgets, std::uint64_t mc_seed,
                                                 std::uint64_t trials, unsigned threads) {
    const Network& net = ev.network();
    std::vector<DesignPoint> out;
    for (Design d : all_designs()) {
        MonteCarloOptions mc;
        mc.trials = trials;
        mc.seed = mix_seed(mc_seed, kRocStream);
        mc.threads = threads;

        auto fill = [&](const OptimizationResult& r, double a, const RocPoint& pt) {
            DesignPoint p;
            p.design = d;
            p.a = a;
            p.thetas = r.thetas;
            p.objective = r.objective;
            p.pd_closed = ev.pd(r.indices, a);
            p.pd_closed_sd = sample_sd(ev.pd_per_draw(r.indices, a));
            p.pf_emp = pt.p_f;
            p.pd_emp = pt.p_d;
            p.pd_stderr = pt.p_d_stderr;
            out.push_back(std::move(p));
        };

        if (design_depends_on_budget(d)) {
            for (double a : budgets) {
                const OptimizationResult r = design_thresholds(ev, d, a, cfg.kl_method);
                const auto nodes = net.nodes(r.thetas);
                const double one[] = {a};
                const EmpiricalRoc roc = monte_carlo_roc(nodes, net.spec.prior_h1, one, mc);
                fill(r, a, roc.points[0]);
            }
        } else {
            const OptimizationResult r = design_thresholds(ev, d, budgets.empty() ? 0.5 : budgets[0], cfg.kl_method);
            const auto nodes = net.nodes(r.thetas);
            const EmpiricalRoc roc = monte_carlo_roc(nodes, net.spec.prior_h1, budgets, mc);
            for (std::size_t i = 0; i < budgets.size(); ++i) fill(r, budgets[i], roc.points[i]);
        }
    }
    return out;
}

struct RocResult {
    Network network;
    std::vector<DesignPoint> points;
    CsvTable table{{}};

    /// Points of one design, in budget order.
    std::vector<DesignPoint> of(Design d) const {
        std::vector<DesignPoint> v;
        for (const auto& p : points)
            if (p.design == d) v.push_back(p);
        return v;
    }
};

inline void add_zeta_meta(CsvTable& t, const Network& net) {
    std::string z;
    for (std::size_t k = 0; k < net.size(); ++k) z += (k ? " " : "") + fmt_num(net.channels[k].zeta);
    t.meta("zeta", z);
}

inline std::vector<std::string> design_row(const DesignPoint& p) {
    std::vector<std::string> row{design_name(p.design), fmt_num(p.a)};
    for (double th : p.thetas) row.push_back(fmt_num(th));
    for (double v : {p.pf_emp, p.pd_closed, p.pd_emp, p.pd_stderr, p.pd_closed_sd, p.objective}) row.push_back(fmt_num(v));
    return row;
}

inline std::vector<std::string> design_columns(std::size_t K) {
    std::vector<std::string> cols{"scheme", "a"};
    for (auto& c : theta_columns(K)) cols.push_back(c);
    for (const char* c : {"P_F_emp", "P_D_closed", "P_D_emp", "stderr", "P_D_closed_sd", "objective"}) cols.push_back(c);
    return cols;
}

inline RocResult run_roc(const ExperimentConfig& cfg, unsigned threads = 0) {
    validate(cfg);
    RocResult res;
    res.network = Network::solve(cfg.network);
    const ThresholdEvaluator ev(res.network, cfg.grids(), cfg.channel_draws, cfg.seed, threads);
    res.points = evaluate_designs(ev, cfg, cfg.budgets, point_seed(cfg.seed, 0), cfg.sweep_trials, threads);
    res.table = make_table(design_columns(res.network.size()), cfg, "roc");
    res.table.meta("trials", std::to_string(cfg.sweep_trials));
    add_zeta_meta(res.table, res.network);
    for (const auto& p : res.points) res.table.row(design_row(p));
    return res;
}

enum class SweepAxis { Pav, Capacity };

inline std::string axis_name(SweepAxis a) { return a == SweepAxis::Pav ? "pav_db" : "capacity"; }

struct SweepPoint {
    double value = 0.0;  // P_av in dB or capacity
    std::vector<double> zetas;
    std::vector<DesignPoint> designs;

    const DesignPoint& at(Design d) const {
        for (const auto& p : designs)
            if (p.design == d) return p;
        throw DomainError("SweepPoint: design missing");
    }
};

struct SweepResult {
    SweepAxis axis = SweepAxis::Pav;
    std::vector<SweepPoint> points;
    CsvTable table{{}};
};

/// P_D versus P_av (zeta re-solved per point) or versus battery capacity
/// (zeta solved once at the base capacity, stationary pmf re-solved per point),
/// at the single budget cfg.false_alarm.
inline SweepResult run_sweep(const ExperimentConfig& cfg, SweepAxis axis, unsigned threads = 0) {
    validate(cfg);
    SweepResult res;
    res.axis = axis;
    std::vector<double> values;
    Network base;
    if (axis == SweepAxis::Pav) {
        values = cfg.pav_sweep_db;
    } else {
        for (int k : cfg.capacity_sweep) values.push_back(k);
        NetworkSpec spec = cfg.network;
        if (cfg.capacity_sweep_p_e) spec.p_e = *cfg.capacity_sweep_p_e;
        base = Network::solve(spec);
    }
    res.points.resize(values.size());
    const double budget[] = {cfg.false_alarm};
    // Points run concurrently; each point is single-threaded inside.
    const unsigned inner = values.size() > 1 ? 1 : threads;
    parallel_for(
        values.size(),
        [&](std::size_t i) {
            Network net;
            if (axis == SweepAxis::Pav) {
                NetworkSpec spec = cfg.network;
                spec.pav_target = db_to_linear(values[i]);
                net = Network::solve(spec);
            } else {
                net = base.with_capacity(static_cast<int>(values[i]));
            }
            const ThresholdEvaluator ev(net, cfg.grids(), cfg.channel_draws, cfg.seed, inner);
            SweepPoint& pt = res.points[i];
            pt.value = values[i];
            for (const auto& c : net.channels) pt.zetas.push_back(c.zeta);
            pt.designs = evaluate_designs(ev, cfg, budget, point_seed(cfg.seed, i), cfg.sweep_trials, inner);
        },
        values.size() > 1 ? threads : 1);

    const std::size_t K = cfg.sensors();
    std::vector<std::string> cols{axis_name(axis)};
    for (std::size_t k = 1; k <= K; ++k) cols.push_back("zeta_" + std::to_string(k));
    for (auto& c : design_columns(K)) cols.push_back(c);
    res.table = make_table(cols, cfg, std::string("sweep ") + (axis == SweepAxis::Pav ? "pav" : "capacity"));
    res.table.meta("trials", std::to_string(cfg.sweep_trials));
    if (axis == SweepAxis::Capacity) {
        res.table.meta("p_e", fmt_num(cfg.capacity_sweep_p_e.value_or(cfg.network.p_e)));
    }
    for (const auto& pt : res.points) {
        for (const auto& d : pt.designs) {
            std::vector<std::string> row{fmt_num(pt.value)};
            for (double z : pt.zetas) row.push_back(fmt_num(z));
            for (auto& c : design_row(d)) row.push_back(std::move(c));
            res.table.row(std::move(row));
        }
    }
    return res;
}

// ----------------------------------------------------------------------------
// Threshold optimization only

inline Scheme parse_scheme(const std::string& s) {
    if (s == "1") return Scheme::MaxPd;
    if (s == "2") return Scheme::MaxKl;
    if (s == "1c") return Scheme::MaxPdCommon;
    if (s == "2c") return Scheme::MaxKlCommon;
    throw ConfigError("scheme must be one of 1|2|1c|2c, got '" + s + "'");
}

struct OptimizeResult {
    Scheme scheme = Scheme::MaxPd;
    std::vector<double> budgets;
    std::vector<OptimizationResult> results;  // one per budget
    std::vector<double> pd_closed;
    CsvTable table{{}};
    nlohmann::json summary;
};

inline OptimizeResult run_optimize(const ExperimentConfig& cfg, Scheme scheme, unsigned threads = 0) {
    validate(cfg);
    const Network net = Network::solve(cfg.network);
    const ThresholdEvaluator ev(net, cfg.grids(), cfg.channel_draws, cfg.seed, threads);
    OptimizeResult res;
    res.scheme = scheme;
    res.budgets = cfg.budgets;
    std::optional<OptimizationResult> fixed;  // budget-independent schemes
    for (double a : cfg.budgets) {
        OptimizationResult r;
        switch (scheme) {
            case Scheme::MaxPd: r = scheme1_max_pd(ev, a); break;
            case Scheme::MaxPdCommon: r = common_threshold(ev, CommonObjective::Pd, a); break;
            case Scheme::MaxKl:
                if (!fixed) fixed = scheme2_max_kl(ev, cfg.kl_method);
                r = *fixed;
                break;
            case Scheme::MaxKlCommon:
                if (!fixed) fixed = common_threshold(ev, CommonObjective::KlTotal, a, cfg.kl_method);
                r = *fixed;
                break;
        }
        res.pd_closed.push_back(ev.pd(r.indices, a));
        res.results.push_back(std::move(r));
    }

    const std::size_t K = net.size();
    std::vector<std::string> cols{"scheme", "a"};
    for (auto& c : theta_columns(K)) cols.push_back(c);
    cols.push_back("objective");
    res.table = make_table(cols, cfg, "optimize " + scheme_tag(scheme));
    res.table.meta("objective", scheme == Scheme::MaxPd || scheme == Scheme::MaxPdCommon
                                    ? "P_D"
                                    : "KL_tot (" + kl_method_name(cfg.kl_method) + ")");
    add_zeta_meta(res.table, net);

    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t i = 0; i < res.results.size(); ++i) {
        const auto& r = res.results[i];
        std::vector<std::string> row{r.tag(), fmt_num(res.budgets[i])};
        for (double th : r.thetas) row.push_back(fmt_num(th));
        row.push_back(fmt_num(r.objective));
        res.table.row(std::move(row));
        nlohmann::json jr;
        jr["a"] = res.budgets[i];
        jr["thetas"] = r.thetas;
        jr["grid_indices"] = r.indices;
        jr["objective"] = r.objective;
        jr["pd_closed"] = res.pd_closed[i];
        jr["evaluations"] = r.evaluations;
        if (!r.non_identifiable.empty()) jr["non_identifiable"] = r.non_identifiable;
        runs.push_back(jr);
    }
    const ThresholdGrid g = cfg.grid();
    std::vector<double> zetas;
    for (const auto& c : net.channels) zetas.push_back(c.zeta);
    res.summary = {{"scheme", scheme_tag(scheme)},
                   {"kl_method", kl_method_name(cfg.kl_method)},
                   {"config_hash", fmt_hex(config_hash(cfg))},
                   {"seed", cfg.seed},
                   {"channel_draws", cfg.channel_draws},
                   {"grid", {{"lower", g.lower}, {"upper", g.upper}, {"points", g.count}}},
                   {"zeta", zetas},
                   {"runs", runs}};
    return res;
}

// ----------------------------------------------------------------------------
// Validation report

struct CheckRow {
    std::string check;
    double value = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;  // 0 with status INFO: diagnostic only
    std::string status;      // PASS, FAIL or INFO
};

struct ValidationReport {
    std::vector<CheckRow> rows;
    CsvTable table{{}};

    std::size_t failures() const {
        return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return r.status == "FAIL"; }));
    }
};

namespace detail {

inline void check_abs(std::vector<CheckRow>& rows, std::string name, double value, double reference, double tol) {
    const bool ok = std::abs(value - reference) <= tol;
    rows.push_back({std::move(name), value, reference, tol, ok ? "PASS" : "FAIL"});
}

inline void check_le(std::vector<CheckRow>& rows, std::string name, double value, double bound) {
    rows.push_back({std::move(name), value, bound, 0.0, value <= bound ? "PASS" : "FAIL"});
}

inline void info(std::vector<CheckRow>& rows, std::string name, double value, double reference) {
    rows.push_back({std::move(name), value, reference, 0.0, "INFO"});
}

}  // namespace detail

/// Five thresholds per sensor around the midpoint of the conditional means.
inline std::vector<double> validation_thetas(const SensorParams& s) {
    const double sd0 = s.sigma_w2 * std::sqrt(2.0 / s.samples);
    const double mid = default_reference_theta(s);
    std::vector<double> out;
    for (double z : {-1.0, -0.5, 0.0, 0.5, 1.0}) out.push_back(mid + z * sd0);
    return out;
}

inline ValidationReport run_validation(const ExperimentConfig& cfg, unsigned threads = 0) {
    using detail::check_abs;
    using detail::check_le;
    using detail::info;
    validate(cfg);
    ValidationReport rep;
    auto& rows = rep.rows;
    const Network net = Network::solve(cfg.network);
    const std::size_t K = net.size();
    const std::uint64_t n = cfg.validation_trials;

    // Local detector: P_f / P_d against direct simulation of Lambda.
    std::vector<std::vector<std::uint64_t>> hits(2 * K);
    parallel_for(
        2 * K,
        [&](std::size_t job) {
            const std::size_t k = job / 2;
            const Hypothesis h = job % 2 ? Hypothesis::H1 : Hypothesis::H0;
            const auto thetas = validation_thetas(net.spec.sensors[k]);
            Rng rng = make_rng(cfg.seed, 0x5E750000ULL + job);
            std::vector<std::uint64_t> count(thetas.size(), 0);
            for (std::uint64_t t = 0; t < n; ++t) {
                const double s = sample_statistic(net.spec.sensors[k], h, rng);
                for (std::size_t i = 0; i < thetas.size(); ++i) count[i] += s > thetas[i];
            }
            hits[job] = std::move(count);
        },
        threads);
    for (std::size_t k = 0; k < K; ++k) {
        const auto thetas = validation_thetas(net.spec.sensors[k]);
        for (std::size_t i = 0; i < thetas.size(); ++i) {
            const SensorParams s = net.spec.sensors[k].with_theta(thetas[i]);
            const double pf = local_pf(s), pd = local_pd(s);
            const std::string tag = "sensor" + std::to_string(k + 1) + " theta=" + fmt_num(thetas[i]);
            const double ef = static_cast<double>(hits[2 * k][i]) / n;
            const double ed = static_cast<double>(hits[2 * k + 1][i]) / n;
            check_abs(rows, "local_pf " + tag, ef, pf, 3.0 * std::sqrt(pf * (1 - pf) / n));
            check_abs(rows, "local_pd " + tag, ed, pd, 3.0 * std::sqrt(pd * (1 - pd) / n));
        }
    }

    // Battery chain: stationary pmf against simulation.
    const auto& bf = cfg.battery_figure;
    struct Panel {
        int capacity;
        double p_e;
    };
    std::vector<Panel> panels;
    for (double p : bf.cdf_p_e) panels.push_back({bf.cdf_capacity, p});
    panels.push_back({bf.pmf_capacity, bf.pmf_p_e});
    std::vector<std::vector<CheckRow>> panel_rows(panels.size());
    parallel_for(
        panels.size(),
        [&](std::size_t i) {
            const BatteryParams bp = battery_params_for(net, bf.sensor, panels[i].capacity, panels[i].p_e);
            const StationaryBattery st = stationary_pmf(bp);
            Rng rng = make_rng(cfg.seed, 0xBA77000ULL + i);
            const ChainSimulation sim = simulate_chain(bp, bf.simulation_steps, 100000, rng);
            const std::string tag = "K=" + std::to_string(panels[i].capacity) + " p_e=" + fmt_num(panels[i].p_e);
            auto& r = panel_rows[i];
            check_le(r, "battery tv " + tag, total_variation(st.pmf, sim.pmf), 0.01);
            check_abs(r, "battery cdf_end " + tag, st.cdf().back(), 1.0, 1e-10);
            info(r, "battery rho chain_vs_sim " + tag, rho(st, bp.consumption.conditioned()), sim.empirical_rho());
            check_le(r, "battery feasibility_violations " + tag, sim.feasibility_violated ? 1.0 : 0.0, 0.0);
        },
        threads);
    for (auto& r : panel_rows) rows.insert(rows.end(), r.begin(), r.end());
    {
        std::vector<std::vector<double>> cdfs;
        for (std::size_t i = 0; i + 1 < panels.size(); ++i) {
            cdfs.push_back(stationary_pmf(battery_params_for(net, bf.sensor, panels[i].capacity, panels[i].p_e)).cdf());
        }
        double worst = 0.0;  // max over states of CDF(higher p_e) - CDF(lower p_e)
        for (std::size_t i = 1; i < cdfs.size(); ++i)
            for (std::size_t b = 0; b < cdfs[i].size(); ++b) worst = std::max(worst, cdfs[i][b] - cdfs[i - 1][b]);
        check_le(rows, "battery cdf_ordering_in_p_e", worst, 1e-12);
    }

    // Average energy: solved constraint and quadrature variants.
    for (std::size_t k = 0; k < K; ++k) {
        const auto& z = net.zetas[k];
        const std::string tag = "sensor" + std::to_string(k + 1);
        check_abs(rows, "pav solved " + tag, pav_formula(net.channels[k], z.alpha), net.spec.pav_target,
                  1e-6 * net.spec.pav_target);
        info(rows, "pav oracle ceil^1 " + tag, pav_oracle(net.channels[k], z.alpha, 1, false), z.pav);
        info(rows, "pav oracle ceil^2 " + tag, pav_oracle(net.channels[k], z.alpha, 2, false), z.pav);
        info(rows, "pav oracle ceil^2 conditioned " + tag, pav_oracle(net.channels[k], z.alpha, 2, true), z.pav);
    }

    // Fusion: closed form against Monte Carlo at the scheme I design.
    const ThresholdEvaluator ev(net, cfg.grids(), cfg.channel_draws, cfg.seed, threads);
    const double a = cfg.false_alarm;
    const OptimizationResult s1 = scheme1_max_pd(ev, a);
    std::vector<OperatingPoint> ops;
    for (std::size_t k = 0; k < K; ++k) ops.push_back(ev.op(k, s1.indices[k]));
    {
        const ChannelDraw& draw = ev.channel_draws().front();
        const auto perf = closed_form_pf_pd(draw, ops, net.sigma_n2(), a);
        MonteCarloOptions mc;
        mc.trials = n;
        mc.seed = mix_seed(cfg.seed, 0xF1DULL);
        mc.statistic = FusionStatistic::Linearized;
        mc.threads = threads;
        const double one[] = {a};
        const auto roc = monte_carlo_fixed_draw(draw, ops, net.sigma_n2(), one, mc);
        info(rows, "fusion fixed_draw linearized P_D emp_vs_closed", roc.points[0].p_d, perf.p_d);
        mc.statistic = FusionStatistic::Exact;
        const auto roc_exact = monte_carlo_fixed_draw(draw, ops, net.sigma_n2(), one, mc);
        info(rows, "fusion fixed_draw exact_lrt P_D emp_vs_closed", roc_exact.points[0].p_d, perf.p_d);
        check_le(rows, "fusion closed_form P_F_minus_a", std::abs(perf.p_f - a), 1e-9);
    }
    {
        MonteCarloOptions mc;
        mc.trials = n;
        mc.seed = mix_seed(cfg.seed, 0xE2EULL);
        mc.threads = threads;
        const auto nodes = net.nodes(s1.thetas);
        const double one[] = {a};
        const auto roc = monte_carlo_roc(nodes, net.spec.prior_h1, one, mc);
        info(rows, "fusion end_to_end exact_lrt P_D emp_vs_closed", roc.points[0].p_d, ev.pd(s1.indices, a));
    }
    {
        // Closed-form ROC properties over the budget list at the scheme I design.
        double worst_gap = 0.0, worst_drop = 0.0, prev = 0.0;
        for (std::size_t i = 0; i < cfg.budgets.size(); ++i) {
            const double pd = ev.pd(s1.indices, cfg.budgets[i]);
            worst_gap = std::max(worst_gap, cfg.budgets[i] - pd);
            if (i) worst_drop = std::max(worst_drop, prev - pd);
            prev = pd;
        }
        check_le(rows, "fusion closed_form P_F_minus_P_D", worst_gap, 0.0);
        check_le(rows, "fusion closed_form P_D_decrease_in_a", worst_drop, 0.0);
    }

    // KL approximations against the exact divergence, channel-averaged.
    const OptimizationResult s2 = scheme2_max_kl(ev, KlMethod::Gaussian);
    for (std::size_t k = 0; k < K; ++k) {
        const std::string tag = "sensor" + std::to_string(k + 1);
        const auto exact = ev.kl_table(k, KlMethod::Exact);
        const auto gauss = ev.kl_table(k, KlMethod::Gaussian);
        const auto low = ev.kl_table(k, KlMethod::LowSnr);
        const int j = s2.indices[k];
        info(rows, "kl gaussian_vs_exact at II theta " + tag, gauss[j], exact[j]);
        info(rows, "kl lowsnr_vs_exact at II theta " + tag, low[j], exact[j]);
        const int je = detail::argmax_first(exact);
        info(rows, "kl argmax_theta gaussian_vs_exact " + tag, ev.grid(k).at(detail::argmax_first(gauss)), ev.grid(k).at(je));
        info(rows, "kl argmax_theta lowsnr_vs_exact " + tag, ev.grid(k).at(detail::argmax_first(low)), ev.grid(k).at(je));
        double negative = 0.0;
        for (double v : exact) negative = std::min(negative, v);
        check_le(rows, "kl exact nonnegative " + tag, -negative, 1e-10);
    }

    rep.table = make_table({"check", "value", "reference", "tolerance", "status"}, cfg, "validate");
    rep.table.meta("trials", std::to_string(n));
    add_zeta_meta(rep.table, net);
    for (const auto& r : rows) rep.table.row({r.check, fmt_num(r.value), fmt_num(r.reference), fmt_num(r.tolerance), r.status});
    return rep;
}

}  // namespace ehwsn
