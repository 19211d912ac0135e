// ============================================================================
// optimizer.hpp -- local threshold selection
//
// Scheme I   : maximize the channel-averaged closed-form P_D (K-dim search)
// Scheme II  : maximize KL_tot = sum_k KL_k (K independent 1-D searches)
// *-common   : one theta shared by all sensors (1-D search)
//
// All objectives are evaluated over one fixed set of channel draws (common
// random numbers) so argmax comparisons carry no Monte Carlo noise.
// ============================================================================
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ehwsn/fusion.hpp"
#include "ehwsn/network.hpp"
#include "ehwsn/parallel.hpp"
#include "ehwsn/random.hpp"
#include "ehwsn/specfun.hpp"

namespace ehwsn {

struct ThresholdGrid {
    double lower = 0.0;
    double upper = 1.0;
    int count = 200;

    void validate() const {
        if (!(lower >= 0.0)) throw DomainError("ThresholdGrid: lower must be >= 0");
        if (!(upper > lower)) throw DomainError("ThresholdGrid: upper must exceed lower");
        if (count < 2) throw DomainError("ThresholdGrid: count must be >= 2");
    }

    double at(int j) const { return lower + (upper - lower) * j / (count - 1); }

    std::vector<double> values() const {
        std::vector<double> v(count);
        for (int j = 0; j < count; ++j) v[j] = at(j);
        return v;
    }

    bool operator==(const ThresholdGrid&) const = default;
};

/// Upper end of the useful theta range: six H1 standard deviations above the
/// H1 mean of Lambda. Beyond it both P_f and P_d are numerically zero.
inline double useful_theta_upper(const SensorParams& s) {
    const double n = s.samples;
    const double mean_h1 = s.sigma_w2 + s.eta() / n;
    const double sd_h1 = s.sigma_w2 * std::sqrt(2.0 * (n + 2.0 * s.eta() / s.sigma_w2)) / n;
    return mean_h1 + 6.0 * sd_h1;
}

inline ThresholdGrid default_grid(const SensorParams& s, int count = 200) {
    return ThresholdGrid{0.0, useful_theta_upper(s), count};
}

/// One grid covering every sensor's useful range; required by the common-theta schemes.
inline ThresholdGrid shared_grid(std::span<const SensorParams> sensors, int count = 200) {
    double upper = 0.0;
    for (const auto& s : sensors) upper = std::max(upper, useful_theta_upper(s));
    return ThresholdGrid{0.0, upper, count};
}

enum class Scheme { MaxPd, MaxKl, MaxPdCommon, MaxKlCommon };
enum class KlMethod { Gaussian, LowSnr, Exact };
enum class SearchMode { Auto, Exhaustive, CoordinateAscent };

inline std::string scheme_tag(Scheme s) {
    switch (s) {
        case Scheme::MaxPd: return "I";
        case Scheme::MaxKl: return "II";
        case Scheme::MaxPdCommon: return "I-common";
        case Scheme::MaxKlCommon: return "II-common";
    }
    return "?";
}

inline std::string kl_method_name(KlMethod m) {
    switch (m) {
        case KlMethod::Gaussian: return "gaussian";
        case KlMethod::LowSnr: return "lowsnr";
        case KlMethod::Exact: return "exact";
    }
    return "?";
}

struct OptimizationResult {
    Scheme scheme = Scheme::MaxPd;
    std::vector<int> indices;
    std::vector<double> thetas;
    double objective = 0.0;
    std::uint64_t evaluations = 0;
    double wall_seconds = 0.0;
    std::vector<bool> non_identifiable;  // scheme II: KL_k flat over the grid

    std::string tag() const { return scheme_tag(scheme); }
};

/// Per-grid-point operating points and per-draw moment terms for a network.
class ThresholdEvaluator {
public:
    static constexpr std::uint64_t kChannelStream = 0xC4A77E1ULL;

    ThresholdEvaluator(const Network& net, std::vector<ThresholdGrid> grids, std::size_t channel_draws,
                       std::uint64_t seed, unsigned threads = 0)
        : net_(net), grids_(std::move(grids)), threads_(threads) {
        if (grids_.size() != net_.size()) throw DomainError("ThresholdEvaluator: one grid per sensor required");
        if (channel_draws < 1) throw DomainError("ThresholdEvaluator: channel_draws must be >= 1");
        for (const auto& g : grids_) g.validate();
        const std::size_t K = net_.size();

        Rng rng = make_rng(seed, kChannelStream);
        for (std::size_t d = 0; d < channel_draws; ++d) draws_.push_back(draw_channels(net_.channels, rng));

        ops_.resize(K);
        std::vector<std::pair<std::size_t, int>> jobs;
        for (std::size_t k = 0; k < K; ++k) {
            ops_[k].resize(grids_[k].count);
            for (int j = 0; j < grids_[k].count; ++j) jobs.emplace_back(k, j);
        }
        parallel_for(
            jobs.size(),
            [&](std::size_t i) {
                const auto [k, j] = jobs[i];
                ops_[k][j] = net_.node(k, grids_[k].at(j)).op;
            },
            threads_);

        const std::size_t D = draws_.size();
        terms_.resize(K);
        for (std::size_t k = 0; k < K; ++k) {
            const double s2 = net_.channels[k].sigma_n2;
            terms_[k].resize(static_cast<std::size_t>(grids_[k].count) * D);
            for (int j = 0; j < grids_[k].count; ++j) {
                const OperatingPoint& op = ops_[k][j];
                for (std::size_t d = 0; d < D; ++d) {
                    const double c = draws_[d].c[k];
                    const double gap = op.alpha - op.beta;
                    const double nu = c * gap / s2;
                    Terms& t = terms_[k][j * D + d];
                    t.v0 = nu * nu * (c * c * op.beta * (1.0 - op.beta) + s2);
                    t.v1 = nu * nu * (c * c * op.alpha * (1.0 - op.alpha) + s2);
                    t.gap = nu * c * gap;
                }
            }
        }
    }

    std::size_t sensors() const { return net_.size(); }
    std::size_t draws() const { return draws_.size(); }
    const ThresholdGrid& grid(std::size_t k) const { return grids_.at(k); }
    const std::vector<ChannelDraw>& channel_draws() const { return draws_; }
    const OperatingPoint& op(std::size_t k, int j) const { return ops_.at(k).at(j); }
    const Network& network() const { return net_; }
    unsigned threads() const { return threads_; }

    std::vector<double> thetas(std::span<const int> idx) const {
        std::vector<double> out;
        for (std::size_t k = 0; k < idx.size(); ++k) out.push_back(grids_[k].at(idx[k]));
        return out;
    }

    /// Channel-averaged closed-form P_D at grid indices idx and budget a.
    double pd(std::span<const int> idx, double a) const {
        const std::size_t D = draws_.size();
        std::vector<double> v0(D, 0.0), v1(D, 0.0), gap(D, 0.0);
        for (std::size_t k = 0; k < idx.size(); ++k) accumulate(k, idx[k], v0, v1, gap);
        return average_pd(v0, v1, gap, nullptr, specfun::gaussian_q_inv(a), a);
    }

    /// Per-draw closed-form P_D values (for spread diagnostics).
    std::vector<double> pd_per_draw(std::span<const int> idx, double a) const {
        std::vector<double> out;
        for (const auto& draw : draws_) {
            std::vector<OperatingPoint> ops;
            for (std::size_t k = 0; k < idx.size(); ++k) ops.push_back(ops_[k][idx[k]]);
            out.push_back(closed_form_pf_pd(draw, ops, net_.sigma_n2(), a).p_d);
        }
        return out;
    }

    /// Channel-averaged KL_k over the grid of sensor k.
    std::vector<double> kl_table(std::size_t k, KlMethod method) const {
        const double s2 = net_.channels[k].sigma_n2;
        std::vector<double> out(grids_[k].count, 0.0);
        parallel_for(
            out.size(),
            [&](std::size_t j) {
                const OperatingPoint& op = ops_[k][j];
                double sum = 0.0;
                for (const auto& draw : draws_) sum += kl_value(draw.c[k], op, s2, method);
                out[j] = sum / static_cast<double>(draws_.size());
            },
            method == KlMethod::Exact ? threads_ : 1);
        return out;
    }

    static double kl_value(double c, const OperatingPoint& op, double s2, KlMethod method) {
        switch (method) {
            case KlMethod::Gaussian: {
                const double var0 = c * c * op.beta * (1.0 - op.beta) + s2;
                const double var1 = c * c * op.alpha * (1.0 - op.alpha) + s2;
                return kl_gaussian_approx(c * op.beta, var0, c * op.alpha, var1);
            }
            case KlMethod::LowSnr: return kl_lowsnr_approx(c, op.alpha, op.beta, s2);
            case KlMethod::Exact: return kl_true(c, op.alpha, op.beta, s2).value;
        }
        return 0.0;
    }

    // Scheme I exhaustive search; defined below.
    OptimizationResult exhaustive_max_pd(double a) const;

private:
    struct Terms {
        double v0, v1, gap;
    };

    void accumulate(std::size_t k, int j, std::vector<double>& v0, std::vector<double>& v1,
                    std::vector<double>& gap) const {
        const std::size_t D = draws_.size();
        const Terms* t = &terms_[k][static_cast<std::size_t>(j) * D];
        for (std::size_t d = 0; d < D; ++d) {
            v0[d] += t[d].v0;
            v1[d] += t[d].v1;
            gap[d] += t[d].gap;
        }
    }

    // Average P_D over draws given partial sums, optionally adding one more sensor's terms.
    double average_pd(const std::vector<double>& v0, const std::vector<double>& v1, const std::vector<double>& gap,
                      const Terms* extra, double z, double a) const {
        const std::size_t D = draws_.size();
        double sum = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
            double s0 = v0[d], s1 = v1[d], g = gap[d];
            if (extra) {
                s0 += extra[d].v0;
                s1 += extra[d].v1;
                g += extra[d].gap;
            }
            if (s1 <= 0.0) {
                sum += a;
                continue;
            }
            sum += specfun::gaussian_q((z * std::sqrt(s0) - g) / std::sqrt(s1));
        }
        return sum / static_cast<double>(D);
    }

    void search_level(std::size_t level, std::vector<int>& idx, const std::vector<double>& v0,
                      const std::vector<double>& v1, const std::vector<double>& gap, double z, double a,
                      double& best, std::vector<int>& best_idx) const {
        const std::size_t K = net_.size();
        const std::size_t D = draws_.size();
        if (level + 1 == K) {
            for (int j = 0; j < grids_[level].count; ++j) {
                const double v = average_pd(v0, v1, gap, &terms_[level][static_cast<std::size_t>(j) * D], z, a);
                if (v > best) {
                    best = v;
                    idx[level] = j;
                    best_idx = idx;
                }
            }
            return;
        }
        std::vector<double> n0, n1, ng;
        for (int j = 0; j < grids_[level].count; ++j) {
            idx[level] = j;
            n0 = v0;
            n1 = v1;
            ng = gap;
            accumulate(level, j, n0, n1, ng);
            search_level(level + 1, idx, n0, n1, ng, z, a, best, best_idx);
        }
    }

    Network net_;
    std::vector<ThresholdGrid> grids_;
    unsigned threads_ = 0;
    std::vector<ChannelDraw> draws_;
    std::vector<std::vector<OperatingPoint>> ops_;
    std::vector<std::vector<Terms>> terms_;  // [k][j * D + d]
};

inline OptimizationResult ThresholdEvaluator::exhaustive_max_pd(double a) const {
    const std::size_t K = net_.size();
    const std::size_t D = draws_.size();
    const double z = specfun::gaussian_q_inv(a);
    const int first = grids_[0].count;

    struct Slot {
        double best = -std::numeric_limits<double>::infinity();
        std::vector<int> idx;
    };
    std::vector<Slot> slots(first);
    parallel_for(
        static_cast<std::size_t>(first),
        [&](std::size_t j0) {
            std::vector<double> v0(D, 0.0), v1(D, 0.0), gap(D, 0.0);
            std::vector<int> idx(K, 0);
            idx[0] = static_cast<int>(j0);
            Slot& s = slots[j0];
            if (K == 1) {
                s.best = average_pd(v0, v1, gap, &terms_[0][j0 * D], z, a);
                s.idx = idx;
                return;
            }
            accumulate(0, static_cast<int>(j0), v0, v1, gap);
            search_level(1, idx, v0, v1, gap, z, a, s.best, s.idx);
        },
        threads_);

    OptimizationResult r;
    r.scheme = Scheme::MaxPd;
    r.objective = -std::numeric_limits<double>::infinity();
    for (const Slot& s : slots) {
        if (s.best > r.objective) {
            r.objective = s.best;
            r.indices = s.idx;
        }
    }
    r.evaluations = 1;
    for (std::size_t k = 0; k < K; ++k) r.evaluations *= static_cast<std::uint64_t>(grids_[k].count);
    r.thetas = thetas(r.indices);
    return r;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// First index of the maximum (ties go to the smallest theta).
inline int argmax_first(const std::vector<double>& v) {
    int best = 0;
    for (int j = 1; j < static_cast<int>(v.size()); ++j)
        if (v[j] > v[best]) best = j;
    return best;
}

}  // namespace detail

inline constexpr std::size_t kMaxExhaustiveSensors = 6;

/// Scheme I: maximize the channel-averaged closed-form P_D at budget a.
inline OptimizationResult scheme1_max_pd(const ThresholdEvaluator& ev, double a, SearchMode mode = SearchMode::Auto) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t K = ev.sensors();
    if (mode == SearchMode::Exhaustive && K > kMaxExhaustiveSensors) {
        throw DomainError("scheme1_max_pd: exhaustive search limited to " + std::to_string(kMaxExhaustiveSensors) +
                          " sensors (got " + std::to_string(K) + ")");
    }
    const bool exhaustive = mode == SearchMode::Exhaustive || (mode == SearchMode::Auto && K <= kMaxExhaustiveSensors);
    if (exhaustive) {
        OptimizationResult r = ev.exhaustive_max_pd(a);
        r.wall_seconds = detail::seconds_since(t0);
        return r;
    }

    // Coordinate ascent: round-robin 1-D scans, moving only on strict improvement.
    OptimizationResult r;
    r.scheme = Scheme::MaxPd;
    r.indices.assign(K, 0);
    for (std::size_t k = 0; k < K; ++k) r.indices[k] = ev.grid(k).count / 2;
    double current = ev.pd(r.indices, a);
    r.evaluations = 1;
    constexpr int kMaxSweeps = 20;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool moved = false;
        for (std::size_t k = 0; k < K; ++k) {
            std::vector<int> trial = r.indices;
            for (int j = 0; j < ev.grid(k).count; ++j) {
                trial[k] = j;
                const double v = ev.pd(trial, a);
                ++r.evaluations;
                if (v > current) {
                    current = v;
                    r.indices[k] = j;
                    moved = true;
                }
            }
        }
        if (!moved) break;
    }
    r.objective = current;
    r.thetas = ev.thetas(r.indices);
    r.wall_seconds = detail::seconds_since(t0);
    return r;
}

/// Scheme II: independent 1-D scans of the channel-averaged KL_k.
inline OptimizationResult scheme2_max_kl(const ThresholdEvaluator& ev, KlMethod method = KlMethod::Gaussian) {
    const auto t0 = std::chrono::steady_clock::now();
    OptimizationResult r;
    r.scheme = Scheme::MaxKl;
    for (std::size_t k = 0; k < ev.sensors(); ++k) {
        const std::vector<double> table = ev.kl_table(k, method);
        r.evaluations += table.size();
        const auto [lo, hi] = std::minmax_element(table.begin(), table.end());
        // Rounding in P_d - P_f leaves ~1e-14 noise when a sensor sees no signal.
        const bool flat = *hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi));
        const int j = flat ? 0 : detail::argmax_first(table);
        r.indices.push_back(j);
        r.non_identifiable.push_back(flat);
        r.objective += table[j];
    }
    r.thetas = ev.thetas(r.indices);
    r.wall_seconds = detail::seconds_since(t0);
    return r;
}

enum class CommonObjective { Pd, KlTotal };

/// One theta shared by all sensors, chosen by a 1-D scan of the objective.
inline OptimizationResult common_threshold(const ThresholdEvaluator& ev, CommonObjective objective, double a = 0.5,
                                           KlMethod method = KlMethod::Gaussian) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t K = ev.sensors();
    for (std::size_t k = 1; k < K; ++k) {
        if (!(ev.grid(k) == ev.grid(0))) throw DomainError("common_threshold: sensors must share one grid");
    }
    const int G = ev.grid(0).count;
    std::vector<double> values(G, 0.0);
    OptimizationResult r;
    if (objective == CommonObjective::Pd) {
        r.scheme = Scheme::MaxPdCommon;
        for (int j = 0; j < G; ++j) values[j] = ev.pd(std::vector<int>(K, j), a);
    } else {
        r.scheme = Scheme::MaxKlCommon;
        for (std::size_t k = 0; k < K; ++k) {
            const std::vector<double> table = ev.kl_table(k, method);
            for (int j = 0; j < G; ++j) values[j] += table[j];
        }
    }
    r.evaluations = static_cast<std::uint64_t>(G);
    const int j = detail::argmax_first(values);
    r.indices.assign(K, j);
    r.thetas = ev.thetas(r.indices);
    r.objective = values[j];
    r.wall_seconds = detail::seconds_since(t0);
    return r;
}

}  // namespace ehwsn
