// ============================================================================
// network.hpp -- per-sensor state assembled from detector, channel, battery
// ============================================================================
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ehwsn/battery.hpp"
#include "ehwsn/channel.hpp"
#include "ehwsn/fusion.hpp"
#include "ehwsn/sensor.hpp"

namespace ehwsn {

/// Static description of the network; thresholds theta and zeta are chosen later.
struct NetworkSpec {
    std::vector<SensorParams> sensors;
    std::vector<ChannelParams> channels;
    int capacity = 20;
    double p_e = 0.75;
    double prior_h1 = 0.5;
    double pav_target = 1.0;                // linear units
    std::vector<double> reference_thetas;  // theta used while solving zeta; empty = default

    bool operator==(const NetworkSpec&) const = default;

    std::size_t size() const { return sensors.size(); }

    void validate() const {
        if (sensors.empty()) throw DomainError("NetworkSpec: no sensors");
        if (sensors.size() != channels.size()) throw DomainError("NetworkSpec: sensors/channels length mismatch");
        if (!reference_thetas.empty() && reference_thetas.size() != sensors.size()) {
            throw DomainError("NetworkSpec: reference_thetas length mismatch");
        }
        for (const auto& s : sensors) s.validate();
        for (const auto& c : channels) c.validate();
        if (capacity < 1) throw DomainError("NetworkSpec: capacity must be >= 1");
        if (!(p_e >= 0.0 && p_e <= 1.0)) throw DomainError("NetworkSpec: p_e must be in [0,1]");
        if (!(prior_h1 >= 0.0 && prior_h1 <= 1.0)) throw DomainError("NetworkSpec: prior must be in [0,1]");
        if (!(pav_target > 0.0)) throw DomainError("NetworkSpec: pav_target must be > 0");
    }
};

/// Midpoint of the conditional means of Lambda: sigma_w2 + eta / (2N).
inline double default_reference_theta(const SensorParams& s) {
    return s.sigma_w2 + s.eta() / (2.0 * s.samples);
}

struct NodeState {
    SensorParams sensor;
    ChannelParams channel;
    ConsumptionPmf consumption;
    StationaryBattery battery;
    double transmit_prob = 0.0;
    OperatingPoint op;
};

inline NodeState evaluate_node(const SensorParams& sensor, const ChannelParams& channel, int capacity, double p_e,
                               double prior_h1) {
    NodeState node;
    node.sensor = sensor;
    node.channel = channel;
    const double pf = local_pf(sensor);
    const double pd = local_pd(sensor);
    node.transmit_prob = std::clamp(prior_h1 * pd + (1.0 - prior_h1) * pf, 0.0, 1.0);
    node.consumption = consumption_pmf(channel, static_cast<std::size_t>(capacity));
    node.battery = stationary_pmf(BatteryParams{capacity, p_e, node.transmit_prob, node.consumption});
    const double r = rho(node.battery, node.consumption.conditioned());
    node.op = operating_point(pf, pd, r, channel.q());
    return node;
}

/// Solves the average-energy constraint for every sensor at its reference theta.
inline std::vector<ZetaSolution> solve_network_zetas(const NetworkSpec& spec) {
    spec.validate();
    std::vector<ZetaSolution> out;
    out.reserve(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double theta_ref =
            spec.reference_thetas.empty() ? default_reference_theta(spec.sensors[k]) : spec.reference_thetas[k];
        const SensorParams sensor = spec.sensors[k].with_theta(theta_ref);
        const ChannelParams base = spec.channels[k];
        auto alpha_of_zeta = [&](double zeta) {
            return evaluate_node(sensor, base.with_zeta(zeta), spec.capacity, spec.p_e, spec.prior_h1).op.alpha;
        };
        out.push_back(solve_zeta(base, alpha_of_zeta, spec.pav_target));
    }
    return out;
}

/// Network with zeta fixed; node states are evaluated per threshold vector.
struct Network {
    NetworkSpec spec;
    std::vector<ChannelParams> channels;  // zeta solved
    std::vector<ZetaSolution> zetas;

    static Network solve(NetworkSpec spec) {
        Network net;
        net.zetas = solve_network_zetas(spec);
        net.channels = spec.channels;
        for (std::size_t k = 0; k < net.channels.size(); ++k) net.channels[k].zeta = net.zetas[k].zeta;
        net.spec = std::move(spec);
        return net;
    }

    /// Same zeta, different battery capacity.
    Network with_capacity(int capacity) const {
        Network copy = *this;
        copy.spec.capacity = capacity;
        return copy;
    }

    std::size_t size() const { return spec.size(); }

    std::vector<double> sigma_n2() const {
        std::vector<double> out;
        for (const auto& c : channels) out.push_back(c.sigma_n2);
        return out;
    }

    std::vector<double> lambdas() const {
        std::vector<double> out;
        for (const auto& c : channels) out.push_back(c.lambda);
        return out;
    }

    NodeState node(std::size_t k, double theta) const {
        return evaluate_node(spec.sensors[k].with_theta(theta), channels[k], spec.capacity, spec.p_e, spec.prior_h1);
    }

    std::vector<NodeState> nodes(std::span<const double> thetas) const {
        if (thetas.size() != size()) throw DomainError("Network::nodes: theta vector length mismatch");
        std::vector<NodeState> out;
        for (std::size_t k = 0; k < size(); ++k) out.push_back(node(k, thetas[k]));
        return out;
    }
};

}  // namespace ehwsn
