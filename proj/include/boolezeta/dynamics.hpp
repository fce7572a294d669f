#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace boolezeta {

/// Parameters (alpha, beta) of the Boole map T and its Cauchy invariant measure.
struct MapParams {
    double alpha = 1.0;
    double beta = 0.0;

    void validate() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw std::invalid_argument("map.alpha must be finite and > 0");
        if (!std::isfinite(beta))
            throw std::invalid_argument("map.beta must be finite");
    }

    friend bool operator==(const MapParams&, const MapParams&) = default;
};

/// Distance from beta below which a step snaps to the fixed point.
inline constexpr double kSingularRadius = 1e-30;

/// One application of T_{alpha,beta}. Generic in the scalar so that extended
/// precision types can be used in tests.
template <class Real>
Real boole_step(const Real& x, const Real& alpha, const Real& beta) {
    const Real d = x - beta;
    if (d == Real(0)) return beta;
    return (alpha / Real(2)) * ((x + beta) / alpha - alpha / d);
}

inline double boole_step(double x, const MapParams& p) {
    const double d = x - p.beta;
    if (std::fabs(d) < kSingularRadius) return p.beta;
    return 0.5 * p.alpha * ((x + p.beta) / p.alpha - p.alpha / d);
}

/// The conjugacy phi(x) = alpha x + beta taking T_{1,0} to T_{alpha,beta}.
inline double conjugate(double x, const MapParams& p) { return p.alpha * x + p.beta; }

struct Orbit {
    double seed = 0.0;
    MapParams params;
    std::vector<double> values;
};

inline Orbit iterate_orbit(double x0, const MapParams& params, std::size_t n) {
    params.validate();
    Orbit o{x0, params, {}};
    o.values.reserve(n + 1);
    o.values.push_back(x0);
    double x = x0;
    for (std::size_t j = 0; j < n; ++j) {
        x = boole_step(x, params);
        o.values.push_back(x);
    }
    return o;
}

inline double cauchy_sample(double u, const MapParams& p) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("cauchy_sample: u must lie strictly inside (0,1), got " +
                                std::to_string(u));
    return p.beta + p.alpha * std::tan(std::numbers::pi * (u - 0.5));
}

inline double cauchy_cdf(double x, const MapParams& p) {
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    return 0.5 + std::atan((x - p.beta) / p.alpha) / std::numbers::pi;
}

inline double cauchy_density(double x, const MapParams& p) {
    const double d = x - p.beta;
    return (p.alpha / std::numbers::pi) / (p.alpha * p.alpha + d * d);
}

/// Fixed-width bundle of orbits advanced in lockstep. The inner loop runs over
/// lanes, which lets the compiler vectorise the division-heavy step.
class OrbitBatch {
public:
    static constexpr std::size_t kLanes = 16;

    OrbitBatch(const MapParams& p, const std::vector<double>& seeds) : p_(p), used_(seeds.size()) {
        p.validate();
        if (seeds.size() > kLanes) throw std::invalid_argument("OrbitBatch: too many lanes");
        x_.fill(p.beta + p.alpha);
        for (std::size_t i = 0; i < seeds.size(); ++i) x_[i] = seeds[i];
    }

    /// Advance every lane until the common iterate index equals `target`.
    void advance_to(std::uint64_t target) {
        if (target < index_) throw std::logic_error("OrbitBatch cannot move backwards");
        const double a = p_.alpha, b = p_.beta, half_a = 0.5 * p_.alpha;
        std::array<double, kLanes> x = x_;
        std::array<std::uint64_t, kLanes> hits{};
        for (std::uint64_t step = index_; step < target; ++step) {
            for (std::size_t l = 0; l < kLanes; ++l) {
                const double d = x[l] - b;
                const bool snap = std::fabs(d) < kSingularRadius;
                const double safe_d = snap ? 1.0 : d;
                const double next = half_a * ((x[l] + b) / a - a / safe_d);
                x[l] = snap ? b : next;
                hits[l] += snap ? 1u : 0u;
            }
        }
        x_ = x;
        for (std::size_t l = 0; l < used_; ++l) singular_hits_ += hits[l];
        index_ = target;
    }

    [[nodiscard]] double value(std::size_t lane) const { return x_[lane]; }
    [[nodiscard]] std::size_t lanes() const { return used_; }
    [[nodiscard]] std::uint64_t index() const { return index_; }
    [[nodiscard]] std::uint64_t singular_hits() const { return singular_hits_; }

private:
    MapParams p_;
    std::size_t used_;
    std::array<double, kLanes> x_{};
    std::uint64_t index_ = 0;
    std::uint64_t singular_hits_ = 0;
};

}  // namespace boolezeta
