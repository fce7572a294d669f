#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "boolezeta/dynamics.hpp"
#include "boolezeta/limits.hpp"
#include "boolezeta/rng.hpp"
#include "boolezeta/sampling.hpp"
#include "boolezeta/zeta.hpp"

namespace boolezeta {

enum class ExperimentKind {
    ergodic_average,
    moving_average,
    lindelof_moment,
    rh_log_average,
    variation_stats,
    frequency_counts
};
enum class SamplingMode { orbit, iid };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::ergodic_average: return "ergodic_average";
        case ExperimentKind::moving_average: return "moving_average";
        case ExperimentKind::lindelof_moment: return "lindelof_moment";
        case ExperimentKind::rh_log_average: return "rh_log_average";
        case ExperimentKind::variation_stats: return "variation_stats";
        default: return "frequency_counts";
    }
}
inline const char* to_string(SamplingMode m) { return m == SamplingMode::orbit ? "orbit" : "iid"; }

struct SeedSpec {
    std::uint64_t master = 1;
    std::size_t count = 16;

    [[nodiscard]] std::vector<std::uint64_t> streams() const {
        std::vector<std::uint64_t> out(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = derive_seed(master, i);
        return out;
    }
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::ergodic_average;
    ZetaFamily family = Riemann{0};
    cplx s{2.5, 0.0};
    MapParams params{1.0, 0.0};
    SequenceSpec sequence = Natural{};
    StoltzKind windows;  // moving_average
    SamplingMode mode = SamplingMode::orbit;
    std::vector<std::uint64_t> schedule{1000};
    SeedSpec seeds;
    Transform transform = Transform::identity;
    double power = 2.0;
    double argument_scale = 1.0;
    double log_clip = -50.0;
    int moment_l = 1;                    // lindelof_moment: exponent 2l
    GrowthSpec window_growth{};          // variation_stats: k(u) for the windowed square function
    std::vector<std::uint64_t> m_grid;   // frequency_counts
    bool quadrature_reference = true;
    QuadratureSettings quadrature;
};

/// Largest orbit index a run may request.
inline constexpr std::uint64_t kMaxOrbitIndex = 50'000'000'000ULL;

inline bool is_constant_family(const ZetaFamily& f) { return std::holds_alternative<ConstantFn>(f); }

/// Throws std::invalid_argument naming the offending configuration key.
inline void validate(const ExperimentConfig& c) {
    validate(c.family);
    c.params.validate();
    if (!std::isfinite(c.s.real()) || !std::isfinite(c.s.imag())) throw std::invalid_argument("s: must be finite");
    if (c.schedule.empty()) throw std::invalid_argument("schedule: must be nonempty");
    if (c.schedule.front() == 0) throw std::invalid_argument("schedule: entries must be >= 1");
    for (std::size_t i = 1; i < c.schedule.size(); ++i)
        if (c.schedule[i] <= c.schedule[i - 1]) throw std::invalid_argument("schedule: must be strictly increasing");
    if (c.seeds.count == 0) throw std::invalid_argument("seeds.count: must be >= 1");
    if (!(c.argument_scale > 0.0) || !std::isfinite(c.argument_scale))
        throw std::invalid_argument("integrand.argument_scale: must be > 0");
    if (!(c.log_clip < 0.0)) throw std::invalid_argument("integrand.log_clip: must be negative");
    if (c.transform == Transform::abs_power && !(c.power > 0.0))
        throw std::invalid_argument("integrand.power: must be > 0");
    validate(c.sequence);
    c.quadrature.validate();
    const double sigma = c.s.real();
    if (!is_constant_family(c.family) && !(sigma > abscissa(c.family)))
        throw std::invalid_argument("s: Re s must exceed the abscissa " + std::to_string(abscissa(c.family)) +
                                    " of " + describe(c.family));
    if (auto pole = pole_of(c.family); pole && sigma == pole->real() && c.transform == Transform::identity &&
                                       laurent_data(c.family).order > 1)
        throw std::invalid_argument("s: lies on the pole line of " + describe(c.family) +
                                    " where the pole has order > 1");
    switch (c.kind) {
        case ExperimentKind::ergodic_average:
        case ExperimentKind::moving_average:
            if (c.transform != Transform::identity)
                throw std::invalid_argument("integrand.transform: " + std::string(to_string(c.kind)) +
                                            " requires the identity transform");
            if (c.kind == ExperimentKind::moving_average && c.windows.kind == StoltzKind::Kind::sublinear)
                c.windows.growth.validate();
            break;
        case ExperimentKind::lindelof_moment:
            if (!std::holds_alternative<Riemann>(c.family) && !is_constant_family(c.family))
                throw std::invalid_argument("family: lindelof_moment samples the Riemann family");
            if (sigma != 0.5) throw std::invalid_argument("s: lindelof_moment requires Re s = 1/2");
            if (c.moment_l < 1 || 2 * c.moment_l > 8)
                throw std::invalid_argument("moment.l: requires 1 <= l and 2l <= 8");
            break;
        case ExperimentKind::rh_log_average:
            if (!std::holds_alternative<Riemann>(c.family) || derivative_order(c.family) != 0)
                throw std::invalid_argument("family: rh_log_average samples riemann with k = 0");
            if (c.s != cplx(0.5, 0.0)) throw std::invalid_argument("s: rh_log_average requires s = 1/2");
            if (c.params.alpha != 1.0 || c.params.beta != 0.0)
                throw std::invalid_argument("map.alpha/map.beta: rh_log_average requires alpha = 1, beta = 0");
            break;
        case ExperimentKind::variation_stats:
            if (c.transform != Transform::identity)
                throw std::invalid_argument("integrand.transform: variation_stats requires the identity transform");
            if (!is_constant_family(c.family) && !(sigma > 0.5 && sigma < 1.0))
                throw std::invalid_argument("s: variation_stats requires sigma = Re s in (1/2, 1)");
            c.window_growth.validate();
            break;
        case ExperimentKind::frequency_counts:
            if (!is_constant_family(c.family) && !(sigma > 0.5 && sigma < 1.0))
                throw std::invalid_argument("s: frequency_counts requires sigma = Re s in (1/2, 1)");
            if (c.s.imag() != 0.0) throw std::invalid_argument("s: frequency_counts samples at real sigma");
            if (c.m_grid.empty()) throw std::invalid_argument("frequency.m_grid: must be nonempty");
            for (std::size_t i = 0; i < c.m_grid.size(); ++i)
                if (c.m_grid[i] == 0 || (i > 0 && c.m_grid[i] <= c.m_grid[i - 1]))
                    throw std::invalid_argument("frequency.m_grid: must be positive and strictly increasing");
            break;
    }
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct SeriesPoint {
    std::uint64_t N = 0;
    std::vector<cplx> per_seed;
    cplx pooled;
    double se_re = 0.0, se_im = 0.0;
    [[nodiscard]] double se() const { return std::hypot(se_re, se_im); }
};

struct Reference {
    std::string name;
    cplx value;
    double error = 0.0;
    bool flagged = false;
};

struct Counters {
    std::uint64_t evaluations = 0;
    std::uint64_t singular_hits = 0;
    std::uint64_t log_clips = 0;
    std::uint64_t unconverged = 0;
    std::uint64_t pole_hits = 0;
    std::uint64_t orbit_steps = 0;

    Counters& operator+=(const Counters& o) {
        evaluations += o.evaluations;
        singular_hits += o.singular_hits;
        log_clips += o.log_clips;
        unconverged += o.unconverged;
        pole_hits += o.pole_hits;
        orbit_steps += o.orbit_steps;
        return *this;
    }
};

struct VariationStats {
    std::vector<std::uint64_t> schedule;
    double block_sup = 0.0;                    // E sum_k sup_{N_k <= N < N_{k+1}} |R_N - R_{N_k}|^2
    std::vector<double> squared_increments;    // E sum_{N < J} |R_{N+1} - R_N|^2 at each scheduled J
    std::vector<double> absolute_increments;   // E sum_{N < J} |R_{N+1} - R_N| at each scheduled J
    double square_function = 0.0;              // E sum_k |R_{N_{k+1}} - R_{N_k}|^2
    double windowed_square_function = 0.0;     // E sum_q |G_{n_{q+1}} - G_{n_q}|^2
    double bound = 0.0;                        // (1/(pi sigma)) |zeta(2 sigma)/2 + zeta(2 sigma - 1)/(2 sigma - 1)|
    double C_block_sup = 0.0, C_squared = 0.0, C_square_function = 0.0, C_windowed = 0.0;
};

struct FrequencyStats {
    std::uint64_t n_max = 0;
    std::vector<std::uint64_t> m_grid;
    std::vector<double> ratio;        // pooled #{n <= n_max : |f_n| / n >= 1/m} / m
    std::vector<double> ratio_se;
    double weak_norm = 0.0;           // pooled sup_t t #{n : |f_n| / n > t}
    double weak_norm_se = 0.0;
    double weak_norm_half = 0.0;      // same statistic at n_max / 2
};

struct RunResult {
    ExperimentConfig config;
    std::vector<SeriesPoint> series;
    std::vector<Reference> references;  // references.front() is the primary reference
    Counters counters;
    std::optional<VariationStats> variation;
    std::optional<FrequencyStats> frequency;
    std::vector<std::string> diagnostics;
    double elapsed_seconds = 0.0;

    [[nodiscard]] const SeriesPoint& final_point() const { return series.back(); }
    [[nodiscard]] std::optional<Reference> primary() const {
        if (references.empty()) return std::nullopt;
        return references.front();
    }
    [[nodiscard]] double abs_error() const {
        auto r = primary();
        return r ? std::abs(final_point().pooled - r->value) : std::numeric_limits<double>::quiet_NaN();
    }
    /// |estimate - reference| in units of the combined standard error.
    [[nodiscard]] double z_score() const {
        const auto ref = primary();
        const double se = std::hypot(final_point().se(), ref ? ref->error : 0.0);
        const double e = abs_error();
        if (se == 0.0) return e == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        return e / se;
    }
};

// ---------------------------------------------------------------------------
// Sampling machinery
// ---------------------------------------------------------------------------

namespace detail {

/// Running mean; exact for constant input and stable for long runs.
struct RunningMean {
    cplx mean{0.0, 0.0};
    std::uint64_t n = 0;
    /// Returns the increment R_{n+1} - R_n (zero on the first sample).
    cplx push(cplx v) {
        ++n;
        if (n == 1) {
            mean = v;
            return 0.0;
        }
        const cplx inc = (v - mean) / static_cast<double>(n);
        mean += inc;
        return inc;
    }
};

/// Source of Cauchy-distributed points for a group of seeds at a common index j:
/// T^j x_seed in orbit mode, an independent draw X_j in iid mode.
class LaneSource {
public:
    LaneSource(SamplingMode mode, const MapParams& p, std::vector<std::uint64_t> streams)
        : mode_(mode), p_(p), streams_(std::move(streams)) {
        if (mode_ == SamplingMode::orbit) {
            std::vector<double> x0(streams_.size());
            for (std::size_t i = 0; i < streams_.size(); ++i) x0[i] = cauchy_sample(open_unit(splitmix64(streams_[i])), p_);
            batch_.emplace(p_, x0);
        }
    }
    void advance_to(std::uint64_t j) {
        if (j > kMaxOrbitIndex) throw std::invalid_argument("sequence: index exceeds the orbit budget");
        if (mode_ == SamplingMode::orbit) batch_->advance_to(j);
        j_ = j;
    }
    [[nodiscard]] double tau(std::size_t lane) const {
        if (mode_ == SamplingMode::orbit) return batch_->value(lane);
        return cauchy_sample(counter_uniform(streams_[lane], j_), p_);
    }
    [[nodiscard]] std::size_t lanes() const { return streams_.size(); }
    [[nodiscard]] std::uint64_t singular_hits() const { return batch_ ? batch_->singular_hits() : 0; }
    [[nodiscard]] std::uint64_t steps() const { return batch_ ? batch_->index() * batch_->lanes() : 0; }

private:
    SamplingMode mode_;
    MapParams p_;
    std::vector<std::uint64_t> streams_;
    std::optional<OrbitBatch> batch_;
    std::uint64_t j_ = 0;
};

/// Evaluates transform(f(s + i * scale * tau)) with event accounting.
struct Sampler {
    IntegrandSpec spec;
    cplx s;
    double log_clip = -50.0;

    cplx operator()(double tau, Counters& c) const {
        ++c.evaluations;
        const cplx z = s + cplx(0.0, spec.argument_scale * tau);
        PointValue pv;
        try {
            pv = evaluate_detailed(spec.family, z);
        } catch (const std::domain_error&) {
            ++c.pole_hits;
            return 0.0;
        }
        if (!pv.converged) ++c.unconverged;
        if (spec.transform == Transform::log_abs) {
            const double a = std::abs(pv.value);
            const double v = a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
            if (!(v >= log_clip)) {
                ++c.log_clips;
                return log_clip;
            }
            return v;
        }
        return apply_transform(pv.value, spec);
    }
};

inline std::size_t resolve_threads(std::size_t requested, std::size_t seeds) {
    std::size_t t = requested ? requested : std::max<unsigned>(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(t, seeds));
}

/// Runs body(first_seed, streams, counters) over contiguous seed groups of at most
/// OrbitBatch::kLanes seeds, in parallel, and sums the counters in group order.
template <class Body>
Counters for_seed_groups(const std::vector<std::uint64_t>& streams, std::size_t threads, Body&& body) {
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    const std::size_t S = streams.size();
    const std::size_t T = resolve_threads(threads, S);
    const std::size_t per = std::min<std::size_t>(OrbitBatch::kLanes, (S + T - 1) / T);
    for (std::size_t a = 0; a < S; a += per) groups.emplace_back(a, std::min(S, a + per));
    std::vector<Counters> counters(groups.size());
    std::vector<std::exception_ptr> errors(groups.size());
    auto work = [&](std::size_t gi) {
        try {
            const auto [a, b] = groups[gi];
            std::vector<std::uint64_t> sub(streams.begin() + static_cast<std::ptrdiff_t>(a),
                                           streams.begin() + static_cast<std::ptrdiff_t>(b));
            body(a, sub, counters[gi]);
        } catch (...) {
            errors[gi] = std::current_exception();
        }
    };
    if (T == 1 || groups.size() == 1) {
        for (std::size_t g = 0; g < groups.size(); ++g) work(g);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (std::size_t t = 0; t < T; ++t)
            pool.emplace_back([&] {
                for (std::size_t g = next++; g < groups.size(); g = next++) work(g);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    Counters total;
    for (const auto& c : counters) total += c;
    return total;
}

/// Calls visit(seed, n, value) for n = 0..N-1 in index-list order, for every seed.
/// Non-monotone index lists (perturbed sequences) are served from a stored orbit.
template <class Visit>
Counters drive_subsequence(const ExperimentConfig& cfg, const Sampler& sampler, const std::vector<Index>& idx,
                           std::size_t threads, Visit&& visit) {
    const auto streams = cfg.seeds.streams();
    const bool monotone = std::is_sorted(idx.begin(), idx.end());
    return for_seed_groups(streams, threads, [&](std::size_t first, const std::vector<std::uint64_t>& sub,
                                                 Counters& c) {
        LaneSource src(cfg.mode, cfg.params, sub);
        const std::size_t L = sub.size();
        if (monotone) {
            for (std::size_t n = 0; n < idx.size(); ++n) {
                src.advance_to(idx[n]);
                for (std::size_t l = 0; l < L; ++l) visit(first + l, n, sampler(src.tau(l), c));
            }
        } else {
            std::vector<std::size_t> order(idx.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });
            std::vector<double> taus(idx.size() * L);
            for (std::size_t pos : order) {
                src.advance_to(idx[pos]);
                for (std::size_t l = 0; l < L; ++l) taus[pos * L + l] = src.tau(l);
            }
            for (std::size_t n = 0; n < idx.size(); ++n)
                for (std::size_t l = 0; l < L; ++l) visit(first + l, n, sampler(taus[n * L + l], c));
        }
        c.singular_hits += src.singular_hits();
        c.orbit_steps += src.steps();
    });
}

struct IndexWindow {
    Index first = 0;  // first orbit index
    Index length = 1;
};

/// Calls visit(seed, window, value) for every orbit index inside each window, in
/// increasing index order.
template <class Visit>
Counters drive_windows(const ExperimentConfig& cfg, const Sampler& sampler, const std::vector<IndexWindow>& windows,
                       std::size_t threads, Visit&& visit) {
    const auto streams = cfg.seeds.streams();
    Index lo = std::numeric_limits<Index>::max(), hi = 0;
    for (const auto& w : windows) {
        if (w.length == 0) throw std::invalid_argument("window length must be positive");
        lo = std::min(lo, w.first);
        hi = std::max(hi, w.first + w.length - 1);
    }
    return for_seed_groups(streams, threads, [&](std::size_t first, const std::vector<std::uint64_t>& sub,
                                                 Counters& c) {
        LaneSource src(cfg.mode, cfg.params, sub);
        const std::size_t L = sub.size();
        std::vector<std::size_t> active;
        std::vector<cplx> vals(L);
        for (Index j = lo; j <= hi; ++j) {
            active.clear();
            for (std::size_t w = 0; w < windows.size(); ++w)
                if (j >= windows[w].first && j - windows[w].first < windows[w].length) active.push_back(w);
            if (active.empty()) continue;
            src.advance_to(j);
            for (std::size_t l = 0; l < L; ++l) vals[l] = sampler(src.tau(l), c);
            for (std::size_t w : active)
                for (std::size_t l = 0; l < L; ++l) visit(first + l, w, vals[l]);
        }
        c.singular_hits += src.singular_hits();
        c.orbit_steps += src.steps();
    });
}

inline SeriesPoint pool(std::uint64_t N, std::vector<cplx> per_seed) {
    SeriesPoint p;
    p.N = N;
    const double S = static_cast<double>(per_seed.size());
    cplx mean = 0.0;
    for (const auto& v : per_seed) mean += v;
    mean /= S;
    p.pooled = mean;
    if (per_seed.size() > 1) {
        double vr = 0.0, vi = 0.0;
        for (const auto& v : per_seed) {
            vr += (v.real() - mean.real()) * (v.real() - mean.real());
            vi += (v.imag() - mean.imag()) * (v.imag() - mean.imag());
        }
        p.se_re = std::sqrt(vr / (S - 1.0) / S);
        p.se_im = std::sqrt(vi / (S - 1.0) / S);
    }
    p.per_seed = std::move(per_seed);
    return p;
}

inline std::pair<double, double> mean_se(const std::vector<double>& v) {
    const double S = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / S;
    if (v.size() < 2) return {m, 0.0};
    double q = 0.0;
    for (double x : v) q += (x - m) * (x - m);
    return {m, std::sqrt(q / (S - 1.0) / S)};
}

inline IntegrandSpec integrand_of(const ExperimentConfig& c) {
    return IntegrandSpec{c.family, c.transform, c.power, c.argument_scale};
}

inline void attach_references(RunResult& r) {
    const auto& c = r.config;
    if (c.transform == Transform::identity && !is_constant_family(c.family)) {
        try {
            const auto cf = closed_form_limit(LimitRequest{c.family, c.s, c.params});
            r.references.push_back({std::string("closed_form:") + to_string(cf.region), cf.value, 0.0, false});
        } catch (const std::invalid_argument&) {
        }
    }
    if (is_constant_family(c.family)) {
        const cplx v = apply_transform(std::get<ConstantFn>(c.family).value, integrand_of(c));
        r.references.push_back({"constant", v, 0.0, false});
    }
    if (c.quadrature_reference && !is_constant_family(c.family)) {
        const auto q = cauchy_quadrature(integrand_of(c), c.s, c.params, c.quadrature);
        r.references.push_back({std::string("quadrature:") + to_string(q.tail_model), q.value, q.error, q.flagged});
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

namespace detail {

inline RunResult subsequence_run(ExperimentConfig cfg, std::size_t threads) {
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r;
    r.config = cfg;
    const std::uint64_t N = cfg.schedule.back();
    const auto idx = generate_indices(cfg.sequence, N);
    const Sampler sampler{integrand_of(cfg), cfg.s, cfg.log_clip};
    const std::size_t S = cfg.seeds.count;
    std::vector<RunningMean> acc(S);
    std::vector<std::vector<cplx>> snap(cfg.schedule.size(), std::vector<cplx>(S));
    r.counters = drive_subsequence(cfg, sampler, idx, threads, [&](std::size_t seed, std::size_t n, cplx v) {
        acc[seed].push(v);
        const auto it = std::lower_bound(cfg.schedule.begin(), cfg.schedule.end(), n + 1);
        if (it != cfg.schedule.end() && *it == n + 1)
            snap[static_cast<std::size_t>(it - cfg.schedule.begin())][seed] = acc[seed].mean;
    });
    for (std::size_t k = 0; k < cfg.schedule.size(); ++k) r.series.push_back(pool(cfg.schedule[k], snap[k]));
    attach_references(r);
    r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace detail

/// (1/N) sum_{n<N} f(s + i T^{k_n} x) per seed, or with independent Cauchy draws in iid mode.
inline RunResult ergodic_average(ExperimentConfig cfg, std::size_t threads = 0) {
    cfg.kind = ExperimentKind::ergodic_average;
    return detail::subsequence_run(std::move(cfg), threads);
}

/// Window l of the schedule averages f(s + i T^{n_l + j} x) over j = 1..k_l with k_l = l.
inline RunResult moving_average(ExperimentConfig cfg, std::size_t threads = 0) {
    cfg.kind = ExperimentKind::moving_average;
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r;
    r.config = cfg;
    std::vector<detail::IndexWindow> windows;
    for (auto l : cfg.schedule) {
        const auto w = stoltz_windows(cfg.windows, static_cast<std::size_t>(l)).windows.back();
        windows.push_back({w.start + 1, w.length});
    }
    const detail::Sampler sampler{detail::integrand_of(cfg), cfg.s, cfg.log_clip};
    const std::size_t S = cfg.seeds.count;
    std::vector<std::vector<detail::RunningMean>> acc(windows.size(), std::vector<detail::RunningMean>(S));
    r.counters = detail::drive_windows(cfg, sampler, windows, threads,
                                       [&](std::size_t seed, std::size_t w, cplx v) { acc[w][seed].push(v); });
    for (std::size_t w = 0; w < windows.size(); ++w) {
        std::vector<cplx> per(S);
        for (std::size_t i = 0; i < S; ++i) per[i] = acc[w][i].mean;
        r.series.push_back(detail::pool(cfg.schedule[w], std::move(per)));
    }
    detail::attach_references(r);
    r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// (1/N) sum |zeta^{(k)}(1/2 + i T^{k_n} x)|^{2l} against its Cauchy-weighted integral.
inline RunResult lindelof_moment(ExperimentConfig cfg, int l, int k, std::size_t threads = 0) {
    cfg.kind = ExperimentKind::lindelof_moment;
    if (!is_constant_family(cfg.family)) cfg.family = with_derivative_order(cfg.family, k);
    cfg.transform = Transform::abs_power;
    cfg.moment_l = l;
    cfg.power = 2.0 * l;
    auto r = detail::subsequence_run(std::move(cfg), threads);
    r.diagnostics.push_back("moment estimate is consistent with the Lindelof hypothesis at (N, T) = (" +
                            std::to_string(r.config.schedule.back()) + ", " +
                            std::to_string(r.config.quadrature.truncation) + ") resolution only");
    return r;
}

/// (1/N) sum log|zeta(1/2 + (1/2) i T^{k_n} x)| against the Balazard-Saias-Yor integral.
inline RunResult rh_log_average(ExperimentConfig cfg, std::size_t threads = 0) {
    cfg.kind = ExperimentKind::rh_log_average;
    cfg.transform = Transform::log_abs;
    cfg.argument_scale = 0.5;
    auto r = detail::subsequence_run(std::move(cfg), threads);
    if (r.config.quadrature_reference) {
        const auto b = bsy_functional(r.config.quadrature);
        r.references.insert(r.references.begin(), Reference{"bsy_functional", b.value, b.error, b.flagged});
    }
    r.diagnostics.push_back("log-average is consistent with RH at (N, T) = (" +
                            std::to_string(r.config.schedule.back()) + ", " +
                            std::to_string(r.config.quadrature.truncation) + ") resolution only");
    return r;
}

inline RunResult variation_stats(ExperimentConfig cfg, std::size_t threads = 0) {
    cfg.kind = ExperimentKind::variation_stats;
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r;
    r.config = cfg;
    const auto& sched = cfg.schedule;
    const std::size_t S = cfg.seeds.count, K = sched.size();
    const auto idx = generate_indices(cfg.sequence, sched.back());
    const detail::Sampler sampler{detail::integrand_of(cfg), cfg.s, cfg.log_clip};

    struct PerSeed {
        detail::RunningMean mean;
        double sq = 0.0, ab = 0.0, block = 0.0, block_max = 0.0;
        cplx block_anchor;
        std::size_t k = 0;  // current block index
        std::vector<double> sq_at, ab_at;
        std::vector<cplx> R_at;
    };
    std::vector<PerSeed> st(S);
    for (auto& p : st) {
        p.sq_at.resize(K);
        p.ab_at.resize(K);
        p.R_at.resize(K);
    }
    r.counters = detail::drive_subsequence(cfg, sampler, idx, threads, [&](std::size_t seed, std::size_t n, cplx v) {
        auto& p = st[seed];
        const cplx inc = p.mean.push(v);
        const std::uint64_t N = n + 1;
        p.sq += std::norm(inc);
        p.ab += std::abs(inc);
        if (p.k >= 1 && p.k < K && N < sched[p.k])
            p.block_max = std::max(p.block_max, std::norm(p.mean.mean - p.block_anchor));
        if (p.k < K && N == sched[p.k]) {
            p.sq_at[p.k] = p.sq;
            p.ab_at[p.k] = p.ab;
            p.R_at[p.k] = p.mean.mean;
            if (p.k > 0) {
                p.block += p.block_max;
                p.block_max = 0.0;
            }
            p.block_anchor = p.mean.mean;
            ++p.k;
        }
    });

    // windowed square function over G^k_n, n in the schedule
    std::vector<detail::IndexWindow> windows;
    for (auto n : sched)
        windows.push_back({static_cast<Index>(std::floor(cfg.window_growth(static_cast<double>(n)))), n});
    std::vector<std::vector<detail::RunningMean>> wacc(K, std::vector<detail::RunningMean>(S));
    r.counters += detail::drive_windows(cfg, sampler, windows, threads,
                                        [&](std::size_t seed, std::size_t w, cplx v) { wacc[w][seed].push(v); });

    VariationStats vs;
    vs.schedule = sched;
    std::vector<double> block(S), sqf(S), win(S);
    for (std::size_t i = 0; i < S; ++i) {
        block[i] = st[i].block;
        for (std::size_t k = 0; k + 1 < K; ++k) {
            sqf[i] += std::norm(st[i].R_at[k + 1] - st[i].R_at[k]);
            win[i] += std::norm(wacc[k + 1][i].mean - wacc[k][i].mean);
        }
    }
    vs.block_sup = detail::mean_se(block).first;
    vs.square_function = detail::mean_se(sqf).first;
    vs.windowed_square_function = detail::mean_se(win).first;
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> a(S), b(S);
        for (std::size_t i = 0; i < S; ++i) {
            a[i] = st[i].sq_at[k];
            b[i] = st[i].ab_at[k];
        }
        vs.squared_increments.push_back(detail::mean_se(a).first);
        vs.absolute_increments.push_back(detail::mean_se(b).first);
    }
    if (!is_constant_family(cfg.family)) {
        const double sigma = cfg.s.real();
        vs.bound = std::fabs(second_moment_bracket(sigma)) / (std::numbers::pi * sigma);
        vs.C_block_sup = vs.block_sup / vs.bound;
        vs.C_squared = vs.squared_increments.back() / vs.bound;
        vs.C_square_function = vs.square_function / vs.bound;
        vs.C_windowed = std::sqrt(vs.windowed_square_function) / vs.bound;
    }
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<cplx> per(S);
        for (std::size_t i = 0; i < S; ++i) per[i] = st[i].R_at[k];
        r.series.push_back(detail::pool(sched[k], std::move(per)));
    }
    r.variation = vs;
    detail::attach_references(r);
    r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Frequencies #{n <= n_max : |f(sigma + i T^{k_n} x)| / n >= 1/m} / m over the m grid,
/// with n_max the last scheduled N, and the weak-(1, infinity) norm of (|f_n| / n).
inline RunResult frequency_counts(ExperimentConfig cfg, std::size_t threads = 0) {
    cfg.kind = ExperimentKind::frequency_counts;
    cfg.transform = Transform::abs;
    validate(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    RunResult r;
    r.config = cfg;
    const std::uint64_t n_max = cfg.schedule.back();
    const std::size_t S = cfg.seeds.count;
    const auto idx = generate_indices(cfg.sequence, n_max);
    const detail::Sampler sampler{detail::integrand_of(cfg), cfg.s, cfg.log_clip};
    std::vector<std::vector<double>> v(S, std::vector<double>(n_max));
    std::vector<detail::RunningMean> acc(S);
    std::vector<std::vector<cplx>> snap(cfg.schedule.size(), std::vector<cplx>(S));
    r.counters = detail::drive_subsequence(cfg, sampler, idx, threads, [&](std::size_t seed, std::size_t n, cplx val) {
        v[seed][n] = val.real() / static_cast<double>(n + 1);
        acc[seed].push(val);
        const auto it = std::lower_bound(cfg.schedule.begin(), cfg.schedule.end(), n + 1);
        if (it != cfg.schedule.end() && *it == n + 1)
            snap[static_cast<std::size_t>(it - cfg.schedule.begin())][seed] = acc[seed].mean;
    });
    FrequencyStats fs;
    fs.n_max = n_max;
    fs.m_grid = cfg.m_grid;
    auto weak_norm = [](std::vector<double> x) {
        std::sort(x.begin(), x.end(), std::greater<>());
        double best = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) best = std::max(best, static_cast<double>(j + 1) * x[j]);
        return best;
    };
    std::vector<std::vector<double>> ratios(cfg.m_grid.size(), std::vector<double>(S));
    std::vector<double> wn(S), wn_half(S);
    for (std::size_t i = 0; i < S; ++i) {
        std::vector<double> sorted = v[i];
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t j = 0; j < cfg.m_grid.size(); ++j) {
            const double m = static_cast<double>(cfg.m_grid[j]);
            // |f_n|/n >= 1/m  <=>  value >= 1/m
            const auto cnt = static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), 1.0 / m));
            ratios[j][i] = cnt / m;
        }
        wn[i] = weak_norm(v[i]);
        wn_half[i] = weak_norm(std::vector<double>(v[i].begin(), v[i].begin() + static_cast<std::ptrdiff_t>(n_max / 2)));
    }
    for (const auto& col : ratios) {
        const auto [m, se] = detail::mean_se(col);
        fs.ratio.push_back(m);
        fs.ratio_se.push_back(se);
    }
    std::tie(fs.weak_norm, fs.weak_norm_se) = detail::mean_se(wn);
    fs.weak_norm_half = detail::mean_se(wn_half).first;
    r.frequency = fs;
    for (std::size_t k = 0; k < cfg.schedule.size(); ++k) r.series.push_back(detail::pool(cfg.schedule[k], snap[k]));

    if (is_constant_family(cfg.family)) {
        r.references.push_back({"constant", std::abs(std::get<ConstantFn>(cfg.family).value), 0.0, false});
    } else {
        if (cfg.quadrature_reference) {
            const auto q = cauchy_quadrature(detail::integrand_of(cfg), cfg.s, cfg.params, cfg.quadrature);
            r.references.push_back({"first_moment_quadrature", q.value, q.error, q.flagged});
        }
        const auto cf = closed_form_limit(LimitRequest{cfg.family, cfg.s, cfg.params});
        r.references.push_back({"stated_limit", cf.value, 0.0, false});
    }
    r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Dispatches on config.kind.
inline RunResult run_experiment(const ExperimentConfig& cfg, std::size_t threads = 0) {
    switch (cfg.kind) {
        case ExperimentKind::ergodic_average: return ergodic_average(cfg, threads);
        case ExperimentKind::moving_average: return moving_average(cfg, threads);
        case ExperimentKind::lindelof_moment:
            return lindelof_moment(cfg, cfg.moment_l, derivative_order(cfg.family), threads);
        case ExperimentKind::rh_log_average: return rh_log_average(cfg, threads);
        case ExperimentKind::variation_stats: return variation_stats(cfg, threads);
        default: return frequency_counts(cfg, threads);
    }
}

}  // namespace boolezeta
