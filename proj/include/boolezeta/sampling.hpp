#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "boolezeta/rng.hpp"

namespace boolezeta {

using Index = std::uint64_t;

// ---------------------------------------------------------------------------
// Sequence families
// ---------------------------------------------------------------------------

struct Natural {};
struct PolyFloor {
    double gamma = 1.5;
};
struct LogExpFloor {
    double gamma = 1.25;
};
struct IntegerPolynomial {
    std::vector<std::int64_t> coeffs;  // c0 + c1 n + c2 n^2 + ...
};
struct PolynomialOfPrimes {
    std::vector<std::int64_t> coeffs;
};
struct RandomDensity {
    double delta = 0.5;
    std::uint64_t seed = 1;
};
struct Interval {
    Index lo = 0;
    Index hi = 0;
};
struct Blocks {
    std::vector<Interval> intervals;
};
struct NoiseSpec {
    enum class Kind { geometric, uniform } kind = Kind::geometric;
    double p = 0.5;      // success probability for geometric on {0,1,2,...}
    Index lo = 0, hi = 0;  // inclusive range for uniform
};
struct Perturbed;
struct DigitRestricted {
    std::uint64_t d = 3;
};
struct Explicit {
    std::vector<Index> values;
};

using SequenceSpec = std::variant<Natural, PolyFloor, LogExpFloor, IntegerPolynomial,
                                  PolynomialOfPrimes, RandomDensity, Blocks, Perturbed,
                                  DigitRestricted, Explicit>;

struct Perturbed {
    std::shared_ptr<const SequenceSpec> base;
    NoiseSpec noise;
    std::uint64_t seed = 1;
};

class sequence_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::string sequence_name(const SequenceSpec& spec) {
    static constexpr const char* names[] = {
        "natural", "poly_floor", "log_exp_floor", "integer_polynomial", "polynomial_of_primes",
        "random_density", "blocks", "perturbed", "digit_restricted", "explicit"};
    return names[spec.index()];
}

/// First `count` primes, by a segmented sieve that grows until enough are found.
inline std::vector<std::uint64_t> first_primes(std::size_t count) {
    std::vector<std::uint64_t> primes;
    if (count == 0) return primes;
    primes.reserve(count);
    std::vector<std::uint64_t> base{2};
    std::uint64_t lo = 2;
    const std::uint64_t seg = 1u << 18;
    while (primes.size() < count) {
        const std::uint64_t hi = lo + seg;
        std::uint64_t b = base.back();
        while (b * b < hi) {
            ++b;
            bool is_p = true;
            for (auto q : base) {
                if (q * q > b) break;
                if (b % q == 0) { is_p = false; break; }
            }
            if (is_p) base.push_back(b);
        }
        std::vector<char> composite(seg, 0);
        for (auto q : base) {
            if (q * q >= hi) break;
            std::uint64_t start = std::max(q * q, (lo + q - 1) / q * q);
            for (std::uint64_t m = start; m < hi; m += q) composite[m - lo] = 1;
        }
        for (std::uint64_t m = lo; m < hi && primes.size() < count; ++m)
            if (!composite[m - lo]) primes.push_back(m);
        lo = hi;
    }
    return primes;
}

namespace detail {

inline Index checked_poly(const std::vector<std::int64_t>& c, std::uint64_t x, const char* what) {
    __int128 acc = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * static_cast<__int128>(x) + *it;
        if (acc > static_cast<__int128>(std::numeric_limits<std::int64_t>::max()) ||
            acc < -static_cast<__int128>(std::numeric_limits<std::int64_t>::max()))
            throw sequence_error(std::string(what) + ": value overflows 63 bits");
    }
    if (acc < 0) throw sequence_error(std::string(what) + ": generated index must be nonnegative");
    return static_cast<Index>(acc);
}

inline void require_increasing(const std::vector<Index>& v, const char* what) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] <= v[i - 1])
            throw sequence_error(std::string(what) +
                                 ": generated indices must be strictly increasing (fails at n=" +
                                 std::to_string(i + 1) + ")");
}

inline bool is_integer(double g) { return std::fabs(g - std::round(g)) < 1e-12; }

}  // namespace detail

inline void validate(const SequenceSpec& spec);

inline void validate(const SequenceSpec& spec) {
    std::visit(
        [](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, PolyFloor>) {
                if (!(s.gamma > 1.0) || detail::is_integer(s.gamma) || !std::isfinite(s.gamma))
                    throw sequence_error("sequence.gamma: PolyFloor requires a non-integer gamma > 1");
            } else if constexpr (std::is_same_v<S, LogExpFloor>) {
                if (!(s.gamma > 1.0 && s.gamma < 1.5))
                    throw sequence_error("sequence.gamma: LogExpFloor requires 1 < gamma < 3/2");
            } else if constexpr (std::is_same_v<S, IntegerPolynomial> ||
                                 std::is_same_v<S, PolynomialOfPrimes>) {
                if (s.coeffs.size() < 2 || s.coeffs.back() <= 0)
                    throw sequence_error(
                        "sequence.coeffs: polynomial needs degree >= 1 and a positive leading coefficient");
            } else if constexpr (std::is_same_v<S, RandomDensity>) {
                if (!(s.delta > 0.0 && s.delta < 1.0))
                    throw sequence_error("sequence.delta: RandomDensity requires 0 < delta < 1");
            } else if constexpr (std::is_same_v<S, Blocks>) {
                if (s.intervals.empty()) throw sequence_error("sequence.blocks: at least one interval");
                for (std::size_t i = 0; i < s.intervals.size(); ++i) {
                    if (s.intervals[i].lo > s.intervals[i].hi)
                        throw sequence_error("sequence.blocks: interval " + std::to_string(i) +
                                             " has lo > hi");
                    if (i > 0 && s.intervals[i].lo <= s.intervals[i - 1].hi)
                        throw sequence_error(
                            "sequence.blocks: intervals must be disjoint and in increasing order");
                }
            } else if constexpr (std::is_same_v<S, Perturbed>) {
                if (!s.base) throw sequence_error("sequence.base: Perturbed needs a base sequence");
                if (std::holds_alternative<Perturbed>(*s.base))
                    throw sequence_error("sequence.base: nested Perturbed sequences are not supported");
                validate(*s.base);
                if (s.noise.kind == NoiseSpec::Kind::geometric && !(s.noise.p > 0.0 && s.noise.p <= 1.0))
                    throw sequence_error("sequence.noise.p: geometric parameter must lie in (0,1]");
                if (s.noise.kind == NoiseSpec::Kind::uniform && s.noise.lo > s.noise.hi)
                    throw sequence_error("sequence.noise: uniform range needs lo <= hi");
            } else if constexpr (std::is_same_v<S, DigitRestricted>) {
                if (s.d <= 2) throw sequence_error("sequence.d: DigitRestricted requires d > 2");
            } else if constexpr (std::is_same_v<S, Explicit>) {
                if (s.values.empty()) throw sequence_error("sequence.values: explicit list is empty");
                detail::require_increasing(s.values, "sequence.values");
            }
        },
        spec);
}

/// First `count` members of the family, deterministic given the spec.
inline std::vector<Index> generate_indices(const SequenceSpec& spec, std::size_t count) {
    if (count == 0) throw sequence_error("generate_indices: count must be >= 1");
    validate(spec);
    std::vector<Index> out;
    out.reserve(count);
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Natural>) {
                for (std::size_t n = 1; n <= count; ++n) out.push_back(n);
            } else if constexpr (std::is_same_v<S, PolyFloor>) {
                for (std::size_t n = 1; n <= count; ++n) {
                    const double v = std::floor(std::pow(static_cast<double>(n), s.gamma));
                    if (v >= 9.0e18) throw sequence_error("PolyFloor: index exceeds 63 bits");
                    out.push_back(static_cast<Index>(v));
                }
            } else if constexpr (std::is_same_v<S, LogExpFloor>) {
                // distinct values of floor(exp((log n)^gamma)), in increasing order
                Index last = 0;
                bool have = false;
                for (std::uint64_t n = 1; out.size() < count; ++n) {
                    const double v = std::floor(std::exp(std::pow(std::log(static_cast<double>(n)), s.gamma)));
                    if (v >= 9.0e18) throw sequence_error("LogExpFloor: index exceeds 63 bits");
                    const auto k = static_cast<Index>(v);
                    if (!have || k > last) {
                        out.push_back(k);
                        last = k;
                        have = true;
                    }
                }
            } else if constexpr (std::is_same_v<S, IntegerPolynomial>) {
                for (std::size_t n = 1; n <= count; ++n)
                    out.push_back(detail::checked_poly(s.coeffs, n, "IntegerPolynomial"));
                detail::require_increasing(out, "IntegerPolynomial");
            } else if constexpr (std::is_same_v<S, PolynomialOfPrimes>) {
                for (auto p : first_primes(count))
                    out.push_back(detail::checked_poly(s.coeffs, p, "PolynomialOfPrimes"));
                detail::require_increasing(out, "PolynomialOfPrimes");
            } else if constexpr (std::is_same_v<S, RandomDensity>) {
                // Independent inclusion with probability n^{-delta}: geometric jumps at the
                // current (largest remaining) rate, thinned to the exact rate at the landing point.
                std::uint64_t draw = 0;
                out.push_back(1);
                for (std::uint64_t n0 = 2; out.size() < count;) {
                    const double q = std::pow(static_cast<double>(n0), -s.delta);
                    const double gap = std::floor(std::log(counter_uniform(s.seed, draw++)) / std::log1p(-q));
                    if (gap >= 9.0e18 - static_cast<double>(n0))
                        throw sequence_error("RandomDensity: index exceeds 63 bits");
                    const std::uint64_t n = n0 + static_cast<std::uint64_t>(gap);
                    if (counter_uniform(s.seed, draw++) * q < std::pow(static_cast<double>(n), -s.delta))
                        out.push_back(n);
                    n0 = n + 1;
                }
            } else if constexpr (std::is_same_v<S, Blocks>) {
                for (const auto& iv : s.intervals)
                    for (Index k = iv.lo; k <= iv.hi && out.size() < count; ++k) out.push_back(k);
                if (out.size() < count)
                    throw sequence_error("sequence.blocks: intervals contain only " +
                                         std::to_string(out.size()) + " indices, " +
                                         std::to_string(count) + " requested");
            } else if constexpr (std::is_same_v<S, Perturbed>) {
                out = generate_indices(*s.base, count);
                SplitMix rng(s.seed);
                for (auto& k : out) {
                    Index noise = 0;
                    if (s.noise.kind == NoiseSpec::Kind::geometric) {
                        if (s.noise.p < 1.0)
                            noise = static_cast<Index>(
                                std::floor(std::log(rng.uniform()) / std::log1p(-s.noise.p)));
                    } else {
                        noise = s.noise.lo + rng() % (s.noise.hi - s.noise.lo + 1);
                    }
                    k += noise;
                }
            } else if constexpr (std::is_same_v<S, DigitRestricted>) {
                for (std::uint64_t m = 1; out.size() < count; ++m) {
                    unsigned __int128 v = 0, pw = s.d;
                    for (std::uint64_t bits = m; bits != 0; bits >>= 1) {
                        if (bits & 1u) v += pw;
                        pw *= s.d;
                        if (v >= (static_cast<unsigned __int128>(1) << 63) ||
                            (bits > 1 && pw >= (static_cast<unsigned __int128>(1) << 63)))
                            throw sequence_error("DigitRestricted: index exceeds 63 bits");
                    }
                    out.push_back(static_cast<Index>(v));
                }
            } else if constexpr (std::is_same_v<S, Explicit>) {
                if (s.values.size() < count)
                    throw sequence_error("sequence.values: explicit list has " +
                                         std::to_string(s.values.size()) + " entries, " +
                                         std::to_string(count) + " requested");
                out.assign(s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(count));
            }
        },
        spec);
    return out;
}

// ---------------------------------------------------------------------------
// Equidistribution diagnostics
// ---------------------------------------------------------------------------

/// (1/N) sum_n exp(2 pi i theta k_n).
inline std::complex<double> hartman_F(const std::vector<Index>& indices, double theta) {
    if (indices.empty()) throw std::invalid_argument("hartman_F: indices must be nonempty");
    const long double th = theta;
    std::complex<double> acc{0.0, 0.0};
    for (auto k : indices) {
        long double ph = th * static_cast<long double>(k);
        ph -= std::floor(ph);
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(ph);
        acc += std::complex<double>(std::cos(angle), std::sin(angle));
    }
    return acc / static_cast<double>(indices.size());
}

struct ResidueHistogram {
    std::uint64_t modulus = 0;
    std::vector<std::uint64_t> counts;
    std::vector<double> frequencies;
    double max_deviation = 0.0;
};

inline ResidueHistogram residue_test(const std::vector<Index>& indices, std::uint64_t m) {
    if (indices.empty()) throw std::invalid_argument("residue_test: indices must be nonempty");
    if (m < 2) throw std::invalid_argument("residue_test: modulus must be > 1");
    ResidueHistogram h{m, std::vector<std::uint64_t>(m, 0), std::vector<double>(m, 0.0), 0.0};
    for (auto k : indices) ++h.counts[k % m];
    const double n = static_cast<double>(indices.size());
    for (std::uint64_t r = 0; r < m; ++r) {
        h.frequencies[r] = static_cast<double>(h.counts[r]) / n;
        h.max_deviation = std::max(h.max_deviation, std::fabs(h.frequencies[r] - 1.0 / static_cast<double>(m)));
    }
    return h;
}

// ---------------------------------------------------------------------------
// Growth functions, Stoltz windows and admissibility
// ---------------------------------------------------------------------------

/// k(u) = c * u^p (kind power) or c * log(1 + u) (kind log); the zero function when c = 0.
struct GrowthSpec {
    enum class Kind { power, log } kind = Kind::power;
    double coefficient = 1.0;
    double exponent = 0.5;

    [[nodiscard]] double operator()(double u) const {
        if (coefficient == 0.0) return 0.0;
        return kind == Kind::power ? coefficient * std::pow(u, exponent) : coefficient * std::log1p(u);
    }
    [[nodiscard]] double derivative(double u) const {
        if (coefficient == 0.0) return 0.0;
        return kind == Kind::power ? coefficient * exponent * std::pow(u, exponent - 1.0)
                                   : coefficient / (1.0 + u);
    }
    /// Sublinear with a bounded derivative on [1, inf).
    void validate() const {
        if (!std::isfinite(coefficient) || coefficient < 0.0)
            throw std::invalid_argument("growth.coefficient must be finite and >= 0");
        if (coefficient == 0.0 || kind == Kind::log) return;
        if (exponent > 1.0)
            throw std::invalid_argument("growth.exponent > 1: derivative is unbounded on [1, inf)");
        if (exponent == 1.0)
            throw std::invalid_argument("growth.exponent = 1: k(u) = c u is not sublinear");
        if (exponent < 0.0) throw std::invalid_argument("growth.exponent must be >= 0");
    }
};

struct Window {
    Index start = 0;   // n_l
    Index length = 1;  // k_l
    friend bool operator==(const Window&, const Window&) = default;
};

struct StoltzSpec {
    std::vector<Window> windows;
};

struct StoltzKind {
    enum class Kind { full_averages, linear, sublinear } kind = Kind::full_averages;
    std::uint64_t c = 1;  // slope for linear windows
    GrowthSpec growth;    // for sublinear windows
};

inline void validate(const StoltzSpec& s) {
    if (s.windows.empty()) throw std::invalid_argument("stoltz: no windows");
    for (std::size_t i = 0; i < s.windows.size(); ++i) {
        if (s.windows[i].length == 0)
            throw std::invalid_argument("stoltz: window lengths must be positive");
        if (i > 0 && s.windows[i].length < s.windows[i - 1].length)
            throw std::invalid_argument("stoltz: window lengths must be nondecreasing");
    }
}

inline StoltzSpec stoltz_windows(const StoltzKind& kind, std::size_t count) {
    if (count == 0) throw std::invalid_argument("stoltz_windows: count must be >= 1");
    StoltzSpec spec;
    spec.windows.reserve(count);
    if (kind.kind == StoltzKind::Kind::sublinear) kind.growth.validate();
    for (std::size_t l = 1; l <= count; ++l) {
        Index start = 0;
        switch (kind.kind) {
            case StoltzKind::Kind::full_averages: start = 0; break;
            case StoltzKind::Kind::linear: start = kind.c * l; break;
            case StoltzKind::Kind::sublinear:
                start = static_cast<Index>(std::floor(kind.growth(static_cast<double>(l))));
                break;
        }
        spec.windows.push_back({start, l});
    }
    return spec;
}

struct ConeEstimate {
    double A = 0.0;           // max over lambda of |Z(lambda)| / lambda, all windows
    double A_half = 0.0;      // same with the first half of the windows and lambda <= lambda_max / 2
    Index argmax_lambda = 0;
    bool non_cone = false;    // A grows when the window set and lambda range double
};

namespace detail {

inline double cone_ratio(const std::vector<Window>& w, std::uint64_t h0, double a0, Index lambda_max,
                         Index* argmax) {
    double best = 0.0;
    std::vector<std::pair<std::int64_t, std::int64_t>> iv;
    for (Index lambda = 1; lambda <= lambda_max; ++lambda) {
        iv.clear();
        for (const auto& win : w) {
            if (win.length < h0 || win.length >= lambda) continue;
            const double half = a0 * static_cast<double>(lambda - win.length);
            const double y = static_cast<double>(win.start);
            const auto lo = static_cast<std::int64_t>(std::floor(y - half)) + 1;
            const auto hi = static_cast<std::int64_t>(std::ceil(y + half)) - 1;
            if (lo <= hi) iv.emplace_back(lo, hi);
        }
        if (iv.empty()) continue;
        std::sort(iv.begin(), iv.end());
        std::int64_t total = 0, cur_lo = iv[0].first, cur_hi = iv[0].second;
        for (std::size_t i = 1; i < iv.size(); ++i) {
            if (iv[i].first > cur_hi + 1) {
                total += cur_hi - cur_lo + 1;
                cur_lo = iv[i].first;
                cur_hi = iv[i].second;
            } else {
                cur_hi = std::max(cur_hi, iv[i].second);
            }
        }
        total += cur_hi - cur_lo + 1;
        const double r = static_cast<double>(total) / static_cast<double>(lambda);
        if (r > best) {
            best = r;
            if (argmax) *argmax = lambda;
        }
    }
    return best;
}

}  // namespace detail

/// Empirical cone constant: a diagnostic, never a certificate of the Stoltz property.
inline ConeEstimate stoltz_cone_estimate(const StoltzSpec& spec, std::uint64_t h0, double alpha0,
                                         Index lambda_max) {
    if (!(alpha0 > 0.0)) throw std::invalid_argument("stoltz_cone_estimate: alpha0 must be > 0");
    if (lambda_max < 2) throw std::invalid_argument("stoltz_cone_estimate: lambda_max must be >= 2");
    const bool populated = std::any_of(spec.windows.begin(), spec.windows.end(), [&](const Window& w) {
        return w.length >= h0 && w.length < lambda_max;
    });
    if (!populated)
        throw std::invalid_argument("stoltz_cone_estimate: no window with h0 <= k_l < lambda_max");
    ConeEstimate e;
    e.A = detail::cone_ratio(spec.windows, h0, alpha0, lambda_max, &e.argmax_lambda);
    std::vector<Window> half(spec.windows.begin(),
                             spec.windows.begin() + static_cast<std::ptrdiff_t>((spec.windows.size() + 1) / 2));
    e.A_half = detail::cone_ratio(half, h0, alpha0, lambda_max / 2, nullptr);
    e.non_cone = e.A > 1.5 * e.A_half + 1.0;
    return e;
}

struct AdmissibilityResult {
    double sup = 0.0;
    double argmax = 0.0;
    std::vector<double> kernel;  // K(theta) on the grid
};

/// K(theta) = (1/|theta|) int_{max(1/|theta|,1)}^inf k'(u)/u^2 du + k(1/|theta|) |theta| 1{|theta| <= 1}.
inline double admissibility_kernel(const GrowthSpec& k, double theta) {
    const double a = std::fabs(theta);
    if (a == 0.0) throw std::invalid_argument("admissibility_kernel: theta must be nonzero");
    if (k.coefficient == 0.0) return 0.0;
    const double lower = std::max(1.0 / a, 1.0);
    boost::math::quadrature::exp_sinh<double> integrator;
    const double integral =
        integrator.integrate([&](double t) { return k.derivative(lower + t) / ((lower + t) * (lower + t)); });
    double value = integral / a;
    if (a <= 1.0) value += k(1.0 / a) * a;
    return value;
}

inline AdmissibilityResult sublinear_admissibility(const GrowthSpec& k, const std::vector<double>& grid) {
    k.validate();
    AdmissibilityResult r;
    r.kernel.reserve(grid.size());
    for (double th : grid) {
        const double v = admissibility_kernel(k, th);
        r.kernel.push_back(v);
        if (v > r.sup) {
            r.sup = v;
            r.argmax = th;
        }
    }
    return r;
}

}  // namespace boolezeta
