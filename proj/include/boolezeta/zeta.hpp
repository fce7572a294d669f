#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/bernoulli.hpp>

#include "boolezeta/jet.hpp"

namespace boolezeta {

// ---------------------------------------------------------------------------
// Dirichlet characters
// ---------------------------------------------------------------------------

inline int kronecker_symbol(std::int64_t D, std::int64_t n) {
    if (n < 0) throw std::invalid_argument("kronecker_symbol: n must be >= 0");
    if (n == 0) return (D == 1 || D == -1) ? 1 : 0;
    int result = 1;
    while (n % 2 == 0) {
        if (D % 2 == 0) return 0;
        const std::int64_t r = ((D % 8) + 8) % 8;
        if (r == 3 || r == 5) result = -result;
        n /= 2;
    }
    // Jacobi symbol (D/n) for odd n > 0
    std::int64_t a = ((D % n) + n) % n, m = n;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            const std::int64_t r = m % 8;
            if (r == 3 || r == 5) result = -result;
        }
        std::swap(a, m);
        if (a % 4 == 3 && m % 4 == 3) result = -result;
        a %= m;
    }
    return m == 1 ? result : 0;
}

inline bool is_squarefree(std::int64_t n) {
    n = std::llabs(n);
    for (std::int64_t p = 2; p * p <= n; ++p)
        if (n % (p * p) == 0) return false;
    return true;
}

inline bool is_fundamental_discriminant(std::int64_t D) {
    if (D == 1 || D == 0) return false;
    const std::int64_t r4 = ((D % 4) + 4) % 4;
    if (r4 == 1) return is_squarefree(D);
    if (r4 == 0) {
        const std::int64_t m = D / 4;
        const std::int64_t mr = ((m % 4) + 4) % 4;
        return (mr == 2 || mr == 3) && is_squarefree(m);
    }
    return false;
}

inline std::vector<std::uint64_t> prime_divisors(std::uint64_t q) {
    std::vector<std::uint64_t> ps;
    for (std::uint64_t p = 2; p * p <= q; ++p) {
        if (q % p == 0) {
            ps.push_back(p);
            while (q % p == 0) q /= p;
        }
    }
    if (q > 1) ps.push_back(q);
    return ps;
}

inline std::uint64_t euler_phi(std::uint64_t q) {
    std::uint64_t phi = q;
    for (auto p : prime_divisors(q)) phi = phi / p * (p - 1);
    return phi;
}

class DirichletCharacter {
public:
    enum class Kind { principal, kronecker, table };

    static DirichletCharacter principal(std::uint64_t q) {
        if (q < 1) throw std::invalid_argument("character modulus must be >= 1");
        std::vector<cplx> v(q);
        for (std::uint64_t r = 0; r < q; ++r) v[r] = std::gcd(r, q) == 1 ? 1.0 : 0.0;
        return DirichletCharacter(Kind::principal, q, std::move(v), 0);
    }

    static DirichletCharacter kronecker(std::int64_t D) {
        if (!is_fundamental_discriminant(D))
            throw std::invalid_argument("character.discriminant: " + std::to_string(D) +
                                        " is not a fundamental discriminant");
        const auto q = static_cast<std::uint64_t>(std::llabs(D));
        std::vector<cplx> v(q);
        for (std::uint64_t r = 0; r < q; ++r) v[r] = static_cast<double>(kronecker_symbol(D, static_cast<std::int64_t>(r)));
        return DirichletCharacter(Kind::kronecker, q, std::move(v), D);
    }

    static DirichletCharacter from_table(std::vector<cplx> values) {
        const auto q = static_cast<std::uint64_t>(values.size());
        if (q < 1) throw std::invalid_argument("character.values: empty table");
        DirichletCharacter c(Kind::table, q, std::move(values), 0);
        c.check_axioms();
        bool principal = true;
        for (std::uint64_t r = 0; r < q; ++r)
            if (std::gcd(r, q) == 1 && std::abs(c.values_[r] - 1.0) > 1e-12) principal = false;
        c.principal_ = principal;
        return c;
    }

    [[nodiscard]] cplx operator()(std::int64_t n) const {
        const auto q = static_cast<std::int64_t>(q_);
        return values_[static_cast<std::size_t>(((n % q) + q) % q)];
    }
    [[nodiscard]] std::uint64_t modulus() const { return q_; }
    [[nodiscard]] bool is_principal() const { return principal_; }
    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] std::int64_t discriminant() const { return D_; }
    [[nodiscard]] const std::vector<cplx>& values() const { return values_; }
    [[nodiscard]] bool is_real() const {
        return std::all_of(values_.begin(), values_.end(), [](cplx v) { return v.imag() == 0.0; });
    }
    [[nodiscard]] std::string describe() const {
        switch (kind_) {
            case Kind::principal: return "principal mod " + std::to_string(q_);
            case Kind::kronecker: return "kronecker (" + std::to_string(D_) + "/.)";
            default: return "table mod " + std::to_string(q_);
        }
    }

    friend bool operator==(const DirichletCharacter& a, const DirichletCharacter& b) {
        return a.q_ == b.q_ && a.values_ == b.values_;
    }

private:
    DirichletCharacter(Kind k, std::uint64_t q, std::vector<cplx> v, std::int64_t D)
        : kind_(k), q_(q), values_(std::move(v)), principal_(k == Kind::principal), D_(D) {}

    void check_axioms() const {
        const double tol = 1e-12;
        const std::uint64_t phi = euler_phi(q_);
        if (std::abs(values_[1 % q_] - 1.0) > tol)
            throw std::invalid_argument("character.values: chi(1) must equal 1");
        for (std::uint64_t r = 0; r < q_; ++r) {
            const bool coprime = std::gcd(r, q_) == 1;
            if (!coprime && values_[r] != cplx(0.0))
                throw std::invalid_argument("character.values: chi(" + std::to_string(r) +
                                            ") must vanish (not coprime to the modulus)");
            if (coprime) {
                if (std::fabs(std::abs(values_[r]) - 1.0) > tol ||
                    std::abs(std::pow(values_[r], static_cast<double>(phi)) - 1.0) > 1e-9)
                    throw std::invalid_argument("character.values: chi(" + std::to_string(r) +
                                                ") is not a phi(q)-th root of unity");
                for (std::uint64_t t = 0; t < q_; ++t) {
                    if (std::gcd(t, q_) != 1) continue;
                    if (std::abs(values_[r * t % q_] - values_[r] * values_[t]) > 1e-9)
                        throw std::invalid_argument("character.values: not multiplicative at (" +
                                                    std::to_string(r) + "," + std::to_string(t) + ")");
                }
            }
        }
    }

    Kind kind_;
    std::uint64_t q_;
    std::vector<cplx> values_;
    bool principal_;
    std::int64_t D_;
};

// ---------------------------------------------------------------------------
// Function families
// ---------------------------------------------------------------------------

struct Riemann {
    int k = 0;
};
struct Hurwitz {
    int k = 0;
    double a = 0.0;  // zeta(s,a) = sum_{n>=1} (n+a)^{-s}
};
struct DirichletL {
    int k = 0;
    DirichletCharacter chi = DirichletCharacter::principal(1);
};
struct DedekindQuadratic {
    std::int64_t D = -4;
};
/// The constant function, a plumbing stub for tests and smoke runs.
struct ConstantFn {
    cplx value{1.0, 0.0};
};

using ZetaFamily = std::variant<Riemann, Hurwitz, DirichletL, DedekindQuadratic, ConstantFn>;

inline constexpr int kMaxDerivative = 12;

inline int derivative_order(const ZetaFamily& f) {
    return std::visit(
        [](const auto& v) -> int {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, DedekindQuadratic> || std::is_same_v<V, ConstantFn>)
                return 0;
            else
                return v.k;
        },
        f);
}

inline ZetaFamily with_derivative_order(const ZetaFamily& f, int k) {
    return std::visit(
        [k](auto v) -> ZetaFamily {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, DedekindQuadratic>) {
                if (k != 0) throw std::invalid_argument("DedekindQuadratic carries no derivative order");
            } else if constexpr (!std::is_same_v<V, ConstantFn>) {
                v.k = k;
            }
            return v;
        },
        f);
}

inline void validate(const ZetaFamily& f) {
    std::visit(
        [](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, DedekindQuadratic>) {
                if (!is_fundamental_discriminant(v.D))
                    throw std::invalid_argument("family.discriminant: " + std::to_string(v.D) +
                                                " is not a fundamental discriminant");
            } else if constexpr (std::is_same_v<V, ConstantFn>) {
                if (!std::isfinite(v.value.real()) || !std::isfinite(v.value.imag()))
                    throw std::invalid_argument("family.value must be finite");
            } else {
                if (v.k < 0 || v.k > kMaxDerivative)
                    throw std::invalid_argument("family.k must lie in [0, " +
                                                std::to_string(kMaxDerivative) + "]");
                if constexpr (std::is_same_v<V, Hurwitz>) {
                    if (!(v.a >= 0.0 && v.a < 1.0)) throw std::invalid_argument("family.a must lie in [0,1)");
                }
            }
        },
        f);
}

inline std::string describe(const ZetaFamily& f) {
    std::ostringstream os;
    std::visit(
        [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Riemann>) os << "riemann(k=" << v.k << ")";
            else if constexpr (std::is_same_v<V, Hurwitz>) os << "hurwitz(k=" << v.k << ", a=" << v.a << ")";
            else if constexpr (std::is_same_v<V, DirichletL>) os << "dirichlet_l(k=" << v.k << ", " << v.chi.describe() << ")";
            else if constexpr (std::is_same_v<V, DedekindQuadratic>) os << "dedekind_quadratic(D=" << v.D << ")";
            else os << "constant(" << v.value.real() << (v.value.imag() < 0 ? "" : "+") << v.value.imag() << "i)";
        },
        f);
    return os.str();
}

/// Location of the (unique) pole, if any.
inline std::optional<cplx> pole_of(const ZetaFamily& f) {
    return std::visit(
        [](const auto& v) -> std::optional<cplx> {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, ConstantFn>) return std::nullopt;
            else if constexpr (std::is_same_v<V, DirichletL>) {
                if (!v.chi.is_principal()) return std::nullopt;
                return cplx(1.0, 0.0);
            } else return cplx(1.0, 0.0);
        },
        f);
}

/// Abscissa c below which the ergodic limit is not asserted.
inline double abscissa(const ZetaFamily& f) {
    if (std::holds_alternative<DedekindQuadratic>(f)) return 0.0;
    if (std::holds_alternative<ConstantFn>(f)) return -std::numeric_limits<double>::infinity();
    return -0.5;
}

/// Value of the Dirichlet series constant term a_1 (the large-height mean of f).
inline cplx dirichlet_mean(const ZetaFamily& f) {
    return std::visit(
        [](const auto& v) -> cplx {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, ConstantFn>) return v.value;
            else if constexpr (std::is_same_v<V, DedekindQuadratic>) return 1.0;
            else if constexpr (std::is_same_v<V, Hurwitz>) return (v.k == 0 && v.a == 0.0) ? 1.0 : 0.0;
            else if constexpr (std::is_same_v<V, DirichletL>) return v.k == 0 ? v.chi(1) : cplx(0.0);
            else return v.k == 0 ? 1.0 : 0.0;
        },
        f);
}

// ---------------------------------------------------------------------------
// Euler-Maclaurin core for the standard Hurwitz zeta sum_{j>=0} (j+x)^{-s}
// ---------------------------------------------------------------------------

struct Evaluation {
    Jet jet;
    double error = 0.0;  // estimated absolute error of the leading requested coefficient
    bool converged = true;
};

class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& what, double bound) : std::runtime_error(what), bound_(bound) {}
    [[nodiscard]] double achieved_bound() const { return bound_; }

private:
    double bound_;
};

inline constexpr double kTargetRelative = 1e-10;

namespace detail {

inline constexpr int kMaxBernoulli = 80;

inline const std::array<double, kMaxBernoulli + 1>& bernoulli_over_factorial() {
    static const std::array<double, kMaxBernoulli + 1> table = [] {
        std::array<double, kMaxBernoulli + 1> t{};
        double fact = 1.0;
        for (int p = 1; p <= kMaxBernoulli; ++p) {
            fact *= static_cast<double>((2 * p - 1) * (2 * p));
            t[p] = boost::math::bernoulli_b2n<double>(p) / fact;
        }
        return t;
    }();
    return table;
}

inline const std::vector<double>& log_table() {
    static const std::vector<double> table = [] {
        std::vector<double> t(1u << 16);
        for (std::size_t n = 1; n < t.size(); ++n) t[n] = std::log(static_cast<double>(n));
        return t;
    }();
    return table;
}

struct EMParts {
    Jet regular;     // main sum + X^{-s}/2 + Bernoulli corrections
    Jet pole_num;    // X^{1-s}, to be divided by (s-1)
    double error = 0.0;
    double scale = 0.0;
    bool ok = true;
};

inline EMParts em_parts(cplx s0, double x, int size, int num_size, int M, double tol) {
    EMParts out;
    out.regular = Jet(size);
    const bool integer_shift = (x == 1.0);
    const auto& logs = log_table();
    double abs_sum = 0.0;
    for (int j = 0; j < M; ++j) {
        const double base = j + x;
        const double L = (integer_shift && static_cast<std::size_t>(j + 1) < logs.size())
                             ? logs[static_cast<std::size_t>(j + 1)]
                             : std::log(base);
        const double mag = std::exp(-s0.real() * L);
        const double ph = -s0.imag() * L;
        cplx v(mag * std::cos(ph), mag * std::sin(ph));
        abs_sum += mag;
        out.regular.c[0] += v;
        for (int m = 1; m < size; ++m) {
            v *= -L / m;
            out.regular.c[m] += v;
        }
    }
    const double X = M + x;
    const double LX = std::log(X);
    const Jet E = Jet::exp_neg_linear(std::max(size, num_size), s0, LX);
    out.pole_num = E.truncated(num_size) * X;
    Jet half = E.truncated(size) * 0.5;
    out.regular += half;

    const auto& B = bernoulli_over_factorial();
    Jet poch = Jet::variable(size, s0);  // (s)_1 = s
    const double inv_X2 = 1.0 / (X * X);
    double xpow = 1.0 / X;               // X^{-2p+1}
    const Jet Es = E.truncated(size);
    double prev = std::numeric_limits<double>::infinity();
    double scale = std::max(out.regular.norm(), 1e-300);
    bool converged = false;
    double last = 0.0;
    for (int p = 1; p <= kMaxBernoulli; ++p) {
        Jet term = poch * Es;
        term *= B[p] * xpow;
        const double tn = term.norm();
        out.regular += term;
        last = tn;
        if (tn <= tol * scale && p >= 2) {
            converged = true;
            break;
        }
        if (tn > prev && p > 3) break;  // asymptotic series started to diverge
        prev = tn;
        poch.mul_linear(s0 + static_cast<double>(2 * p - 1));
        poch.mul_linear(s0 + static_cast<double>(2 * p));
        xpow *= inv_X2;
    }
    out.scale = std::max(out.regular.norm(), 1e-300);
    out.error = last + 4.0 * std::numeric_limits<double>::epsilon() * abs_sum;
    out.ok = converged;
    return out;
}

/// Size-one specialisation of em_parts: returns H(s0, x) directly.
inline cplx em_scalar(cplx s0, double x, int M, double tol, double& error, bool& ok) {
    const bool integer_shift = (x == 1.0);
    const auto& logs = log_table();
    double abs_sum = 0.0;
    cplx sum = 0.0;
    for (int j = 0; j < M; ++j) {
        const double L = (integer_shift && static_cast<std::size_t>(j + 1) < logs.size())
                             ? logs[static_cast<std::size_t>(j + 1)]
                             : std::log(j + x);
        const double mag = std::exp(-s0.real() * L);
        const double ph = -s0.imag() * L;
        sum += cplx(mag * std::cos(ph), mag * std::sin(ph));
        abs_sum += mag;
    }
    const double X = M + x;
    const cplx E = std::exp(-s0 * std::log(X));
    sum += E * X / (s0 - 1.0) + 0.5 * E;
    const auto& B = bernoulli_over_factorial();
    cplx poch = s0;
    const double inv_X2 = 1.0 / (X * X);
    double xpow = 1.0 / X;
    double prev = std::numeric_limits<double>::infinity(), last = 0.0;
    const double scale = std::max(std::abs(sum), 1e-300);
    ok = false;
    for (int p = 1; p <= kMaxBernoulli; ++p) {
        const cplx term = poch * E * (B[p] * xpow);
        const double tn = std::abs(term);
        sum += term;
        last = tn;
        if (tn <= tol * scale && p >= 2) {
            ok = true;
            break;
        }
        if (tn > prev && p > 3) break;
        prev = tn;
        poch *= (s0 + static_cast<double>(2 * p - 1)) * (s0 + static_cast<double>(2 * p));
        xpow *= inv_X2;
    }
    error = last + 4.0 * std::numeric_limits<double>::epsilon() * abs_sum;
    return sum;
}

inline int initial_cutoff(cplx s0, int size) {
    return std::max(12 + 2 * size, static_cast<int>(std::ceil(0.4 * std::abs(s0.imag()) + 0.25 * std::abs(s0.real()))));
}

}  // namespace detail

/// Taylor jet (in s) of the standard Hurwitz zeta sum_{j>=0}(j+x)^{-s}, x > 0, s != 1.
inline Evaluation hurwitz_std_jet(cplx s0, double x, int size, double tol = 1e-15) {
    if (!(x > 0.0)) throw std::domain_error("hurwitz_std_jet: shift must be positive");
    if (s0 == cplx(1.0, 0.0)) throw std::domain_error("hurwitz zeta evaluated at its pole s=1");
    int M = detail::initial_cutoff(s0, size);
    if (size == 1) {
        for (int attempt = 0; attempt < 8; ++attempt, M *= 2) {
            Evaluation ev;
            ev.jet.c[0] = detail::em_scalar(s0, x, M, tol, ev.error, ev.converged);
            if (ev.converged || attempt == 7) return ev;
        }
    }
    for (int attempt = 0; attempt < 8; ++attempt, M *= 2) {
        auto parts = detail::em_parts(s0, x, size, size, M, tol);
        if (!parts.ok && attempt < 7) continue;
        Evaluation ev;
        ev.jet = parts.regular + parts.pole_num * Jet::reciprocal_linear(size, s0 - 1.0);
        ev.error = parts.error;
        ev.converged = parts.ok;
        return ev;
    }
    throw std::logic_error("unreachable");
}

namespace detail {

inline Jet q_power(cplx s0, double q, int size) { return Jet::exp_neg_linear(size, s0, std::log(q)); }

/// sum_r chi(r) q^{-s} H(s, r/q), with the pole numerators combined before division.
inline Evaluation dirichlet_l_jet(cplx s0, const DirichletCharacter& chi, int size, double tol) {
    const std::uint64_t q = chi.modulus();
    cplx chi_sum = 0.0;
    for (std::uint64_t r = 1; r <= q; ++r) chi_sum += chi(static_cast<std::int64_t>(r));
    const bool has_pole = std::abs(chi_sum) > 1e-9;
    if (has_pole && s0 == cplx(1.0, 0.0))
        throw std::domain_error("L-function of a principal character evaluated at its pole s=1");
    const cplx delta = s0 - 1.0;
    const bool synthetic = !has_pole && std::abs(delta) < 0.5;
    const int extra = synthetic ? 30 : 0;
    const int num_size = std::min(size + extra, Jet::kCapacity);
    int M = std::max(initial_cutoff(s0, size), 16);
    const double q_scale = std::exp(-s0.real() * std::log(static_cast<double>(q)));
    if (size == 1 && !synthetic) {
        for (int attempt = 0; attempt < 8; ++attempt, M *= 2) {
            cplx sum = 0.0;
            double err = 0.0;
            bool ok = true;
            for (std::uint64_t r = 1; r <= q; ++r) {
                const cplx c = chi(static_cast<std::int64_t>(r));
                if (c == cplx(0.0)) continue;
                double e = 0.0;
                bool rok = false;
                sum += c * em_scalar(s0, static_cast<double>(r) / static_cast<double>(q), M, tol, e, rok);
                err += e;
                ok = ok && rok;
            }
            if (!ok && attempt < 7) continue;
            Evaluation ev;
            ev.jet.c[0] = std::exp(-s0 * std::log(static_cast<double>(q))) * sum;
            ev.error = err * q_scale;
            ev.converged = ok;
            return ev;
        }
    }
    for (int attempt = 0; attempt < 8; ++attempt, M *= 2) {
        Jet regular(size), pole_num(num_size);
        double err = 0.0;
        bool ok = true;
        for (std::uint64_t r = 1; r <= q; ++r) {
            const cplx c = chi(static_cast<std::int64_t>(r));
            if (c == cplx(0.0)) continue;
            auto parts = em_parts(s0, static_cast<double>(r) / static_cast<double>(q), size, num_size, M, tol);
            ok = ok && parts.ok;
            regular += parts.regular * c;
            pole_num += parts.pole_num * c;
            err += parts.error;
        }
        if (!ok && attempt < 7) continue;
        Jet pole_part = synthetic ? divide_by_root(pole_num, delta, size)
                                  : pole_num.truncated(size) * Jet::reciprocal_linear(size, delta);
        Evaluation ev;
        ev.jet = q_power(s0, static_cast<double>(q), size) * (regular + pole_part);
        ev.error = err * q_scale;
        ev.converged = ok;
        return ev;
    }
    throw std::logic_error("unreachable");
}

}  // namespace detail

/// Jet of the family's function f around s0 with `size` Taylor coefficients
/// (coefficient j equals f^{(j)}(s0)/j!).
inline Evaluation evaluate_jet(const ZetaFamily& family, cplx s0, int size = 1, double tol = 1e-15) {
    const int k = derivative_order(family);
    const int base_size = k + size;
    if (base_size > Jet::kCapacity - 31) throw std::out_of_range("evaluate_jet: requested order too high");
    auto pole = pole_of(family);
    if (pole && s0 == *pole) throw std::domain_error(describe(family) + " evaluated at its pole");

    Evaluation base = std::visit(
        [&](const auto& v) -> Evaluation {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Riemann>) return hurwitz_std_jet(s0, 1.0, base_size, tol);
            else if constexpr (std::is_same_v<V, Hurwitz>) return hurwitz_std_jet(s0, 1.0 + v.a, base_size, tol);
            else if constexpr (std::is_same_v<V, DirichletL>) return detail::dirichlet_l_jet(s0, v.chi, base_size, tol);
            else if constexpr (std::is_same_v<V, DedekindQuadratic>) {
                auto z = hurwitz_std_jet(s0, 1.0, base_size, tol);
                auto l = detail::dirichlet_l_jet(s0, DirichletCharacter::kronecker(v.D), base_size, tol);
                Evaluation ev;
                ev.jet = z.jet * l.jet;
                ev.error = z.error * std::abs(l.jet.c[0]) + l.error * std::abs(z.jet.c[0]);
                ev.converged = z.converged && l.converged;
                return ev;
            } else {
                Evaluation ev;
                ev.jet = Jet::constant(base_size, v.value);
                ev.error = 0.0;
                return ev;
            }
        },
        family);
    if (k == 0) return base;
    // shift: coefficient j of f = C(k+j, j) * coefficient (k+j) of the base function times k!
    Evaluation out;
    out.jet = Jet(size);
    double kfact = 1.0;
    for (int i = 2; i <= k; ++i) kfact *= i;
    for (int j = 0; j < size; ++j) {
        double binom = 1.0;
        for (int i = 1; i <= j; ++i) binom = binom * (k + i) / i;
        out.jet.c[j] = base.jet.c[k + j] * (kfact * binom);
    }
    out.error = base.error * kfact;
    out.converged = base.converged;
    return out;
}

struct PointValue {
    cplx value;
    double error = 0.0;
    bool converged = true;
};

inline PointValue evaluate_detailed(const ZetaFamily& family, cplx s) {
    auto ev = evaluate_jet(family, s, 1);
    return {ev.jet.c[0], ev.error, ev.converged};
}

/// Value of the family's function at s; throws accuracy_error when the
/// Euler-Maclaurin remainder bound misses the relative target.
inline cplx evaluate(const ZetaFamily& family, cplx s) {
    auto pv = evaluate_detailed(family, s);
    const double rel = pv.error / std::max(std::abs(pv.value), 1e-300);
    if (!pv.converged && rel > kTargetRelative)
        throw accuracy_error("evaluate: accuracy target missed for " + describe(family), pv.error);
    return pv.value;
}

// ---------------------------------------------------------------------------
// Stieltjes constants
// ---------------------------------------------------------------------------

/// gamma_k(a) = lim_N ( sum_{n=1}^N log^k(n+a)/(n+a) - log^{k+1}(N+a)/(k+1) ).
inline double stieltjes(int k, double a = 0.0) {
    if (k < 0 || k > kMaxDerivative) throw std::invalid_argument("stieltjes: k out of range");
    if (!(a >= 0.0 && a < 1.0)) throw std::invalid_argument("stieltjes: a must lie in [0,1)");
    using R = long double;
    const int M = 24;
    auto g = [&](R y) {
        const R L = std::log(y);
        return std::pow(L, k) / y;
    };
    R sum = 0.0L;
    for (int n = 1; n < M; ++n) sum += g(static_cast<R>(n) + a);
    const R y = static_cast<R>(M) + a;
    const R Ly = std::log(y);
    sum -= std::pow(Ly, k + 1) / (k + 1);
    sum += g(y) / 2;
    // derivatives of g: y^{-1-j} P_j(L), P_{j+1} = -(1+j) P_j + P_j'
    std::vector<R> P(static_cast<std::size_t>(k) + 1, 0.0L);
    P[static_cast<std::size_t>(k)] = 1.0L;
    auto advance = [&](int j) {
        std::vector<R> Q(P.size(), 0.0L);
        for (std::size_t d = 0; d < P.size(); ++d) {
            Q[d] += -static_cast<R>(1 + j) * P[d];
            if (d > 0) Q[d - 1] += static_cast<R>(d) * P[d];
        }
        P.swap(Q);
    };
    auto evalP = [&](R L) {
        R acc = 0.0L;
        for (std::size_t d = P.size(); d-- > 0;) acc = acc * L + P[d];
        return acc;
    };
    R fact = 1.0L;
    int j = 0;
    for (int p = 1; p <= 40; ++p) {
        while (j < 2 * p - 1) advance(j++);
        fact *= static_cast<R>((2 * p - 1) * (2 * p));
        const R term = static_cast<R>(boost::math::bernoulli_b2n<long double>(p)) / fact *
                       evalP(Ly) * std::pow(y, static_cast<R>(-2 * p));
        sum -= term;
        if (std::fabs(term) < 1e-21L * (1.0L + std::fabs(sum))) break;
    }
    return static_cast<double>(sum);
}

// ---------------------------------------------------------------------------
// Laurent data
// ---------------------------------------------------------------------------

struct LaurentData {
    std::optional<cplx> pole;
    int order = 0;
    std::vector<cplx> coeffs;  // a_{-m}, ..., a_{-1}, a_0

    /// a_{-n} for 0 <= n <= m.
    [[nodiscard]] cplx a(int n) const {
        if (n < 0 || n > order) throw std::out_of_range("LaurentData::a index");
        return coeffs[static_cast<std::size_t>(order - n)];
    }
};

/// Taylor-type coefficients c_n (n >= -1) of a function with at most a simple
/// pole at s=1, by the trapezoidal rule on the circle |s-1| = r.
template <class F>
std::vector<cplx> circle_coefficients(F&& fn, int n_max, double r = 1.0, int nodes = 64) {
    std::vector<cplx> vals(static_cast<std::size_t>(nodes));
    for (int j = 0; j < nodes; ++j) {
        const double th = 2.0 * std::numbers::pi * (j + 0.5) / nodes;
        vals[static_cast<std::size_t>(j)] = fn(1.0 + std::polar(r, th));
    }
    std::vector<cplx> c;
    for (int n = -1; n <= n_max; ++n) {
        cplx acc = 0.0;
        for (int j = 0; j < nodes; ++j) {
            const double th = 2.0 * std::numbers::pi * (j + 0.5) / nodes;
            acc += vals[static_cast<std::size_t>(j)] * std::polar(std::pow(r, -n), -n * th);
        }
        c.push_back(acc / static_cast<double>(nodes));
    }
    return c;
}

/// Residue at s=1 of the base (k = 0) function, from its analytic description.
inline cplx base_residue(const ZetaFamily& family) {
    return std::visit(
        [](const auto& v) -> cplx {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Riemann> || std::is_same_v<V, Hurwitz>) return 1.0;
            else if constexpr (std::is_same_v<V, DirichletL>) {
                if (!v.chi.is_principal()) return 0.0;
                double prod = 1.0;
                for (auto p : prime_divisors(v.chi.modulus())) prod *= 1.0 - 1.0 / static_cast<double>(p);
                return prod;
            } else if constexpr (std::is_same_v<V, DedekindQuadratic>) {
                return evaluate(DirichletL{0, DirichletCharacter::kronecker(v.D)}, cplx(1.0, 0.0));
            } else return 0.0;
        },
        family);
}

inline LaurentData laurent_data(const ZetaFamily& family) {
    validate(family);
    LaurentData ld;
    const auto pole = pole_of(family);
    if (!pole) {
        ld.order = 0;
        ld.coeffs = {cplx(0.0)};
        return ld;
    }
    const int k = derivative_order(family);
    ld.pole = pole;
    ld.order = k + 1;
    ld.coeffs.assign(static_cast<std::size_t>(k) + 2, cplx(0.0));
    double kfact = 1.0;
    for (int i = 2; i <= k; ++i) kfact *= i;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const cplx residue = base_residue(family);
    ld.coeffs.front() = sign * kfact * residue;
    if (std::holds_alternative<Riemann>(family)) {
        ld.coeffs.back() = sign * stieltjes(k, 0.0);
    } else if (const auto* h = std::get_if<Hurwitz>(&family)) {
        ld.coeffs.back() = sign * stieltjes(k, h->a);
    } else {
        const ZetaFamily base = with_derivative_order(family, 0);
        auto c = circle_coefficients([&](cplx z) { return evaluate(base, z); }, k);
        ld.coeffs.back() = kfact * c[static_cast<std::size_t>(k) + 1];
    }
    return ld;
}

/// Relative discrepancy between the k-th derivative evaluator and Cauchy-circle
/// differentiation of the (k-1)-th derivative on 64 trapezoidal nodes.
inline double derivative_crosscheck(const ZetaFamily& family, cplx s, double radius, int nodes = 64) {
    const int k = derivative_order(family);
    if (!(radius > 0.0)) throw std::invalid_argument("derivative_crosscheck: radius must be > 0");
    if (auto pole = pole_of(family); pole && std::abs(s - *pole) <= radius)
        throw std::domain_error("derivative_crosscheck: pole inside the disk");
    const ZetaFamily lower = std::holds_alternative<ConstantFn>(family) || k == 0
                                 ? family
                                 : with_derivative_order(family, k - 1);
    const cplx direct = std::holds_alternative<ConstantFn>(family) || k == 0
                            ? evaluate_jet(family, s, 2).jet.derivative(1)
                            : evaluate(family, s);
    cplx acc = 0.0;
    for (int j = 0; j < nodes; ++j) {
        const double th = 2.0 * std::numbers::pi * j / nodes;
        const cplx e = std::polar(1.0, th);
        acc += evaluate(lower, s + radius * e) / e;
    }
    const cplx circle = acc / (static_cast<double>(nodes) * radius);
    const double ref = std::abs(direct);
    return ref > 0.0 ? std::abs(circle - direct) / ref : std::abs(circle - direct);
}

}  // namespace boolezeta
