#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "boolezeta/dynamics.hpp"
#include "boolezeta/quadrature.hpp"
#include "boolezeta/zeta.hpp"

namespace boolezeta {

// ---------------------------------------------------------------------------
// Pole corrections and closed forms
// ---------------------------------------------------------------------------

/// Sign joining the two terms of P_k and B_m.
enum class PoleSign { minus, plus };
/// Denominator of the m = 1 line extension: alpha^2 + (t0 - t - beta)^2 or alpha^2 + t^2 + beta^2.
enum class LineDenominator { shifted, literal };

struct Conventions {
    PoleSign pole_sign = PoleSign::minus;
    LineDenominator line = LineDenominator::shifted;
};

inline const char* to_string(PoleSign s) { return s == PoleSign::minus ? "minus" : "plus"; }
inline const char* to_string(LineDenominator d) {
    return d == LineDenominator::shifted ? "alpha^2+(t0-t-beta)^2" : "alpha^2+(t^2+beta^2)";
}

namespace detail {

inline cplx ipow(cplx z, int n) {
    cplx r = 1.0;
    for (int i = 0; i < n; ++i) r *= z;
    return r;
}

inline cplx checked_inverse_power(cplx base, int n, const char* what) {
    if (std::abs(base) < 1e-300) throw std::domain_error(std::string(what) + ": degenerate denominator");
    return 1.0 / ipow(base, n);
}

}  // namespace detail

/// P_k(s) = ((-1)^k k! / i^{k+1}) ( (beta + i alpha - i(s-1))^{-(k+1)} -/+ (beta - i alpha - i(s-1))^{-(k+1)} ).
inline cplx pole_correction_P(int k, cplx s, const MapParams& p, PoleSign sign = PoleSign::minus) {
    if (k < 0) throw std::invalid_argument("pole_correction_P: k must be >= 0");
    const cplx I(0.0, 1.0);
    double kfact = 1.0;
    for (int i = 2; i <= k; ++i) kfact *= i;
    const double pre_sign = (k % 2 == 0) ? 1.0 : -1.0;
    const cplx pre = pre_sign * kfact / detail::ipow(I, k + 1);
    const cplx t1 = detail::checked_inverse_power(p.beta + I * p.alpha - I * (s - 1.0), k + 1, "pole_correction_P");
    const cplx t2 = detail::checked_inverse_power(p.beta - I * p.alpha - I * (s - 1.0), k + 1, "pole_correction_P");
    return pre * (sign == PoleSign::minus ? t1 - t2 : t1 + t2);
}

/// B_m(s0) = sum_{n=1}^m a_{-n} [ 1/(i^n (beta + i alpha - i(s-s0))^n) -/+ 1/(i^n (beta - i alpha - i(s-s0))^n) ].
inline cplx pole_correction_B(const LaurentData& ld, cplx s, const MapParams& p, PoleSign sign = PoleSign::minus) {
    if (ld.order == 0 || !ld.pole) return 0.0;
    const cplx I(0.0, 1.0);
    const cplx s0 = *ld.pole;
    cplx acc = 0.0;
    for (int n = 1; n <= ld.order; ++n) {
        const cplx a = ld.a(n);
        if (a == cplx(0.0)) continue;
        const cplx in = detail::ipow(I, n);
        const cplx t1 = detail::checked_inverse_power(p.beta + I * p.alpha - I * (s - s0), n, "pole_correction_B");
        const cplx t2 = detail::checked_inverse_power(p.beta - I * p.alpha - I * (s - s0), n, "pole_correction_B");
        acc += a / in * (sign == PoleSign::minus ? t1 - t2 : t1 + t2);
    }
    return acc;
}

struct LimitRequest {
    ZetaFamily family;
    cplx s;
    MapParams params;
};

enum class Region { no_pole, right_half_plane, strip, special_point, pole_line };

inline const char* to_string(Region r) {
    switch (r) {
        case Region::no_pole: return "no_pole";
        case Region::right_half_plane: return "right_half_plane";
        case Region::strip: return "strip";
        case Region::special_point: return "special_point";
        default: return "pole_line";
    }
}

inline void validate(const LimitRequest& req) {
    validate(req.family);
    req.params.validate();
    const double c = abscissa(req.family);
    if (!(req.s.real() > c))
        throw std::invalid_argument("s: Re s = " + std::to_string(req.s.real()) +
                                    " must exceed the abscissa c = " + std::to_string(c));
}

inline Region classify(const LimitRequest& req, const LaurentData& ld) {
    if (!ld.pole || ld.order == 0) return Region::no_pole;
    const cplx s0 = *ld.pole;
    const double sigma0 = s0.real();
    if (req.s.real() > sigma0) return Region::right_half_plane;
    if (req.s.real() == sigma0) return Region::pole_line;
    const cplx special = s0 - req.params.alpha - cplx(0.0, req.params.beta);
    if (req.s == special) return Region::special_point;
    return Region::strip;
}

struct ClosedForm {
    cplx value;
    Region region = Region::no_pole;
};

inline ClosedForm closed_form_limit(const LimitRequest& req, const LaurentData& ld, const Conventions& conv = {}) {
    validate(req);
    const Region region = classify(req, ld);
    const MapParams& p = req.params;
    const cplx shifted = req.s + p.alpha + cplx(0.0, p.beta);
    switch (region) {
        case Region::no_pole:
        case Region::right_half_plane:
            return {evaluate(req.family, shifted), region};
        case Region::strip:
            return {evaluate(req.family, shifted) + pole_correction_B(ld, req.s, p, conv.pole_sign), region};
        case Region::special_point: {
            cplx acc = 0.0;
            for (int n = 0; n <= ld.order; ++n) acc += ld.a(n) / detail::ipow(cplx(-2.0 * p.alpha), n);
            return {acc, region};
        }
        case Region::pole_line: {
            if (ld.order != 1)
                throw std::invalid_argument("s lies on the pole line of " + describe(req.family) +
                                            ", where only simple poles admit a limit value");
            const double t = req.s.imag(), t0 = ld.pole->imag();
            const double denom = conv.line == LineDenominator::shifted
                                     ? p.alpha * p.alpha + (t0 - t - p.beta) * (t0 - t - p.beta)
                                     : p.alpha * p.alpha + (t * t + p.beta * p.beta);
            return {evaluate(req.family, shifted) - ld.a(1) * p.alpha / denom, region};
        }
    }
    throw std::logic_error("unreachable");
}

inline ClosedForm closed_form_limit(const LimitRequest& req, const Conventions& conv = {}) {
    validate(req);
    return closed_form_limit(req, laurent_data(req.family), conv);
}

// ---------------------------------------------------------------------------
// Integrands and tail models
// ---------------------------------------------------------------------------

enum class Transform { identity, abs, abs_power, log_abs };

inline const char* to_string(Transform t) {
    switch (t) {
        case Transform::identity: return "identity";
        case Transform::abs: return "abs";
        case Transform::abs_power: return "abs_power";
        default: return "log_abs";
    }
}

struct IntegrandSpec {
    ZetaFamily family = Riemann{0};
    Transform transform = Transform::identity;
    double power = 2.0;           // exponent for abs_power
    double argument_scale = 1.0;  // f is sampled at s + i * argument_scale * tau
};

inline cplx apply_transform(cplx v, const IntegrandSpec& spec) {
    switch (spec.transform) {
        case Transform::identity: return v;
        case Transform::abs: return std::abs(v);
        case Transform::abs_power: return std::pow(std::abs(v), spec.power);
        default: return std::log(std::abs(v));
    }
}

inline bool has_real_coefficients(const ZetaFamily& f) {
    if (const auto* l = std::get_if<DirichletL>(&f)) return l->chi.is_real();
    if (const auto* c = std::get_if<ConstantFn>(&f)) return c->value.imag() == 0.0;
    return true;
}

/// Second and fourth moment densities of zeta from the moment recipe, as
/// functions of L = log(t / 2 pi).
class MomentDensity {
public:
    /// |zeta^{(k)}(sigma + it)|^2 ; returns nullopt when no model is available.
    static std::optional<MomentDensity> second(int k, double sigma) {
        MomentDensity d;
        d.kind_ = Kind::second;
        const double u0 = 2.0 * sigma - 1.0;
        const int n = 2 * k;
        if (sigma == 0.5) {
            // Taylor coefficients of A(u) = zeta(1+u) - 1/u are (-1)^j gamma_j / j!
            std::vector<double> A(static_cast<std::size_t>(n) + 1);
            double jf = 1.0;
            for (int j = 0; j <= n; ++j) {
                if (j > 0) jf *= j;
                A[static_cast<std::size_t>(j)] = ((j % 2) ? -1.0 : 1.0) * stieltjes(j, 0.0) / jf;
            }
            d.half_line_ = true;
            d.A_ = A;
            d.order_ = n;
            return d;
        }
        if (std::fabs(u0) < 0.02 || std::fabs(u0) > 0.98) return std::nullopt;
        auto right = evaluate_jet(Riemann{0}, cplx(1.0 + u0), n + 1).jet;
        auto left = evaluate_jet(Riemann{0}, cplx(1.0 - u0), n + 1).jet;
        d.order_ = n;
        d.u0_ = u0;
        d.right_ = right.derivative(n).real();
        for (int j = 0; j <= n; ++j) d.left_.push_back(left.derivative(j).real());
        return d;
    }

    /// |zeta(1/2 + it)|^4 via the six-term recipe, reduced to its quartic polynomial in L.
    static MomentDensity fourth() {
        MomentDensity d;
        d.kind_ = Kind::fourth;
        const std::array<double, 5> Ls{0.0, 2.0, 4.0, 6.0, 8.0};
        std::array<double, 5> ys{};
        for (std::size_t i = 0; i < Ls.size(); ++i) ys[i] = fourth_direct(Ls[i]);
        // Newton divided differences, then expand to monomial coefficients
        std::array<double, 5> c = ys;
        for (std::size_t j = 1; j < 5; ++j)
            for (std::size_t i = 4; i >= j; --i) c[i] = (c[i] - c[i - 1]) / (Ls[i] - Ls[i - j]);
        std::vector<double> poly{c[4]};
        for (std::size_t jj = 4; jj-- > 0;) {
            std::vector<double> next(poly.size() + 1, 0.0);
            for (std::size_t m = 0; m < poly.size(); ++m) {
                next[m + 1] += poly[m];
                next[m] -= poly[m] * Ls[jj];
            }
            next[0] += c[jj];
            poly.swap(next);
        }
        d.poly_ = poly;
        d.fit_residual_ = std::fabs(d(3.0) - fourth_direct(3.0));
        return d;
    }

    double operator()(double L) const {
        if (kind_ == Kind::fourth) {
            double acc = 0.0;
            for (std::size_t i = poly_.size(); i-- > 0;) acc = acc * L + poly_[i];
            return acc;
        }
        if (half_line_) {
            // coefficient of u^n in A(u) + e^{-uL} A(-u) + (1 - e^{-uL})/u
            const int n = order_;
            double coef = A_[static_cast<std::size_t>(n)];
            double e = 1.0;  // (-L)^i / i!
            for (int i = 0; i <= n; ++i) {
                if (i > 0) e *= -L / i;
                const int j = n - i;
                coef += e * A_[static_cast<std::size_t>(j)] * ((j % 2) ? -1.0 : 1.0);
            }
            coef -= e * (-L) / (n + 1);
            double nf = 1.0;
            for (int i = 2; i <= n; ++i) nf *= i;
            return coef * nf;
        }
        const int n = order_;
        double acc = right_;
        double binom = 1.0, Lpow = 1.0;
        const double ex = std::exp(-u0_ * L);
        for (int j = 0; j <= n; ++j) {
            if (j > 0) {
                binom = binom * (n - j + 1) / j;
                Lpow *= -L;
            }
            const double sgn = ((n - j) % 2) ? -1.0 : 1.0;
            acc += binom * Lpow * ex * sgn * left_[static_cast<std::size_t>(n - j)];
        }
        return acc;
    }

    [[nodiscard]] const std::vector<double>& polynomial() const { return poly_; }
    [[nodiscard]] double fit_residual() const { return fit_residual_; }

    static double fourth_direct(double L) {
        const std::array<double, 4> v{1.0, 2.1, 3.3, 4.6};
        const double r = 0.1;
        const int nodes = 48;
        auto z = [](cplx x) { return evaluate(Riemann{0}, x); };
        auto Z = [&](cplx a, cplx b, cplx c, cplx dd) {
            return z(1.0 + a + c) * z(1.0 + a + dd) * z(1.0 + b + c) * z(1.0 + b + dd) / z(2.0 + a + b + c + dd);
        };
        cplx acc = 0.0;
        for (int j = 0; j < nodes; ++j) {
            const cplx e = std::polar(r, 2.0 * std::numbers::pi * (j + 0.5) / nodes);
            const cplx a = e * v[0], b = e * v[1], c = e * v[2], dd = e * v[3];
            cplx w = Z(a, b, c, dd);
            w += std::exp(-(a + c) * L) * Z(-c, b, -a, dd);
            w += std::exp(-(a + dd) * L) * Z(-dd, b, c, -a);
            w += std::exp(-(b + c) * L) * Z(a, -c, -b, dd);
            w += std::exp(-(b + dd) * L) * Z(a, -dd, c, -b);
            w += std::exp(-(a + b + c + dd) * L) * Z(-c, -dd, -a, -b);
            acc += w;
        }
        return (acc / static_cast<double>(nodes)).real();
    }

private:
    enum class Kind { second, fourth } kind_ = Kind::second;
    bool half_line_ = false;
    int order_ = 0;
    double u0_ = 0.0, right_ = 0.0;
    std::vector<double> left_, A_, poly_;
    double fit_residual_ = 0.0;
};

// ---------------------------------------------------------------------------
// Cauchy-weighted quadrature oracle
// ---------------------------------------------------------------------------

struct QuadratureSettings {
    double truncation = 1000.0;
    std::size_t node_budget = 4'000'000;
    double tolerance = 1e-7;

    void validate() const {
        if (!(truncation >= 50.0)) throw std::invalid_argument("quadrature.truncation must be >= 50");
        if (node_budget < 1000) throw std::invalid_argument("quadrature.node_budget must be >= 1000");
        if (!(tolerance > 0.0)) throw std::invalid_argument("quadrature.tolerance must be > 0");
    }
};

enum class TailModel { dirichlet_mean, log_mean, second_moment, fourth_moment, empirical };

inline const char* to_string(TailModel m) {
    switch (m) {
        case TailModel::dirichlet_mean: return "dirichlet_mean";
        case TailModel::log_mean: return "log_leading_coefficient";
        case TailModel::second_moment: return "second_moment_recipe";
        case TailModel::fourth_moment: return "fourth_moment_recipe";
        default: return "empirical";
    }
}

struct QuadratureResult {
    cplx value;
    double error = 0.0;             // quadrature error + tail uncertainty
    double quadrature_error = 0.0;  // Kronrod-Gauss estimate of the truncated integral
    double tail_uncertainty = 0.0;  // disagreement between two cutoffs plus model slack
    cplx tail;                      // modelled contribution beyond the cutoff
    TailModel tail_model = TailModel::empirical;
    std::size_t evaluations = 0;
    bool principal_value = false;
    bool flagged = false;
};

namespace detail {

inline double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

/// Cutoff equal to 1 on [0, T/2], 0 beyond T, smooth in between.
inline double cutoff(double r, double T) { return smooth_step((T - r) / (0.5 * T)); }

struct TailIntegrals {
    cplx with_T, with_T2;
};

}  // namespace detail

inline QuadratureResult cauchy_quadrature(const IntegrandSpec& spec, cplx s, const MapParams& p,
                                          const QuadratureSettings& st) {
    validate(spec.family);
    p.validate();
    st.validate();
    if (!(spec.argument_scale > 0.0)) throw std::invalid_argument("argument_scale must be > 0");
    const double T = st.truncation, T2 = 0.75 * T;
    const double scale = spec.argument_scale;
    std::atomic<std::size_t> evals{0};

    auto g = [&](double tau) -> cplx {
        ++evals;
        const cplx z = s + cplx(0.0, scale * tau);
        return apply_transform(evaluate_detailed(spec.family, z).value, spec);
    };
    auto w = [&](double tau) { return cauchy_density(tau, p); };
    auto vec = [&](double tau) -> CVec<4> {
        const double r = std::fabs(tau - p.beta);
        if (r >= T) return {};
        const cplx gw = g(tau) * w(tau);
        return {gw * detail::cutoff(r, T), gw * detail::cutoff(r, T2),
                (r >= 0.5 * T) ? gw : cplx(0.0), (r >= 0.5 * T2 && r <= T2) ? gw : cplx(0.0)};
    };

    // principal value across a simple pole on the contour
    const auto pole = pole_of(spec.family);
    const bool on_line = pole && s.real() == pole->real();
    std::optional<double> tau_c;
    if (on_line) {
        if (spec.transform != Transform::identity)
            throw std::invalid_argument("cauchy_quadrature: a pole on the contour is only integrable "
                                        "(as a principal value) for the identity transform");
        if (laurent_data(spec.family).order != 1)
            throw std::invalid_argument("cauchy_quadrature: pole of order > 1 on the contour");
        tau_c = (pole->imag() - s.imag()) / scale;
        if (std::fabs(*tau_c - p.beta) > 0.5 * T2 - 1.0)
            throw std::invalid_argument("cauchy_quadrature: pole lies outside the untruncated zone");
    }
    const bool symmetric = !on_line && p.beta == 0.0 && s.imag() == 0.0 && has_real_coefficients(spec.family);

    std::vector<double> marks;
    const double lo = symmetric ? p.beta : p.beta - T, hi = p.beta + T;
    for (double m : {0.5 * T2, 0.5 * T, T2}) {
        marks.push_back(p.beta + m);
        if (!symmetric) marks.push_back(p.beta - m);
    }
    marks.push_back(lo);
    marks.push_back(hi);
    const double fold_h = 0.25;
    if (tau_c) {
        marks.push_back(*tau_c - fold_h);
        marks.push_back(*tau_c + fold_h);
    }
    std::sort(marks.begin(), marks.end());
    std::vector<double> bp;
    for (std::size_t i = 0; i + 1 < marks.size(); ++i) {
        const double a = marks[i], b = marks[i + 1];
        if (tau_c && a == *tau_c - fold_h) {
            bp.push_back(a);
            continue;
        }
        bp.push_back(a);
        double x = a;
        while (true) {
            const double height = std::fabs(s.imag() + scale * x) + 1.0;
            const double h = std::clamp(6.0 / (scale * std::log(height + 2.0)), 0.05, 2.0);
            x += h;
            if (x >= b - 0.25 * h) break;
            bp.push_back(x);
        }
        bp.push_back(b);
    }
    AdaptiveSettings as;
    as.abs_tol = 0.25 * st.tolerance;
    QuadratureResult out;
    CVec<4> total{};
    std::array<double, 4> err{};
    std::size_t budget_left = st.node_budget;
    auto accumulate = [&](const AdaptiveResult<4>& r, double factor) {
        for (std::size_t d = 0; d < 4; ++d) {
            total[d] += factor * r.value[d];
            err[d] += factor * r.error[d];
        }
        budget_left = budget_left > r.evaluations ? budget_left - r.evaluations : 0;
    };
    if (tau_c) {
        const double c = *tau_c;
        auto folded = [&](double u) -> CVec<4> {
            const auto a = vec(c + u), b = vec(c - u);
            CVec<4> r;
            for (std::size_t d = 0; d < 4; ++d) r[d] = a[d] + b[d];
            return r;
        };
        // fixed-order rules: the folded integrand is analytic, while adaptive
        // bisection towards u = 0 would only chase cancellation noise
        auto gauss_rule = [&](auto tag) {
            using G = decltype(tag);
            const auto& x = G::abscissa();
            const auto& wt = G::weights();
            const double half = 0.5 * fold_h;
            CVec<4> acc{};
            for (std::size_t i = 0; i < x.size(); ++i) {
                for (double sg : {1.0, -1.0}) {
                    if (x[i] == 0.0 && sg < 0.0) continue;
                    const auto v = folded(half + sg * half * x[i]);
                    for (std::size_t d = 0; d < 4; ++d) acc[d] += v[d] * (wt[i] * half);
                }
            }
            return acc;
        };
        const auto r30 = gauss_rule(boost::math::quadrature::gauss<double, 30>{});
        const auto r20 = gauss_rule(boost::math::quadrature::gauss<double, 20>{});
        AdaptiveResult<4> fr;
        fr.value = r30;
        for (std::size_t d = 0; d < 4; ++d) fr.error[d] = std::abs(r30[d] - r20[d]);
        fr.evaluations = 100;
        accumulate(fr, 1.0);
        out.principal_value = true;
    }
    std::vector<double> joined;
    for (double x : bp)
        if (joined.empty() || x > joined.back()) joined.push_back(x);
    std::vector<std::pair<double, double>> gaps;
    if (tau_c) gaps.emplace_back(*tau_c - fold_h, *tau_c + fold_h);
    auto main_integrand = [&](double tau) -> CVec<4> {
        for (const auto& gp : gaps)
            if (tau > gp.first && tau < gp.second) return {};
        CVec<4> v = vec(tau);
        if (symmetric)
            for (auto& x : v) x = 2.0 * x.real();
        return v;
    };
    as.max_evals = budget_left;
    accumulate(adaptive_gk15<4>(main_integrand, joined, 2, as), 1.0);

    // tail model
    TailModel model = TailModel::empirical;
    std::optional<MomentDensity> density;
    const auto* riemann = std::get_if<Riemann>(&spec.family);
    if (spec.transform == Transform::identity) {
        model = TailModel::dirichlet_mean;
    } else if (spec.transform == Transform::log_abs && std::abs(dirichlet_mean(spec.family)) == 1.0 &&
               s.real() >= 0.5) {
        model = TailModel::log_mean;
    } else if (riemann && spec.transform == Transform::abs_power && spec.power == 2.0 && scale == 1.0) {
        density = MomentDensity::second(riemann->k, s.real());
        if (density) model = TailModel::second_moment;
    } else if (riemann && riemann->k == 0 && spec.transform == Transform::abs_power && spec.power == 4.0 &&
               s.real() == 0.5 && scale == 1.0) {
        density = MomentDensity::fourth();
        model = TailModel::fourth_moment;
    }
    const double a = p.alpha;
    auto wr = [&](double r) { return (a / std::numbers::pi) / (a * a + r * r); };
    auto side_mass = [&](double Tc) {
        // integral over r > 0 of w(r) (1 - cutoff(r, Tc)), one side
        auto f = [&](double r) { return wr(r) * (1.0 - detail::cutoff(r, Tc)); };
        const double inner = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.5 * Tc, Tc, 12, 1e-13);
        return inner + 0.5 - std::atan(Tc / a) / std::numbers::pi;
    };
    auto modelled_tail = [&](double Tc) -> cplx {
        if (model == TailModel::log_mean) return 0.0;
        if (model == TailModel::dirichlet_mean) return dirichlet_mean(spec.family) * (2.0 * side_mass(Tc));
        if (model == TailModel::empirical) {
            const double zone_w = 2.0 * (std::atan(Tc / a) - std::atan(0.5 * Tc / a)) / std::numbers::pi;
            const cplx zone = (Tc == T) ? total[2] : total[3];
            return zone / zone_w * (2.0 * side_mass(Tc));
        }
        cplx acc = 0.0;
        for (double side : {1.0, -1.0}) {
            auto rho = [&](double r) {
                const double height = std::fabs(s.imag() + scale * (p.beta + side * r));
                return (*density)(std::log(height / (2.0 * std::numbers::pi)));
            };
            auto inner = [&](double r) { return rho(r) * wr(r) * (1.0 - detail::cutoff(r, Tc)); };
            acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(inner, 0.5 * Tc, Tc, 12, 1e-13);
            boost::math::quadrature::tanh_sinh<double> ts;
            const double th0 = std::atan(Tc / a);
            auto outer = [&](double th) { return rho(a * std::tan(th)) / std::numbers::pi; };
            acc += ts.integrate(outer, th0, 0.5 * std::numbers::pi);
        }
        return acc;
    };
    const cplx tail_T = modelled_tail(T), tail_T2 = modelled_tail(T2);
    const cplx v1 = total[0] + tail_T, v2 = total[1] + tail_T2;
    out.value = v1;
    out.tail = tail_T;
    out.tail_model = model;
    out.quadrature_error = err[0];
    out.tail_uncertainty = std::abs(v1 - v2) + err[1] + (model == TailModel::empirical ? 0.25 * std::abs(tail_T) : 0.0);
    out.error = out.quadrature_error + out.tail_uncertainty;
    out.evaluations = evals.load();
    out.flagged = !(out.error <= st.tolerance) || !std::isfinite(out.value.real()) || !std::isfinite(out.value.imag());
    return out;
}

// ---------------------------------------------------------------------------
// Moment identities and the Balazard-Saias-Yor functional
// ---------------------------------------------------------------------------

struct IdentityCheck {
    double quadrature = 0.0;
    double quadrature_error = 0.0;
    double closed_form = 0.0;
    bool flagged = false;
};

/// Bracket zeta(2 sigma)/2 + zeta(2 sigma - 1)/(2 sigma - 1), negative on (1/2, 1).
inline double second_moment_bracket(double sigma) {
    return evaluate(Riemann{0}, 2.0 * sigma).real() / 2.0 +
           evaluate(Riemann{0}, 2.0 * sigma - 1.0).real() / (2.0 * sigma - 1.0);
}

/// (1/2pi) int |zeta(sigma+it)|^2 / (sigma^2 + t^2) dt against -(1/sigma)(zeta(2sigma)/2 + zeta(2sigma-1)/(2sigma-1)).
inline IdentityCheck second_moment_identity(double sigma, const QuadratureSettings& st = {}) {
    if (!(sigma > 0.5 && sigma < 1.0)) throw std::invalid_argument("sigma must lie in (1/2, 1)");
    IntegrandSpec spec{Riemann{0}, Transform::abs_power, 2.0, 1.0};
    auto q = cauchy_quadrature(spec, cplx(sigma, 0.0), MapParams{sigma, 0.0}, st);
    IdentityCheck r;
    r.quadrature = q.value.real() / (2.0 * sigma);
    r.quadrature_error = q.error / (2.0 * sigma);
    r.closed_form = -second_moment_bracket(sigma) / sigma;
    r.flagged = q.flagged;
    return r;
}

/// (1/2pi) int |zeta(1/2+it)|^2 / (1/4 + t^2) dt against log(2 pi) - gamma.
inline IdentityCheck half_line_constant(const QuadratureSettings& st = {}) {
    IntegrandSpec spec{Riemann{0}, Transform::abs_power, 2.0, 1.0};
    auto q = cauchy_quadrature(spec, cplx(0.5, 0.0), MapParams{0.5, 0.0}, st);
    IdentityCheck r;
    r.quadrature = q.value.real();
    r.quadrature_error = q.error;
    r.closed_form = std::log(2.0 * std::numbers::pi) - std::numbers::egamma;
    r.flagged = q.flagged;
    return r;
}

/// (1/2pi) int log|zeta(1/2+it)| / (1/4 + t^2) dt, truncated at the configured height with a tail estimate.
inline QuadratureResult bsy_functional(const QuadratureSettings& st = {}) {
    IntegrandSpec spec{Riemann{0}, Transform::log_abs, 2.0, 1.0};
    return cauchy_quadrature(spec, cplx(0.5, 0.0), MapParams{0.5, 0.0}, st);
}

// ---------------------------------------------------------------------------
// Numerical resolution of the two sign/denominator questions
// ---------------------------------------------------------------------------

struct CandidateCheck {
    std::string accepted, rejected;
    double accepted_discrepancy = 0.0, rejected_discrepancy = 0.0;
    double quadrature_error = 0.0;
    cplx quadrature;
    [[nodiscard]] bool decisive() const { return rejected_discrepancy >= 10.0 * accepted_discrepancy; }
};

struct ConventionsResolution {
    Conventions conventions;
    CandidateCheck pole_sign, line_denominator;
};

/// Decides P_k's sign and the line-extension denominator by comparing both
/// candidates against cauchy_quadrature at fixed probe points.
inline ConventionsResolution resolve_conventions(const QuadratureSettings& st = {400.0, 1'000'000, 1e-7}) {
    ConventionsResolution res;
    const IntegrandSpec spec{Riemann{0}, Transform::identity, 2.0, 1.0};
    {
        const MapParams p{1.0, 0.5};
        const cplx s(0.6, 0.3);
        const auto q = cauchy_quadrature(spec, s, p, st);
        const LimitRequest req{Riemann{0}, s, p};
        const auto ld = laurent_data(req.family);
        const cplx minus = closed_form_limit(req, ld, {PoleSign::minus, LineDenominator::shifted}).value;
        const cplx plus = closed_form_limit(req, ld, {PoleSign::plus, LineDenominator::shifted}).value;
        const double dm = std::abs(minus - q.value), dp = std::abs(plus - q.value);
        const bool m_wins = dm <= dp;
        res.conventions.pole_sign = m_wins ? PoleSign::minus : PoleSign::plus;
        res.pole_sign = {m_wins ? "minus" : "plus", m_wins ? "plus" : "minus", std::min(dm, dp), std::max(dm, dp),
                         q.error, q.value};
    }
    {
        const MapParams p{2.0, 1.0};
        const cplx s(1.0, 0.5);
        const auto q = cauchy_quadrature(spec, s, p, st);
        const LimitRequest req{Riemann{0}, s, p};
        const auto ld = laurent_data(req.family);
        const cplx sh = closed_form_limit(req, ld, {res.conventions.pole_sign, LineDenominator::shifted}).value;
        const cplx li = closed_form_limit(req, ld, {res.conventions.pole_sign, LineDenominator::literal}).value;
        const double ds = std::abs(sh - q.value), dl = std::abs(li - q.value);
        const bool s_wins = ds <= dl;
        res.conventions.line = s_wins ? LineDenominator::shifted : LineDenominator::literal;
        res.line_denominator = {to_string(s_wins ? LineDenominator::shifted : LineDenominator::literal),
                                to_string(s_wins ? LineDenominator::literal : LineDenominator::shifted),
                                std::min(ds, dl), std::max(ds, dl), q.error, q.value};
    }
    return res;
}

}  // namespace boolezeta
