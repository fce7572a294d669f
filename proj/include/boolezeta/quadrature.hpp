#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace boolezeta {

template <std::size_t D>
using CVec = std::array<std::complex<double>, D>;

struct AdaptiveSettings {
    double abs_tol = 1e-10;
    std::size_t max_evals = 2'000'000;
    double min_width = 1e-13;
};

template <std::size_t D>
struct AdaptiveResult {
    CVec<D> value{};
    std::array<double, D> error{};  // |Kronrod - Gauss| summed over panels
    std::size_t evaluations = 0;
    std::size_t panels = 0;
    bool converged = true;
};

/// Adaptive G7/K15 quadrature of a vector-valued integrand. Refinement is driven
/// by the summed error of the first `driving` components; the worst panel is
/// bisected until the tolerance or the evaluation budget is reached.
template <std::size_t D, class F>
AdaptiveResult<D> adaptive_gk15(F&& f, const std::vector<double>& breakpoints, std::size_t driving,
                                const AdaptiveSettings& settings) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    static const auto& xk = GK::abscissa();
    static const auto& wk = GK::weights();
    static const auto& wg = G::weights();

    struct Panel {
        double a, b;
        CVec<D> value;
        std::array<double, D> err;
        double key;
    };
    auto eval_panel = [&](double a, double b) {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        CVec<D> k{}, g{};
        const CVec<D> fc = f(c);
        for (std::size_t d = 0; d < D; ++d) {
            k[d] = fc[d] * wk[0];
            g[d] = fc[d] * wg[0];
        }
        for (std::size_t i = 1; i < xk.size(); ++i) {
            const CVec<D> f1 = f(c - h * xk[i]);
            const CVec<D> f2 = f(c + h * xk[i]);
            for (std::size_t d = 0; d < D; ++d) {
                const auto sum = f1[d] + f2[d];
                k[d] += sum * wk[i];
                if (i % 2 == 0) g[d] += sum * wg[i / 2];
            }
        }
        Panel p{a, b, {}, {}, 0.0};
        for (std::size_t d = 0; d < D; ++d) {
            p.value[d] = k[d] * h;
            p.err[d] = std::abs((k[d] - g[d]) * h);
            if (d < driving) p.key += p.err[d];
        }
        return p;
    };
    const std::size_t per_panel = 2 * xk.size() - 1;

    if (breakpoints.size() < 2) throw std::invalid_argument("adaptive_gk15: need at least one interval");
    auto cmp = [](const Panel& x, const Panel& y) { return x.key < y.key; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(cmp)> queue(cmp);
    AdaptiveResult<D> res;
    double total_key = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i + 1] > breakpoints[i])) continue;
        Panel p = eval_panel(breakpoints[i], breakpoints[i + 1]);
        res.evaluations += per_panel;
        total_key += p.key;
        queue.push(p);
    }
    while (total_key > settings.abs_tol && !queue.empty()) {
        if (res.evaluations + 2 * per_panel > settings.max_evals) break;
        Panel worst = queue.top();
        if (worst.b - worst.a < settings.min_width * std::max(1.0, std::fabs(worst.a))) break;
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Panel l = eval_panel(worst.a, mid), r = eval_panel(mid, worst.b);
        res.evaluations += 2 * per_panel;
        total_key += l.key + r.key - worst.key;
        queue.push(l);
        queue.push(r);
    }
    // deterministic summation order: by interval position
    std::vector<Panel> all;
    all.reserve(queue.size());
    while (!queue.empty()) {
        all.push_back(queue.top());
        queue.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    double driving_err = 0.0;
    for (const auto& p : all) {
        for (std::size_t d = 0; d < D; ++d) {
            res.value[d] += p.value[d];
            res.error[d] += p.err[d];
        }
    }
    for (std::size_t d = 0; d < driving; ++d) driving_err += res.error[d];
    res.panels = all.size();
    res.converged = driving_err <= settings.abs_tol;
    return res;
}

}  // namespace boolezeta
