// quadrature.cpp - thin layer over Boost.Math quadrature with per-panel splitting
#include "qmtc/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "qmtc/errors.hpp"

namespace qmtc::quad {

namespace {

struct Segment {
    double a, b;
    Complex value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

// one 15-point Kronrod / 7-point Gauss pair on [a, b], nodes and weights from Boost
Segment gk15(const ComplexFn& f, double a, double b) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& x = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Complex f0 = f(mid);
    Complex kron = f0 * wk[0], gauss = f0 * wg[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        Complex s = f(mid + half * x[i]) + f(mid - half * x[i]);
        kron += s * wk[i];
        if (i % 2 == 0) gauss += s * wg[i / 2];
    }
    return {a, b, half * kron, std::abs(half * (kron - gauss))};
}

}  // namespace

QuadResult integrate(const ComplexFn& f, double a, double b, const QuadratureConfig& cfg) {
    QuadResult r;
    if (b == a) return r;
    // globally adaptive bisection on the segment with the largest error
    std::priority_queue<Segment> heap;
    Segment first = gk15(f, a, b);
    heap.push(first);
    Complex total = first.value;
    double err = first.error;
    std::size_t max_segments = std::size_t{1} << std::min(cfg.max_depth, 14u);
    while (err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)) && heap.size() < max_segments) {
        Segment s = heap.top();
        heap.pop();
        double m = 0.5 * (s.a + s.b);
        Segment l = gk15(f, s.a, m), rr = gk15(f, m, s.b);
        total += l.value + rr.value - s.value;
        err += l.error + rr.error - s.error;
        heap.push(l);
        heap.push(rr);
    }
    r.value = total;
    r.error = err;
    if (!std::isfinite(total.real()) || !std::isfinite(total.imag()))
        throw NumericError("quadrature produced a non-finite value");
    if (err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)))
        r.warnings.push_back("adaptive quadrature stopped above tolerance on [" + std::to_string(a) + ", " +
                             std::to_string(b) + "], error estimate " + std::to_string(err));
    return r;
}

Complex gauss_panel(const ComplexFn& f, double a, double b) {
    if (b == a) return {0.0, 0.0};
    return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

QuadResult panelled(const ComplexFn& f, double length, double max_panel, const QuadratureConfig& cfg) {
    QuadResult total;
    if (length <= 0) return total;
    if (!(max_panel > 0)) throw DomainError("panelled quadrature: panel width must be positive");
    auto n = static_cast<long>(std::ceil(length / max_panel - 1e-12));
    n = std::max(1L, n);
    double h = length / static_cast<double>(n);
    for (long k = 0; k < n; ++k) {
        auto r = integrate(f, k * h, (k + 1 == n) ? length : (k + 1) * h, cfg);
        total.value += r.value;
        total.error += r.error;
        if (!r.warnings.empty() && total.warnings.empty()) total.warnings = r.warnings;
    }
    return total;
}

double panel_width(double tau, double omega) {
    // one period per panel once oscillation beats decay, otherwise a tau-sized panel
    double w = tau;
    if (std::abs(omega) * tau > 1.0) w = std::min(w, 2.0 * std::numbers::pi / std::abs(omega));
    return w;
}

}  // namespace qmtc::quad
