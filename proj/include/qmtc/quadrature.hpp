#pragma once
// quadrature.hpp - adaptive and panel quadrature shared by bath, generators and perturb

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace qmtc::quad {

using Complex = std::complex<double>;
using ComplexFn = std::function<Complex(double)>;

struct QuadratureConfig {
    double cutoff_factor = 40.0;  // half-line integrals stop at cutoff_factor * correlation time
    double rel_tol = 1e-9;
    double abs_tol = 1e-14;
    unsigned max_depth = 18;
};

struct QuadResult {
    Complex value{0.0, 0.0};
    double error = 0.0;
    std::vector<std::string> warnings;
};

// adaptive Gauss-Kronrod (15 point) on a finite interval
QuadResult integrate(const ComplexFn& f, double a, double b, const QuadratureConfig& cfg = {});

// fixed Gauss-Legendre rule on [a, b]; exact for smooth panels much shorter than the oscillation
Complex gauss_panel(const ComplexFn& f, double a, double b);

// integral over [0, length] split into panels no longer than max_panel, each integrated adaptively
QuadResult panelled(const ComplexFn& f, double length, double max_panel, const QuadratureConfig& cfg = {});

// panel width for an integrand with decay scale tau and oscillation frequency omega
double panel_width(double tau, double omega);

}  // namespace qmtc::quad
