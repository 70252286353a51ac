#pragma once
// experiments.hpp - scripted reproductions: thermalization demo, error scaling, FDT checks

#include <cstdint>
#include <string>
#include <vector>

#include "qmtc/bath.hpp"
#include "qmtc/perturb.hpp"

namespace qmtc::experiments {

using opalg::Complex;
using opalg::ComplexMatrix;

struct DemoRow {
    double omega = 0.0;
    double wq0 = 0.0, wq1 = 0.0;        // probe-qubit transition rates at order 0 and 1
    double ratio0 = 0.0, ratio1 = 0.0;  // w(-omega)/w(omega)
    double target = 0.0;                // e^{beta omega}
    double dev0 = 0.0, dev1 = 0.0;      // relative deviation of each ratio from the target
};

struct DemoReport {
    std::vector<DemoRow> rows;
    double beta = 0.0, lambda = 0.0, mu = 0.0, tau = 0.0;
    double bath_rate0 = 0.0;  // w of the bath at zero frequency
    std::string transform_path;  // "analytic" or "quadrature"
    std::vector<std::string> warnings;
};

struct DemoOptions {
    double t1 = 10.0;  // first intervention time in units of tau
    perturb::PropagatorKind propagator = perturb::PropagatorKind::Davies;
    quad::QuadratureConfig quad;
};

DemoReport run_thermalization_demo(double beta, double lambda, double mu, double tau,
                                   const std::vector<double>& omega_grid, const std::vector<double>& dt_grid,
                                   const DemoOptions& opt = {});

// system side of the scaling study: one coupling V, one observable F probed at every time
struct ScalingSystem {
    ComplexMatrix Hs;
    ComplexMatrix V;
    ComplexMatrix F;
    ComplexMatrix rho_s;
};

struct ScalingSetup {
    bath::FiniteBath bath;
    ScalingSystem system;
    std::vector<double> times;
    std::uint64_t seed = 0;
    std::string description;
};

// system qubit plus a three-qubit thermal bath drawn from a fixed seed
ScalingSetup default_scaling_setup(std::uint64_t seed = 20240611);

struct ScalingReport {
    std::vector<double> lambdas;
    std::vector<double> err0, err1;
    double exponent0 = 0.0, exponent1 = 0.0;  // NaN when fewer than two usable points
    std::string setup;
    std::vector<std::string> tolerances;
    std::vector<std::string> warnings;
};

ScalingReport error_scaling_study(const bath::FiniteBath& bath, const ScalingSystem& sys,
                                  const std::vector<double>& lambda_grid, const std::vector<double>& times,
                                  const gen::OdeConfig& ode = {});

// least-squares slope of log(err) against log(lambda) over strictly positive points
double fit_exponent(const std::vector<double>& lambdas, const std::vector<double>& errs);

struct FdtRow {
    double omega = 0.0;
    double lhs = 0.0;  // Im of the half-line transform of the susceptibility kernel
    double rhs = 0.0;  // (1/2) tanh(beta omega/2) S(omega)
    double abs_dev = 0.0;
    double rel_dev = 0.0;  // abs_dev / max |rhs| over the grid
};

struct FdtReport {
    std::vector<FdtRow> rows;
    double beta = 0.0;
    double broadening = 0.0;
    double max_rel_dev = 0.0;
    std::string method;
};

// finite bath: F is probed in the bath's thermal state with the bath broadening as window
FdtReport fdt_verification(const bath::FiniteBath& bath, const ComplexMatrix& F, const std::vector<double>& omega_grid,
                           const quad::QuadratureConfig& cfg = {});
// exponential model with its imaginary part rebuilt from the FDT (residue series)
FdtReport fdt_verification(const bath::ExponentialHighT& model, const std::vector<double>& omega_grid);

// thermal 4-level bath with random Hamiltonian and observable
bath::FiniteBath random_thermal_bath(int dim, double beta, std::uint64_t seed, ComplexMatrix* observable = nullptr);

struct SusceptibilityRow {
    double t = 0.0;
    double residue_sum = 0.0;
    double high_t_limit = 0.0;
    double numeric_ft = 0.0;
    double abs_diff = 0.0;  // |residue_sum - numeric_ft|
};

std::vector<SusceptibilityRow> susceptibility_table(double beta, double tau, const std::vector<double>& t_grid);

std::vector<double> linspace(double a, double b, std::size_t n);

}  // namespace qmtc::experiments
