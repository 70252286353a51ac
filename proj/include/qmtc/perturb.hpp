#pragma once
// perturb.hpp - interventions, the regression-formula table and its first-order correction

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qmtc/bath.hpp"
#include "qmtc/generators.hpp"
#include "qmtc/mtc_oracle.hpp"

namespace qmtc::perturb {

using opalg::Complex;
using opalg::ComplexMatrix;
using opalg::DensityMatrix;
using opalg::HermitianObservable;
using opalg::SuperOperator;
using oracle::BiProbTable;

struct Intervention {
    double t = 0.0;
    double fplus = 0.0, fminus = 0.0;
    SuperOperator raw;       // P(f+) . P(f-)
    SuperOperator realized;  // conjugated into the interaction frame at time t
};

Intervention intervention(const HermitianObservable& F, double fplus, double fminus, double t,
                          const ComplexMatrix& Hs);

struct InterventionGrid {
    std::vector<double> times;
    std::vector<HermitianObservable> observables;
    ComplexMatrix Hs;  // interaction frame Hamiltonian

    void validate() const;
};

// Lambda(t, t_prev) in the interaction frame
using PropagatorFamily = std::function<SuperOperator(double t, double t_prev)>;

BiProbTable qrf_biprob(const InterventionGrid& grid, const DensityMatrix& rho0, const PropagatorFamily& props);

inline constexpr double kInfiniteWindow = std::numeric_limits<double>::infinity();

// Integration windows for the two lags: a after the intervention, b before it
struct CoefficientWindow {
    double after = kInfiniteWindow;
    double before = kInfiniteWindow;
};

struct CrossCoefficients {
    Eigen::MatrixXcd C;  // per coupling pair (a, a')
    Eigen::MatrixXcd K;
    double error = 0.0;
    std::vector<std::string> warnings;
};

// C = -lambda^2 int_0^A da int_0^B db e^{i w a} e^{i w' b} Re c(a + b), K likewise with Im c
CrossCoefficients cross_coefficients(const bath::CorrelationModel& m, double omega, double omega_prime,
                                     const quad::QuadratureConfig& cfg = {}, CoefficientWindow window = {});

// nested quadrature for any model; cross_coefficients uses it for finite baths
CrossCoefficients cross_coefficients_quadrature(const bath::CorrelationModel& m, double omega, double omega_prime,
                                                const quad::QuadratureConfig& cfg = {}, CoefficientWindow window = {});

// coefficients for the correction attached to intervention j (0-based)
using CoefficientProvider = std::function<CrossCoefficients(std::size_t j, double omega, double omega_prime)>;

enum class WindowPolicy { Auto, Infinite, InterventionGaps };

CoefficientProvider make_coefficient_provider(const bath::CorrelationModel& m, const InterventionGrid& grid,
                                              WindowPolicy policy, const quad::QuadratureConfig& cfg = {});

struct Diagnostics {
    double lambda_tau = 0.0;
    double truncation_error = 0.0;
    std::vector<std::string> warnings;
};

// correction table: sum_j over the sandwich that replaces intervention j (j < n-1)
BiProbTable first_order_biprob(const InterventionGrid& grid, const DensityMatrix& rho0, const PropagatorFamily& props,
                               const gen::JumpDecomposition& jd, const CoefficientProvider& coeffs,
                               Diagnostics* diag = nullptr, double min_separation = 0.0);

enum class PropagatorKind { Davies, Redfield, Born };

PropagatorFamily make_propagators(PropagatorKind kind, const gen::JumpDecomposition& jd,
                                  const bath::CorrelationModel& m, const gen::OdeConfig& ode = {});

struct SystemSpec {
    ComplexMatrix Hs;                      // renormalized system Hamiltonian
    std::vector<ComplexMatrix> couplings;  // system sides of the coupling
    DensityMatrix rho0;
    PropagatorKind propagator = PropagatorKind::Davies;
    WindowPolicy window = WindowPolicy::Auto;
    gen::OdeConfig ode;
    double min_separation_factor = 5.0;  // warn when interventions are closer than this many tau
};

struct PerturbativeTables {
    BiProbTable zeroth;
    BiProbTable correction;  // zero table when order == 0
    Diagnostics diagnostics;
};

PerturbativeTables perturbative_biprob(const std::vector<double>& times,
                                       const std::vector<HermitianObservable>& observables, const SystemSpec& spec,
                                       const bath::CorrelationModel& m, int order);

struct PerturbativeMTCResult {
    Complex zeroth{0.0, 0.0};
    Complex first_correction{0.0, 0.0};
    Complex total{0.0, 0.0};
    Diagnostics diagnostics;
};

PerturbativeMTCResult mtc_perturbative(const oracle::MTCQuery& q, const SystemSpec& spec,
                                       const bath::CorrelationModel& m, int order);

}  // namespace qmtc::perturb
