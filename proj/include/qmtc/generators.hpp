#pragma once
// generators.hpp - jump operators, Davies / Redfield generators and the Born propagator
//
// Jump operators follow V(omega) = sum_{E_k - E_k' = omega} |k><k|V|k'><k'|,
// so V(omega) raises the system energy by omega and e^{iHt} V(omega) e^{-iHt} = e^{i omega t} V(omega).

#include <vector>

#include "qmtc/bath.hpp"
#include "qmtc/opalg.hpp"
#include "qmtc/quadrature.hpp"

namespace qmtc::gen {

using opalg::Complex;
using opalg::ComplexMatrix;
using opalg::SuperOperator;

struct JumpDecomposition {
    ComplexMatrix Hs;
    std::vector<ComplexMatrix> couplings;           // V_alpha
    std::vector<double> bohr_freqs;                 // ascending, closed under negation
    std::vector<std::vector<ComplexMatrix>> jumps;  // jumps[alpha][k] = V_alpha(bohr_freqs[k])

    int dim() const { return static_cast<int>(Hs.rows()); }
    int n_couplings() const { return static_cast<int>(couplings.size()); }
    std::size_t n_freqs() const { return bohr_freqs.size(); }
    // index of -bohr_freqs[k]
    std::size_t negated(std::size_t k) const { return n_freqs() - 1 - k; }
};

// freq_tol < 0 selects 1e-8 * spectral radius of Hs
JumpDecomposition jump_decomposition(const ComplexMatrix& Hs, const std::vector<ComplexMatrix>& V,
                                     double freq_tol = -1.0);
JumpDecomposition jump_decomposition(const ComplexMatrix& Hs, const ComplexMatrix& V, double freq_tol = -1.0);

// Mean-field shift Hs = Hs0 + lambda sum_a tr(V_e,a rho_e) V_s,a and centered E_a = V_e,a - tr(V_e,a rho_e).
struct Renormalized {
    ComplexMatrix Hs;
    std::vector<ComplexMatrix> env_couplings;
};
Renormalized renormalize(const ComplexMatrix& Hs0, const std::vector<ComplexMatrix>& system_couplings,
                         const std::vector<ComplexMatrix>& env_couplings, const ComplexMatrix& rho_e,
                         double lambda);

SuperOperator davies_generator(const JumpDecomposition& jd, const bath::SpectralRates& rates);

// Markov generator keeping off-resonant pairs, with the phase e^{i(w+w')u}
// averaged exactly over [ta, tb] (the instantaneous phase when tb == ta)
SuperOperator redfield_generator(const JumpDecomposition& jd, const bath::SpectralRates& rates, double ta,
                                 double tb);

struct GeneratorBundle {
    SuperOperator davies;
    SuperOperator redfield;
    JumpDecomposition jd;
    bath::SpectralRates rates;
};
GeneratorBundle make_generators(const JumpDecomposition& jd, const bath::CorrelationModel& m, double ta, double tb,
                                const quad::QuadratureConfig& cfg = {});
// rates evaluated on every Bohr frequency of jd
bath::SpectralRates rates_on_bohr_grid(const JumpDecomposition& jd, const bath::CorrelationModel& m,
                                       const quad::QuadratureConfig& cfg = {});

// lambda^2 L2(t, t0), the Born generator in the interaction frame
SuperOperator second_supercumulant(double t, double t0, const JumpDecomposition& jd, const bath::CorrelationModel& m,
                                   const quad::QuadratureConfig& cfg = {});

struct OdeConfig {
    double dt_factor = 1.0 / 50.0;  // step = dt_factor * tau unless dt > 0
    double dt = -1.0;
    long max_steps = 2'000'000;
    quad::QuadratureConfig quad;
};

// solves dLambda/dt = lambda^2 L2(t, t0) Lambda with classical RK4
SuperOperator born_propagator(double t1, double t0, const JumpDecomposition& jd, const bath::CorrelationModel& m,
                              const OdeConfig& ode = {});

}  // namespace qmtc::gen
