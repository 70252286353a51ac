#pragma once
// bath.hpp - environment correlation functions and their spectral transforms
//
// Rates carry the coupling: w = 2 lambda^2 Re G, h = -2 lambda^2 Im G with
// G(omega) = int_0^inf <E(u)E(0)> e^{-i omega u} du. The bare corr_fn is lambda-free.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qmtc/opalg.hpp"
#include "qmtc/quadrature.hpp"

namespace qmtc::bath {

using opalg::Complex;
using opalg::ComplexMatrix;
using opalg::DensityMatrix;

struct SpectralLine {
    double freq;
    Complex amp;
};

// Exact finite-dimensional environment. Correlations are stored as spectral
// lines c_ab(u) = sum_l amp_l e^{i freq_l u}, read off the H_e eigenbasis.
class FiniteBath {
public:
    struct Params {
        ComplexMatrix H_e;
        std::vector<ComplexMatrix> couplings;  // centered: tr(E rho_e) = 0
        ComplexMatrix rho_e;
        double lambda = 0.0;
        double tau = 1.0;                 // correlation time scale used for panels and cutoffs
        std::optional<double> beta;       // set when rho_e is thermal
        double broadening = -1.0;         // exponential window rate for half-line transforms; < 0 means 1/(40 tau)
    };

    explicit FiniteBath(Params p);

    const ComplexMatrix& H_e() const { return p_.H_e; }
    const std::vector<ComplexMatrix>& couplings() const { return p_.couplings; }
    const DensityMatrix& rho_e() const { return rho_; }
    double lambda() const { return p_.lambda; }
    double tau() const { return p_.tau; }
    std::optional<double> beta() const { return p_.beta; }
    double broadening() const { return p_.broadening; }
    int n_couplings() const { return static_cast<int>(p_.couplings.size()); }
    const std::vector<SpectralLine>& lines(int a, int b) const;
    double max_line_freq() const { return max_freq_; }
    bool is_thermal(double tol = 1e-9) const;

    FiniteBath with_lambda(double lambda) const;

private:
    Params p_;
    DensityMatrix rho_;
    std::vector<std::vector<SpectralLine>> lines_;
    double max_freq_ = 0.0;
};

struct ExponentialHighT {
    double tau = 1.0;
    double beta = 0.0;
    double lambda = 0.0;
};

class CorrelationModel {
public:
    CorrelationModel(FiniteBath b);
    CorrelationModel(ExponentialHighT e);

    bool is_exponential() const { return std::holds_alternative<ExponentialHighT>(v_); }
    const FiniteBath& finite() const;
    const ExponentialHighT& exponential() const;

    double lambda() const;
    double tau() const;
    int n_couplings() const;
    std::optional<double> beta() const;
    // beta/tau > 0.2 flags the exponential model outside its high-temperature regime
    bool high_temperature_flag() const;

    // length of half-line integrals and the exponential window applied on them
    double horizon(const quad::QuadratureConfig& cfg) const;
    double damping() const;
    // largest oscillation frequency present in the correlation
    double max_freq() const;

    CorrelationModel with_lambda(double lambda) const;

private:
    std::variant<FiniteBath, ExponentialHighT> v_;
};

// <E_a(u) E_b(0)> in the stationary environment state
Complex corr_fn(const CorrelationModel& m, double u, int a = 0, int b = 0);

struct SpectralRates {
    std::vector<double> omegas;
    std::vector<Eigen::MatrixXd> w;  // per frequency, n_couplings x n_couplings
    std::vector<Eigen::MatrixXd> h;
    std::vector<double> error_estimates;
    std::vector<std::string> warnings;

    // (w + i h)/2
    Eigen::MatrixXcd gamma(std::size_t k) const;
    // lambda^2 G(omega) = (w - i h)/2, the transform that enters the generators
    Eigen::MatrixXcd transform(std::size_t k) const;
    // index of omega within tol, -1 if absent
    int find(double omega, double tol = 1e-9) const;
};

SpectralRates gamma_rates(const CorrelationModel& m, const std::vector<double>& omegas,
                          const quad::QuadratureConfig& cfg = {});

// int_0^T <E_a(u)E_b(0)> e^{-i omega u} du without regularization (lambda-free)
quad::QuadResult finite_transform(const CorrelationModel& m, double omega, double T, int a, int b,
                                  const quad::QuadratureConfig& cfg = {});

// S(omega): full-line transform of Re corr (FiniteBath regularized by the broadening window)
double spectral_density(const CorrelationModel& m, double omega, const quad::QuadratureConfig& cfg = {});

// Im of the transform of the susceptibility kernel: (1/2) tanh(beta omega / 2) S(omega)
double fdt_im_spectrum(const CorrelationModel& m, double omega, const quad::QuadratureConfig& cfg = {});

// Im corr of the exponential model rebuilt from the FDT by a numerical
// inverse Fourier transform of i tanh(beta omega/2) S(omega)
double im_corr_from_fdt(double t, double beta, double tau);

// Residue-sum susceptibility I(t) for S(omega) = 2 tau / (1 + tau^2 omega^2)
double susceptibility_residue(double t, double beta, double tau, int n_terms = 0);
// Same quantity through incomplete beta functions; needs beta < pi tau
double susceptibility_closed_form(double t, double beta, double tau);
// B_z(a, b) = int_0^z s^{a-1} (1-s)^{b-1} ds for z in (0,1), a > 0
double incomplete_beta(double z, double a, double b);

}  // namespace qmtc::bath
