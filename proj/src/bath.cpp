// bath.cpp - correlation models, rates, spectral density and the Appendix-style susceptibility
#include "qmtc/bath.hpp"

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace qmtc::bath {

using std::numbers::pi;

namespace {

std::vector<SpectralLine> merge_lines(std::vector<SpectralLine> raw, double tol) {
    std::sort(raw.begin(), raw.end(), [](const auto& x, const auto& y) { return x.freq < y.freq; });
    std::vector<SpectralLine> out;
    for (const auto& l : raw) {
        if (!out.empty() && l.freq - out.back().freq <= tol)
            out.back().amp += l.amp;
        else
            out.push_back(l);
    }
    std::erase_if(out, [](const SpectralLine& l) { return std::abs(l.amp) < 1e-15; });
    return out;
}

Complex line_sum(const std::vector<SpectralLine>& lines, double u) {
    Complex s{0.0, 0.0};
    for (const auto& l : lines) s += l.amp * std::polar(1.0, l.freq * u);
    return s;
}

}  // namespace

FiniteBath::FiniteBath(Params p) : p_(std::move(p)) {
    opalg::require_hermitian(p_.H_e, "FiniteBath H_e");
    if (p_.couplings.empty()) throw DomainError("FiniteBath: at least one coupling operator required");
    if (!(p_.tau > 0) || !std::isfinite(p_.tau)) throw DomainError("FiniteBath: tau must be positive");
    if (!(p_.lambda >= 0) || !std::isfinite(p_.lambda)) throw DomainError("FiniteBath: lambda must be >= 0");
    if (p_.beta && !(*p_.beta >= 0)) throw DomainError("FiniteBath: beta must be >= 0");
    if (p_.broadening < 0) p_.broadening = 1.0 / (40.0 * p_.tau);
    if (!(p_.broadening > 0)) throw DomainError("FiniteBath: broadening must be positive");
    rho_ = DensityMatrix(p_.rho_e);
    auto d = p_.H_e.rows();
    if (rho_.dim() != d) throw DomainError("FiniteBath: rho_e dimension mismatch");
    double scale = std::max(1.0, p_.H_e.cwiseAbs().maxCoeff());
    if (opalg::commutator(p_.H_e, p_.rho_e).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw DomainError("FiniteBath: rho_e is not stationary, [H_e, rho_e] != 0");
    for (const auto& E : p_.couplings) {
        opalg::require_hermitian(E, "FiniteBath coupling");
        if (E.rows() != d) throw DomainError("FiniteBath: coupling dimension mismatch");
        if (std::abs((E * p_.rho_e).trace()) > 1e-9)
            throw DomainError("FiniteBath: coupling is not centered, tr(E rho_e) != 0");
    }

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (p_.H_e + p_.H_e.adjoint()));
    const auto& eps = es.eigenvalues();
    const auto& W = es.eigenvectors();
    ComplexMatrix rho_t = W.adjoint() * p_.rho_e * W;
    std::vector<ComplexMatrix> Et;
    for (const auto& E : p_.couplings) Et.push_back(W.adjoint() * E * W);
    int nc = n_couplings();
    double spread = eps.maxCoeff() - eps.minCoeff();
    max_freq_ = spread;
    lines_.resize(static_cast<std::size_t>(nc * nc));
    for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b) {
            ComplexMatrix Erho = Et[b] * rho_t;
            std::vector<SpectralLine> raw;
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j) raw.push_back({eps(i) - eps(j), Et[a](i, j) * Erho(j, i)});
            lines_[static_cast<std::size_t>(a * nc + b)] = merge_lines(std::move(raw), 1e-10 * std::max(1.0, spread));
        }
}

const std::vector<SpectralLine>& FiniteBath::lines(int a, int b) const {
    int nc = n_couplings();
    if (a < 0 || b < 0 || a >= nc || b >= nc) throw DomainError("FiniteBath: coupling index out of range");
    return lines_[static_cast<std::size_t>(a * nc + b)];
}

bool FiniteBath::is_thermal(double tol) const {
    if (!p_.beta) return false;
    auto th = opalg::thermal_state(p_.H_e, *p_.beta);
    return (th.matrix() - p_.rho_e).cwiseAbs().maxCoeff() <= tol;
}

FiniteBath FiniteBath::with_lambda(double lambda) const {
    FiniteBath b = *this;
    if (!(lambda >= 0)) throw DomainError("FiniteBath: lambda must be >= 0");
    b.p_.lambda = lambda;
    return b;
}

CorrelationModel::CorrelationModel(FiniteBath b) : v_(std::move(b)) {}

CorrelationModel::CorrelationModel(ExponentialHighT e) : v_(e) {
    if (!(e.tau > 0) || !std::isfinite(e.tau)) throw DomainError("exponential model: tau must be positive");
    if (!(e.beta >= 0) || !std::isfinite(e.beta)) throw DomainError("exponential model: beta must be >= 0");
    if (!(e.lambda >= 0) || !std::isfinite(e.lambda)) throw DomainError("exponential model: lambda must be >= 0");
}

const FiniteBath& CorrelationModel::finite() const {
    if (is_exponential()) throw DomainError("correlation model is not a finite bath");
    return std::get<FiniteBath>(v_);
}

const ExponentialHighT& CorrelationModel::exponential() const {
    if (!is_exponential()) throw DomainError("correlation model is not exponential");
    return std::get<ExponentialHighT>(v_);
}

double CorrelationModel::lambda() const { return is_exponential() ? exponential().lambda : finite().lambda(); }
double CorrelationModel::tau() const { return is_exponential() ? exponential().tau : finite().tau(); }
int CorrelationModel::n_couplings() const { return is_exponential() ? 1 : finite().n_couplings(); }

std::optional<double> CorrelationModel::beta() const {
    if (is_exponential()) return exponential().beta;
    return finite().beta();
}

bool CorrelationModel::high_temperature_flag() const {
    return is_exponential() && exponential().beta / exponential().tau > 0.2;
}

double CorrelationModel::horizon(const quad::QuadratureConfig& cfg) const {
    if (is_exponential()) return cfg.cutoff_factor * tau();
    return cfg.cutoff_factor * std::max(tau(), 1.0 / finite().broadening());
}

double CorrelationModel::damping() const { return is_exponential() ? 0.0 : finite().broadening(); }

double CorrelationModel::max_freq() const { return is_exponential() ? 0.0 : finite().max_line_freq(); }

CorrelationModel CorrelationModel::with_lambda(double lambda) const {
    if (is_exponential()) {
        auto e = exponential();
        e.lambda = lambda;
        return CorrelationModel(e);
    }
    return CorrelationModel(finite().with_lambda(lambda));
}

Complex corr_fn(const CorrelationModel& m, double u, int a, int b) {
    if (!(u >= 0)) throw DomainError("corr_fn: u must be >= 0");
    if (m.is_exponential()) {
        if (a != 0 || b != 0) throw DomainError("corr_fn: exponential model has a single coupling");
        const auto& e = m.exponential();
        double decay = std::exp(-u / e.tau);
        return {decay, -(e.beta / (2.0 * e.tau)) * decay};
    }
    return line_sum(m.finite().lines(a, b), u);
}

Eigen::MatrixXcd SpectralRates::gamma(std::size_t k) const {
    return 0.5 * (w.at(k).cast<Complex>() + Complex(0, 1) * h.at(k).cast<Complex>());
}

Eigen::MatrixXcd SpectralRates::transform(std::size_t k) const {
    return 0.5 * (w.at(k).cast<Complex>() - Complex(0, 1) * h.at(k).cast<Complex>());
}

int SpectralRates::find(double omega, double tol) const {
    for (std::size_t k = 0; k < omegas.size(); ++k)
        if (std::abs(omegas[k] - omega) <= tol * std::max(1.0, std::abs(omega))) return static_cast<int>(k);
    return -1;
}

namespace {

// damped half-line transform int_0^H c_ab(u) e^{-eta u} e^{-i omega u} du
quad::QuadResult damped_transform(const CorrelationModel& m, double omega, int a, int b,
                                  const quad::QuadratureConfig& cfg) {
    double eta = m.damping();
    double H = m.horizon(cfg);
    auto f = [&](double u) { return corr_fn(m, u, a, b) * std::exp(Complex(-eta * u, -omega * u)); };
    double panel = quad::panel_width(m.tau(), m.max_freq() + std::abs(omega));
    auto r = quad::panelled(f, H, panel, cfg);
    // what the window leaves beyond the horizon, bounded by |c| <= c(0)
    double tail = eta > 0 ? std::abs(corr_fn(m, 0.0, a, a)) * std::exp(-eta * H) / eta
                          : std::abs(corr_fn(m, H, a, b)) * m.tau();
    r.error += tail;
    if (tail > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(r.value)))
        r.warnings.push_back("half-line transform truncated at " + std::to_string(H) +
                             " with tail estimate " + std::to_string(tail));
    return r;
}

}  // namespace

SpectralRates gamma_rates(const CorrelationModel& m, const std::vector<double>& omegas,
                          const quad::QuadratureConfig& cfg) {
    if (cfg.cutoff_factor < 20.0) throw DomainError("gamma_rates: quadrature cutoff must be at least 20 tau");
    SpectralRates r;
    int nc = m.n_couplings();
    double l2 = m.lambda() * m.lambda();
    for (double omega : omegas) {
        if (!std::isfinite(omega)) throw DomainError("gamma_rates: non-finite frequency");
        Eigen::MatrixXd w(nc, nc), h(nc, nc);
        double err = 0.0;
        if (m.is_exponential()) {
            const auto& e = m.exponential();
            Complex G = Complex(1.0, -e.beta / (2.0 * e.tau)) * e.tau / Complex(1.0, omega * e.tau);
            w(0, 0) = 2.0 * l2 * G.real();
            h(0, 0) = -2.0 * l2 * G.imag();
        } else {
            for (int a = 0; a < nc; ++a)
                for (int b = 0; b < nc; ++b) {
                    auto q = damped_transform(m, omega, a, b, cfg);
                    w(a, b) = 2.0 * l2 * q.value.real();
                    h(a, b) = -2.0 * l2 * q.value.imag();
                    err = std::max(err, 2.0 * l2 * q.error);
                    for (auto& s : q.warnings) r.warnings.push_back(std::move(s));
                }
        }
        r.omegas.push_back(omega);
        r.w.push_back(w);
        r.h.push_back(h);
        r.error_estimates.push_back(err);
    }
    return r;
}

quad::QuadResult finite_transform(const CorrelationModel& m, double omega, double T, int a, int b,
                                  const quad::QuadratureConfig& cfg) {
    if (!(T >= 0)) throw DomainError("finite_transform: T must be >= 0");
    auto f = [&](double u) { return corr_fn(m, u, a, b) * std::polar(1.0, -omega * u); };
    return quad::panelled(f, T, quad::panel_width(m.tau(), m.max_freq() + std::abs(omega)), cfg);
}

double spectral_density(const CorrelationModel& m, double omega, const quad::QuadratureConfig& cfg) {
    if (m.is_exponential()) {
        double tau = m.tau();
        return 2.0 * tau / (1.0 + tau * tau * omega * omega);
    }
    double eta = m.damping();
    auto f = [&](double u) { return corr_fn(m, u).real() * std::exp(Complex(-eta * u, -omega * u)); };
    auto r = quad::panelled(f, m.horizon(cfg), quad::panel_width(m.tau(), m.max_freq() + std::abs(omega)), cfg);
    return 2.0 * r.value.real();
}

double fdt_im_spectrum(const CorrelationModel& m, double omega, const quad::QuadratureConfig& cfg) {
    if (!m.is_exponential() && !m.finite().is_thermal())
        throw DomainError("fdt_im_spectrum: finite bath state is not thermal at the declared beta");
    double beta = *m.beta();
    if (beta == 0.0) return 0.0;
    return 0.5 * std::tanh(beta * omega / 2.0) * spectral_density(m, omega, cfg);
}

double im_corr_from_fdt(double t, double beta, double tau) {
    if (!(t > 0) || !(tau > 0) || !(beta >= 0)) throw DomainError("im_corr_from_fdt: need t > 0, tau > 0, beta >= 0");
    if (beta == 0.0) return 0.0;
    // I(t) = int i tanh S e^{i w t} dw / 2pi = -(1/pi) int_0^inf tanh(beta w/2) S(w) sin(w t) dw
    boost::math::quadrature::ooura_fourier_sin<double> integrator(1e-12, 10);
    auto f = [&](double w) { return std::tanh(beta * w / 2.0) * 2.0 * tau / (1.0 + tau * tau * w * w); };
    auto [value, err] = integrator.integrate(f, t);
    (void)err;
    return -value / pi;
}

namespace {

void check_poles(double beta, double tau) {
    double a = beta / (2.0 * pi * tau);
    double to_int = std::abs(a - std::round(a));
    double to_half = std::abs(a - 0.5 - std::round(a - 0.5));
    if ((std::round(a) >= 1.0 && to_int < 1e-6) || to_half < 1e-6)
        throw DomainError("susceptibility: beta/(2 pi tau) = " + std::to_string(a) +
                          " collides with a pole of the residue expansion");
}

}  // namespace

double susceptibility_residue(double t, double beta, double tau, int n_terms) {
    if (!(t > 0) || !(tau > 0) || !(beta >= 0) || !std::isfinite(beta))
        throw DomainError("susceptibility_residue: need t > 0, tau > 0, finite beta >= 0");
    if (beta == 0.0) return 0.0;
    check_poles(beta, tau);
    double value = -std::tan(beta / (2.0 * tau)) * std::exp(-t / tau);
    double pref = 4.0 * tau / beta;
    double series = 0.0;
    for (int n = 0;; ++n) {
        double k = 2.0 * n + 1.0;
        double term = std::exp(-k * pi * t / beta) / (1.0 - k * k * pi * pi * tau * tau / (beta * beta));
        series += term;
        if (n_terms > 0 && n + 1 >= n_terms) break;
        if (std::abs(pref * term) < 1e-14 || n > 10000000) break;
    }
    return value - pref * series;
}

double incomplete_beta(double z, double a, double b) {
    if (!(z > 0) || !(z < 1)) throw DomainError("incomplete_beta: z must lie in (0, 1)");
    if (!(a > 0)) throw DomainError("incomplete_beta: a must be positive");
    // s = x^{1/a} removes the s^{a-1} endpoint factor
    auto f = [&](double x) { return Complex(std::pow(1.0 - std::pow(x, 1.0 / a), b - 1.0), 0.0); };
    quad::QuadratureConfig cfg;
    cfg.rel_tol = 1e-13;
    cfg.abs_tol = 1e-300;
    return quad::integrate(f, 0.0, std::pow(z, a), cfg).value.real() / a;
}

double susceptibility_closed_form(double t, double beta, double tau) {
    if (!(t > 0) || !(tau > 0) || !(beta > 0)) throw DomainError("susceptibility_closed_form: need t, tau, beta > 0");
    double a = beta / (2.0 * pi * tau);
    if (!(a < 0.5)) throw DomainError("susceptibility_closed_form: requires beta < pi tau");
    check_poles(beta, tau);
    double z = std::exp(-2.0 * pi * t / beta);
    double up = std::exp(t / tau) * incomplete_beta(z, 0.5 + a, 0.0);
    double down = std::exp(-t / tau) * incomplete_beta(z, 0.5 - a, 0.0);
    return -std::tan(beta / (2.0 * tau)) * std::exp(-t / tau) - (up - down) / pi;
}

}  // namespace qmtc::bath
