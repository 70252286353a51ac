// experiments.cpp - demo, scaling study and FDT reports
#include "qmtc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "qmtc/mtc_oracle.hpp"
#include "qmtc/parallel.hpp"

namespace qmtc::experiments {

namespace {

ComplexMatrix pauli(char which) {
    ComplexMatrix m(2, 2);
    switch (which) {
        case 'x': m << 0, 1, 1, 0; break;
        case 'y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        case 'z': m << 1, 0, 0, -1; break;
        default: m = ComplexMatrix::Identity(2, 2);
    }
    return m;
}

// operator acting as `op` on qubit k of an n-qubit register (qubit 0 is the most significant)
ComplexMatrix on_qubit(const ComplexMatrix& op, int k, int n) {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (int q = 0; q < n; ++q) out = opalg::kron(out, q == k ? op : ComplexMatrix::Identity(2, 2));
    return out;
}

struct ExpFit {
    Complex A;
    double kappa;
    double residual;
};

ExpFit fit_pure_exponential(const std::vector<double>& dts, const std::vector<Complex>& m) {
    double d0 = dts.front(), d1 = dts.back();
    if (std::abs(m.front()) == 0.0 || std::abs(m.back()) == 0.0)
        return {0.0, 0.0, std::numeric_limits<double>::infinity()};
    double kappa = -std::log(std::abs(m.back()) / std::abs(m.front())) / (d1 - d0);
    Complex A = m.front() * std::exp(kappa * d0);
    double res = 0.0;
    for (std::size_t i = 0; i < dts.size(); ++i) res = std::max(res, std::abs(m[i] - A * std::exp(-kappa * dts[i])));
    return {A, kappa, res / std::abs(A)};
}

}  // namespace

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v;
    if (n == 1) return {a};
    for (std::size_t i = 0; i < n; ++i) v.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return v;
}

DemoReport run_thermalization_demo(double beta, double lambda, double mu, double tau,
                                   const std::vector<double>& omega_grid, const std::vector<double>& dt_grid,
                                   const DemoOptions& opt) {
    if (!(tau > 0) || !(beta >= 0) || !(lambda >= 0) || !(mu >= 0))
        throw DomainError("demo: need tau > 0 and beta, lambda, mu >= 0");
    if (lambda * tau > 0.2) throw DomainError("demo: lambda tau must not exceed 0.2");
    if (omega_grid.empty()) throw DomainError("demo: empty frequency grid");
    for (double w : omega_grid)
        if (!(std::abs(beta * w) < 2.0)) throw DomainError("demo: |beta omega| must stay below 2 on the grid");
    if (dt_grid.size() < 2) throw DomainError("demo: at least two time lags are needed");
    for (std::size_t i = 0; i < dt_grid.size(); ++i)
        if (dt_grid[i] < 0 || (i && dt_grid[i] <= dt_grid[i - 1]))
            throw DomainError("demo: time lags must be nonnegative and increasing");

    bath::CorrelationModel model(bath::ExponentialHighT{tau, beta, lambda});
    ComplexMatrix Hq = ComplexMatrix::Zero(2, 2);
    perturb::SystemSpec spec{Hq, {pauli('x')}, opalg::thermal_state(Hq, beta), opt.propagator,
                             perturb::WindowPolicy::Auto, {}, 5.0};
    spec.ode.quad = opt.quad;
    auto F = opalg::spectral_decompose(pauli('z'));
    double t1 = opt.t1 * tau;

    DemoReport rep;
    rep.beta = beta;
    rep.lambda = lambda;
    rep.mu = mu;
    rep.tau = tau;
    rep.bath_rate0 = bath::gamma_rates(model, {0.0}).w[0](0, 0);

    auto mtc_at = [&](double dt, int order) {
        oracle::MTCQuery q{{t1, t1 + dt}, {F, F}, {oracle::Branch::Plus, oracle::Branch::Plus}};
        auto r = perturb::mtc_perturbative(q, spec, model, order);
        return r;
    };
    std::vector<Complex> m0, m1;
    for (double dt : dt_grid) {
        auto r = mtc_at(dt, 1);
        m0.push_back(r.zeroth);
        m1.push_back(r.total);
        for (auto& w : r.diagnostics.warnings)
            if (std::find(rep.warnings.begin(), rep.warnings.end(), w) == rep.warnings.end()) rep.warnings.push_back(w);
    }
    auto f0 = fit_pure_exponential(dt_grid, m0);
    auto f1 = fit_pure_exponential(dt_grid, m1);
    bool analytic = f0.residual < 1e-9 && f1.residual < 1e-9 && f0.kappa > 0 && f1.kappa > 0;
    rep.transform_path = analytic ? "analytic" : "quadrature";

    // 2 mu^2 Re int_0^inf m(u) e^{-i omega u} du
    auto rate = [&](int order, double omega) {
        const auto& f = order == 0 ? f0 : f1;
        if (analytic) return 2.0 * mu * mu * (f.A / Complex(f.kappa, omega)).real();
        double horizon = (f.kappa > 0 ? 40.0 / f.kappa : 40.0 * tau);
        auto integrand = [&](double u) {
            auto r = mtc_at(u, order);
            Complex m = order == 0 ? r.zeroth : r.total;
            return m * std::polar(1.0, -omega * u);
        };
        auto q = quad::panelled(integrand, horizon, quad::panel_width(horizon / 40.0, omega), opt.quad);
        return 2.0 * mu * mu * q.value.real();
    };
    for (double w : omega_grid) {
        DemoRow row;
        row.omega = w;
        row.wq0 = rate(0, w);
        row.wq1 = rate(1, w);
        row.ratio0 = rate(0, -w) / row.wq0;
        row.ratio1 = rate(1, -w) / row.wq1;
        row.target = std::exp(beta * w);
        row.dev0 = std::abs(row.ratio0 - row.target) / row.target;
        row.dev1 = std::abs(row.ratio1 - row.target) / row.target;
        rep.rows.push_back(row);
    }
    return rep;
}

ScalingSetup default_scaling_setup(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const int nq = 3;
    const double tau = 1.0, beta = 0.5;
    int de = 1 << nq;
    ComplexMatrix He = ComplexMatrix::Zero(de, de);
    for (int k = 0; k < nq; ++k) He += (1.0 + 0.5 * uni(rng)) / tau * on_qubit(pauli('z'), k, nq);
    for (int k = 0; k < nq; ++k)
        for (int l = k + 1; l < nq; ++l) {
            double J = 0.5 * uni(rng) / tau;
            He += J * (on_qubit(pauli('x'), k, nq) * on_qubit(pauli('x'), l, nq) +
                       on_qubit(pauli('y'), k, nq) * on_qubit(pauli('y'), l, nq));
            He += 0.3 * uni(rng) / tau * on_qubit(pauli('z'), k, nq) * on_qubit(pauli('z'), l, nq);
        }
    ComplexMatrix E = ComplexMatrix::Zero(de, de);
    for (int k = 0; k < nq; ++k) {
        double a = uni(rng), b = uni(rng), c = uni(rng);
        E += a * on_qubit(pauli('x'), k, nq) + b * on_qubit(pauli('y'), k, nq) + 0.5 * c * on_qubit(pauli('z'), k, nq);
    }
    auto rho = opalg::thermal_state(He, beta);
    E -= (E * rho.matrix()).trace().real() * ComplexMatrix::Identity(de, de);
    E /= std::sqrt((E * E * rho.matrix()).trace().real());

    ScalingSetup s{bath::FiniteBath({He, {E}, rho.matrix(), 0.0, tau, beta, -1.0}), {}, {2.0 * tau, 5.0 * tau}, seed, ""};
    double delta = 1.0 / tau;
    s.system.Hs = 0.5 * delta * pauli('z');
    s.system.V = pauli('x');
    s.system.F = (pauli('z') + pauli('x')) / std::sqrt(2.0);
    s.system.rho_s = 0.5 * (ComplexMatrix::Identity(2, 2) + 0.3 * pauli('x') + 0.2 * pauli('y') + 0.4 * pauli('z'));
    std::ostringstream os;
    os << "system qubit Hs=(1/2)sigma_z/tau, V=sigma_x, F=(sigma_z+sigma_x)/sqrt2; bath of " << nq
       << " qubits (random z fields, XY and ZZ couplings), thermal at beta=" << beta << " tau, seed=" << seed;
    s.description = os.str();
    return s;
}

double fit_exponent(const std::vector<double>& lambdas, const std::vector<double>& errs) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        if (lambdas[i] > 0 && errs[i] > 0) {
            x.push_back(std::log(lambdas[i]));
            y.push_back(std::log(errs[i]));
        }
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

ScalingReport error_scaling_study(const bath::FiniteBath& bath, const ScalingSystem& sys,
                                  const std::vector<double>& lambda_grid, const std::vector<double>& times,
                                  const gen::OdeConfig& ode) {
    int ds = static_cast<int>(sys.Hs.rows());
    int de = static_cast<int>(bath.H_e().rows());
    if (ds * de > 64) throw DomainError("scaling study: composite dimension " + std::to_string(ds * de) + " exceeds 64");
    if (lambda_grid.empty()) throw DomainError("scaling study: empty lambda grid");
    double tau = bath.tau();
    for (double l : lambda_grid)
        if (!(l == 0.0 || (l * tau >= 0.01 - 1e-12 && l * tau <= 0.2 + 1e-12)))
            throw DomainError("scaling study: lambda tau must be 0 or lie in [0.01, 0.2]");
    if (bath.n_couplings() != 1) throw DomainError("scaling study: expects a single bath coupling");

    auto F = opalg::spectral_decompose(sys.F);
    auto F_lift = opalg::spectral_decompose(opalg::kron(sys.F, ComplexMatrix::Identity(de, de)));
    opalg::DensityMatrix rho_s(sys.rho_s);
    opalg::DensityMatrix rho(opalg::kron(sys.rho_s, bath.rho_e().matrix()));
    ComplexMatrix H0 = opalg::kron(sys.Hs, ComplexMatrix::Identity(de, de)) +
                       opalg::kron(ComplexMatrix::Identity(ds, ds), bath.H_e());
    ComplexMatrix coupling = opalg::kron(sys.V, bath.couplings()[0]);
    std::vector<opalg::HermitianObservable> obs(times.size(), F), obs_lift(times.size(), F_lift);

    ScalingReport rep;
    rep.lambdas = lambda_grid;
    rep.err0.assign(lambda_grid.size(), 0.0);
    rep.err1.assign(lambda_grid.size(), 0.0);
    parallel_for(lambda_grid.size(), [&](std::size_t i) {
        double lam = lambda_grid[i];
        auto exact = oracle::biprob_exact(times, obs_lift, H0 + lam * coupling, rho);
        bath::CorrelationModel m(bath.with_lambda(lam));
        perturb::SystemSpec spec{sys.Hs, {sys.V}, rho_s, perturb::PropagatorKind::Born,
                                 perturb::WindowPolicy::InterventionGaps, ode, 0.0};
        auto tables = perturb::perturbative_biprob(times, obs, spec, m, 1);
        if (exact.entries().rows() != tables.zeroth.entries().rows())
            throw NumericError("scaling study: exact and perturbative tables differ in layout");
        rep.err0[i] = (exact.entries() - tables.zeroth.entries()).cwiseAbs().maxCoeff();
        rep.err1[i] = (exact.entries() - tables.zeroth.entries() - tables.correction.entries()).cwiseAbs().maxCoeff();
    });
    rep.exponent0 = fit_exponent(lambda_grid, rep.err0);
    rep.exponent1 = fit_exponent(lambda_grid, rep.err1);
    std::ostringstream os;
    os << "born dt=" << (ode.dt > 0 ? ode.dt : ode.dt_factor * tau) << "; quadrature rel_tol=" << ode.quad.rel_tol
       << "; cross-coefficient windows = intervention gaps";
    rep.tolerances.push_back(os.str());
    return rep;
}

bath::FiniteBath random_thermal_bath(int dim, double beta, std::uint64_t seed, ComplexMatrix* observable) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    auto random_hermitian = [&] {
        ComplexMatrix A(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) A(i, j) = Complex(g(rng), g(rng));
        return ComplexMatrix(0.5 * (A + A.adjoint()));
    };
    ComplexMatrix H = random_hermitian();
    ComplexMatrix F = random_hermitian();
    auto rho = opalg::thermal_state(H, beta);
    F -= (F * rho.matrix()).trace().real() * ComplexMatrix::Identity(dim, dim);
    if (observable) *observable = F;
    return bath::FiniteBath({H, {F}, rho.matrix(), 1.0, 1.0, beta, -1.0});
}

FdtReport fdt_verification(const bath::FiniteBath& b, const ComplexMatrix& F, const std::vector<double>& omega_grid,
                           const quad::QuadratureConfig& cfg) {
    if (!b.is_thermal()) throw DomainError("fdt_verification: bath state is not thermal at the declared beta");
    opalg::require_hermitian(F, "fdt_verification observable");
    if (F.rows() != b.H_e().rows()) throw DomainError("fdt_verification: observable dimension mismatch");
    double beta = *b.beta();
    int d = static_cast<int>(F.rows());
    ComplexMatrix Fc = F - (F * b.rho_e().matrix()).trace().real() * ComplexMatrix::Identity(d, d);
    bath::FiniteBath probe({b.H_e(), {Fc}, b.rho_e().matrix(), 1.0, b.tau(), beta, b.broadening()});
    bath::CorrelationModel m(probe);
    double eta = probe.broadening();
    double horizon = m.horizon(cfg);
    const auto& lines = probe.lines(0, 0);

    FdtReport rep;
    rep.beta = beta;
    rep.broadening = eta;
    rep.method = "damped half-line quadrature of Im corr vs line-resolved FDT";
    rep.rows.resize(omega_grid.size());
    parallel_for(omega_grid.size(), [&](std::size_t i) {
        double w = omega_grid[i];
        auto f = [&](double t) { return bath::corr_fn(m, t).imag() * std::exp(Complex(-eta * t, -w * t)); };
        auto q = quad::panelled(f, horizon, quad::panel_width(m.tau(), m.max_freq() + std::abs(w)), cfg);
        // each spectral line broadened to a Lorentzian and weighted by the FDT factor at its own frequency
        auto L = [&](double x) { return 2.0 * eta / (eta * eta + x * x); };
        double rhs = 0.0;
        for (const auto& l : lines)
            rhs += 0.25 * l.amp.real() * std::tanh(beta * l.freq / 2.0) * (L(w - l.freq) - L(w + l.freq));
        rep.rows[i] = {w, q.value.imag(), rhs, 0.0, 0.0};
    });
    double scale = 0.0;
    for (const auto& r : rep.rows) scale = std::max(scale, std::abs(r.rhs));
    for (auto& r : rep.rows) {
        r.abs_dev = std::abs(r.lhs - r.rhs);
        r.rel_dev = scale > 0 ? r.abs_dev / scale : r.abs_dev;
        rep.max_rel_dev = std::max(rep.max_rel_dev, r.rel_dev);
    }
    return rep;
}

FdtReport fdt_verification(const bath::ExponentialHighT& e, const std::vector<double>& omega_grid) {
    bath::CorrelationModel m(e);
    double beta = e.beta, tau = e.tau;
    FdtReport rep;
    rep.beta = beta;
    rep.method = "term-wise Laplace transform of the residue series vs tanh-weighted spectral density";
    double scale = 0.0;
    for (double w : omega_grid) {
        double lhs = 0.0;
        if (beta > 0) {
            using std::numbers::pi;
            bath::susceptibility_residue(1.0, beta, tau, 1);  // pole check
            Complex acc = -std::tan(beta / (2.0 * tau)) / Complex(1.0 / tau, w);
            Complex series = 0.0;
            for (long n = 0; n < 2000000; ++n) {
                double k = 2.0 * n + 1.0;
                Complex term = 1.0 / (1.0 - k * k * pi * pi * tau * tau / (beta * beta)) / Complex(k * pi / beta, w);
                series += term;
                if (std::abs(term) < 1e-18 * std::abs(series)) break;
            }
            acc -= 4.0 * tau / beta * series;
            lhs = acc.imag();
        }
        double rhs = beta > 0 ? 0.5 * std::tanh(beta * w / 2.0) * bath::spectral_density(m, w) : 0.0;
        rep.rows.push_back({w, lhs, rhs, std::abs(lhs - rhs), 0.0});
        scale = std::max(scale, std::abs(rhs));
    }
    for (auto& r : rep.rows) {
        r.rel_dev = scale > 0 ? r.abs_dev / scale : r.abs_dev;
        rep.max_rel_dev = std::max(rep.max_rel_dev, r.rel_dev);
    }
    return rep;
}

std::vector<SusceptibilityRow> susceptibility_table(double beta, double tau, const std::vector<double>& t_grid) {
    std::vector<SusceptibilityRow> rows(t_grid.size());
    for (double t : t_grid)
        if (!(t > 0)) throw DomainError("susceptibility table: times must be positive");
    parallel_for(t_grid.size(), [&](std::size_t i) {
        double t = t_grid[i];
        SusceptibilityRow r;
        r.t = t;
        r.residue_sum = bath::susceptibility_residue(t, beta, tau);
        r.high_t_limit = -(beta / (2.0 * tau)) * std::exp(-t / tau);
        r.numeric_ft = bath::im_corr_from_fdt(t, beta, tau);
        r.abs_diff = std::abs(r.residue_sum - r.numeric_ft);
        rows[i] = r;
    });
    return rows;
}

}  // namespace qmtc::experiments
