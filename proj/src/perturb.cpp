// perturb.cpp - regression-formula tables and the first-order cross-intervention correction
#include "qmtc/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <tuple>

namespace qmtc::perturb {

using opalg::superop_from_pair;

Intervention intervention(const HermitianObservable& F, double fplus, double fminus, double t,
                          const ComplexMatrix& Hs) {
    if (Hs.rows() != F.dim()) throw DomainError("intervention: dimension mismatch between F and Hs");
    int ip = F.index_of(fplus), im = F.index_of(fminus);
    if (ip < 0 || im < 0) throw DomainError("intervention: eigenvalue not in the spectrum of F");
    ComplexMatrix U = opalg::unitary_at(Hs, t);
    Intervention iv;
    iv.t = t;
    iv.fplus = F.eigenvalues()[ip];
    iv.fminus = F.eigenvalues()[im];
    iv.raw = superop_from_pair(F.projectors()[ip], F.projectors()[im]);
    // Frame(t) = e^{iHt} . e^{-iHt} = U^dagger . U
    iv.realized = superop_from_pair(U.adjoint(), U) * iv.raw * superop_from_pair(U, U.adjoint());
    return iv;
}

void InterventionGrid::validate() const {
    oracle::MTCQuery q{times, observables, std::vector<oracle::Branch>(times.size(), oracle::Branch::Plus)};
    q.validate();
    opalg::require_hermitian(Hs, "intervention grid Hs");
    if (Hs.rows() != observables.front().dim()) throw DomainError("intervention grid: Hs dimension mismatch");
}

namespace {

// sandwich data for the correction attached to one intervention
struct Sandwich {
    // R_{a,k}: Y -> sum_{a',k'} C [V_a'(-w_k'), Y] + i K {V_a'(-w_k'), Y}, as superoperators
    std::vector<SuperOperator> right;
    std::vector<ComplexMatrix> left;  // V_a(w_k), applied as a commutator
};

class TableEngine {
public:
    TableEngine(const InterventionGrid& grid, const DensityMatrix& rho0, const PropagatorFamily& props)
        : grid_(grid), rho0_(rho0) {
        grid_.validate();
        if (rho0.dim() != grid.Hs.rows()) throw DomainError("initial state dimension mismatch");
        n_ = grid.times.size();
        double prev = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            lambdas_.push_back(props(grid.times[j], prev));
            if (lambdas_.back().dim() != rho0.dim()) throw DomainError("propagator dimension mismatch");
            prev = grid.times[j];
            U_.push_back(opalg::unitary_at(grid.Hs, grid.times[j]));
        }
        std::vector<std::vector<double>> spectra;
        for (const auto& F : grid.observables) spectra.push_back(F.eigenvalues());
        zeroth_ = BiProbTable(grid.times, spectra);
        correction_ = zeroth_;
        strides_.assign(n_, 1);
        for (std::size_t j = 1; j < n_; ++j) strides_[j] = strides_[j - 1] * spectra[j - 1].size();
    }

    void set_sandwiches(std::vector<Sandwich> s) { sandwiches_ = std::move(s); }

    void run() {
        const auto& r = rho0_.matrix();
        ComplexMatrix zero = ComplexMatrix::Zero(r.rows(), r.cols());
        recurse(0, r, zero, 0, 0);
    }

    const BiProbTable& zeroth() const { return zeroth_; }
    const BiProbTable& correction() const { return correction_; }

private:
    void recurse(std::size_t j, const ComplexMatrix& X, const ComplexMatrix& Y, std::size_t plus, std::size_t minus) {
        if (j == n_) {
            zeroth_.at(plus, minus) = X.trace();
            correction_.at(plus, minus) = Y.trace();
            return;
        }
        int d = static_cast<int>(X.rows());
        const auto& U = U_[j];
        // move into the frame of time t_j, where the projectors act unrotated
        ComplexMatrix Z = U * lambdas_[j].apply(X) * U.adjoint();
        bool with_y = !sandwiches_.empty();
        ComplexMatrix W = with_y ? ComplexMatrix(U * lambdas_[j].apply(Y) * U.adjoint()) : ComplexMatrix();
        bool corr_here = with_y && j + 1 < n_;
        std::vector<ComplexMatrix> R;
        if (corr_here)
            for (const auto& s : sandwiches_[j].right) R.push_back(s.apply(Z));
        const auto& P = grid_.observables[j].projectors();
        for (std::size_t ip = 0; ip < P.size(); ++ip)
            for (std::size_t im = 0; im < P.size(); ++im) {
                ComplexMatrix Xn = U.adjoint() * P[ip] * Z * P[im] * U;
                ComplexMatrix Yn = ComplexMatrix::Zero(d, d);
                if (with_y) {
                    ComplexMatrix acc = P[ip] * W * P[im];
                    if (corr_here)
                        for (std::size_t q = 0; q < R.size(); ++q) {
                            ComplexMatrix M = P[ip] * R[q] * P[im];
                            const auto& V = sandwiches_[j].left[q];
                            acc += V * M - M * V;
                        }
                    Yn = U.adjoint() * acc * U;
                }
                recurse(j + 1, Xn, Yn, plus + strides_[j] * ip, minus + strides_[j] * im);
            }
    }

    InterventionGrid grid_;
    DensityMatrix rho0_;
    std::size_t n_ = 0;
    std::vector<SuperOperator> lambdas_;
    std::vector<ComplexMatrix> U_;
    std::vector<std::size_t> strides_;
    std::vector<Sandwich> sandwiches_;
    BiProbTable zeroth_, correction_;
};

// window lengths are clipped at the quadrature horizon; clipped lags get the damping window
struct NestedSetup {
    double A, B, eta;
    bool clipped;
};

NestedSetup nested_setup(const bath::CorrelationModel& m, const quad::QuadratureConfig& cfg, CoefficientWindow w) {
    double cut = cfg.cutoff_factor * m.tau();
    bool clipped = !(w.after <= cut) || !(w.before <= cut);
    return {std::min(w.after, cut), std::min(w.before, cut), clipped ? m.damping() : 0.0, clipped};
}

}  // namespace

BiProbTable qrf_biprob(const InterventionGrid& grid, const DensityMatrix& rho0, const PropagatorFamily& props) {
    TableEngine engine(grid, rho0, props);
    engine.run();
    return engine.zeroth();
}

CrossCoefficients cross_coefficients(const bath::CorrelationModel& m, double omega, double omega_prime,
                                     const quad::QuadratureConfig& cfg, CoefficientWindow window) {
    if (!(window.after >= 0) || !(window.before >= 0)) throw DomainError("cross_coefficients: negative window");
    if (!m.is_exponential()) return cross_coefficients_quadrature(m, omega, omega_prime, cfg, window);
    const auto& e = m.exponential();
    // the exponential kernel factorizes: int_0^A e^{(i w - 1/tau) a} da
    auto factor = [&](double w, double len) {
        Complex rate(1.0 / e.tau, -w);
        if (std::isinf(len)) return 1.0 / rate;
        return (1.0 - std::exp(-rate * len)) / rate;
    };
    Complex ff = factor(omega, window.after) * factor(omega_prime, window.before);
    CrossCoefficients c;
    c.C = Eigen::MatrixXcd::Constant(1, 1, -e.lambda * e.lambda * ff);
    c.K = Eigen::MatrixXcd::Constant(1, 1, e.lambda * e.lambda * (e.beta / (2.0 * e.tau)) * ff);
    return c;
}

CrossCoefficients cross_coefficients_quadrature(const bath::CorrelationModel& m, double omega, double omega_prime,
                                                const quad::QuadratureConfig& cfg, CoefficientWindow window) {
    auto setup = nested_setup(m, cfg, window);
    int nc = m.n_couplings();
    double l2 = m.lambda() * m.lambda();
    quad::QuadratureConfig qc = cfg;
    qc.rel_tol = std::max(cfg.rel_tol, 1e-10);
    double tau = m.tau();
    double outer_panel = quad::panel_width(tau, m.max_freq() + std::abs(omega));
    double inner_panel = quad::panel_width(tau, m.max_freq() + std::abs(omega_prime));
    CrossCoefficients out;
    out.C = Eigen::MatrixXcd::Zero(nc, nc);
    out.K = Eigen::MatrixXcd::Zero(nc, nc);
    for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b)
            for (int part = 0; part < 2; ++part) {
                auto piece = [&](double v) {
                    Complex c = bath::corr_fn(m, v, a, b) * std::exp(-setup.eta * v);
                    return part == 0 ? c.real() : c.imag();
                };
                double inner_err = 0.0;
                auto outer = [&](double x) {
                    auto inner = [&](double y) { return piece(x + y) * std::polar(1.0, omega_prime * y); };
                    auto r = quad::panelled(inner, setup.B, inner_panel, qc);
                    inner_err = std::max(inner_err, r.error);
                    return std::polar(1.0, omega * x) * r.value;
                };
                auto r = quad::panelled(outer, setup.A, outer_panel, qc);
                Complex val = -l2 * r.value;
                (part == 0 ? out.C : out.K)(a, b) = val;
                out.error += l2 * (r.error + inner_err * setup.A);
                for (auto& w : r.warnings) out.warnings.push_back(std::move(w));
            }
    if (setup.clipped && setup.eta > 0)
        out.warnings.push_back("cross coefficients of a non-decaying bath regularized by an exponential window");
    return out;
}

CoefficientProvider make_coefficient_provider(const bath::CorrelationModel& m, const InterventionGrid& grid,
                                              WindowPolicy policy, const quad::QuadratureConfig& cfg) {
    if (policy == WindowPolicy::Auto)
        policy = m.is_exponential() ? WindowPolicy::Infinite : WindowPolicy::InterventionGaps;
    using Key = std::tuple<double, double, double, double>;
    auto cache = std::make_shared<std::map<Key, CrossCoefficients>>();
    std::vector<double> times = grid.times;
    return [m, times, policy, cfg, cache](std::size_t j, double omega, double omega_prime) {
        CoefficientWindow w;
        if (policy == WindowPolicy::InterventionGaps) {
            if (j + 1 >= times.size()) throw DomainError("coefficient provider: no interval after intervention");
            w.after = times[j + 1] - times[j];
            w.before = times[j] - (j == 0 ? 0.0 : times[j - 1]);
        }
        Key key{w.after, w.before, omega, omega_prime};
        auto it = cache->find(key);
        if (it != cache->end()) return it->second;
        auto c = cross_coefficients(m, omega, omega_prime, cfg, w);
        cache->emplace(key, c);
        return c;
    };
}

namespace {

std::pair<BiProbTable, BiProbTable> both_tables(const InterventionGrid& grid, const DensityMatrix& rho0,
                                                const PropagatorFamily& props, const gen::JumpDecomposition& jd,
                                                const CoefficientProvider& coeffs, Diagnostics* diag,
                                                double min_separation) {
    TableEngine engine(grid, rho0, props);
    if (jd.dim() != rho0.dim()) throw DomainError("first_order_biprob: jump decomposition dimension mismatch");
    std::size_t n = grid.times.size();
    std::size_t nf = jd.n_freqs();
    int nc = jd.n_couplings();
    std::vector<Sandwich> sandwiches(n);
    std::set<std::string> warnings;
    double err = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        if (min_separation > 0 && grid.times[j + 1] - grid.times[j] < min_separation) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", min_separation);
            warnings.insert(std::string("interventions closer than the minimum separation ") + buf);
        }
        // coefficient matrices for every (w_k, w_k') pair
        std::vector<CrossCoefficients> cc(nf * nf);
        for (std::size_t k = 0; k < nf; ++k)
            for (std::size_t kp = 0; kp < nf; ++kp) {
                cc[k * nf + kp] = coeffs(j, jd.bohr_freqs[k], jd.bohr_freqs[kp]);
                err += cc[k * nf + kp].error;
                for (const auto& w : cc[k * nf + kp].warnings) warnings.insert(w);
            }
        auto& s = sandwiches[j];
        for (int a = 0; a < nc; ++a)
            for (std::size_t k = 0; k < nf; ++k) {
                SuperOperator R = SuperOperator::zero(jd.dim());
                for (int b = 0; b < nc; ++b)
                    for (std::size_t kp = 0; kp < nf; ++kp) {
                        const auto& c = cc[k * nf + kp];
                        const auto& Vm = jd.jumps[b][jd.negated(kp)];  // V_b(-w_k')
                        R += c.C(a, b) * opalg::commutator_superop(Vm) +
                             Complex(0.0, 1.0) * c.K(a, b) * opalg::anticommutator_superop(Vm);
                    }
                s.right.push_back(R);
                s.left.push_back(jd.jumps[a][k]);
            }
    }
    engine.set_sandwiches(std::move(sandwiches));
    engine.run();
    if (diag) {
        diag->truncation_error += err;
        for (const auto& w : warnings) diag->warnings.push_back(w);
    }
    return {engine.zeroth(), engine.correction()};
}

}  // namespace

BiProbTable first_order_biprob(const InterventionGrid& grid, const DensityMatrix& rho0, const PropagatorFamily& props,
                               const gen::JumpDecomposition& jd, const CoefficientProvider& coeffs, Diagnostics* diag,
                               double min_separation) {
    return both_tables(grid, rho0, props, jd, coeffs, diag, min_separation).second;
}

PropagatorFamily make_propagators(PropagatorKind kind, const gen::JumpDecomposition& jd,
                                  const bath::CorrelationModel& m, const gen::OdeConfig& ode) {
    switch (kind) {
        case PropagatorKind::Davies: {
            auto L = gen::davies_generator(jd, gen::rates_on_bohr_grid(jd, m, ode.quad));
            return [L](double t, double tp) { return opalg::superop_exp(L, t - tp); };
        }
        case PropagatorKind::Redfield: {
            auto rates = gen::rates_on_bohr_grid(jd, m, ode.quad);
            return [jd, rates](double t, double tp) {
                return opalg::superop_exp(gen::redfield_generator(jd, rates, tp, t), t - tp);
            };
        }
        case PropagatorKind::Born:
            return [jd, m, ode](double t, double tp) { return gen::born_propagator(t, tp, jd, m, ode); };
    }
    throw DomainError("unknown propagator kind");
}

PerturbativeTables perturbative_biprob(const std::vector<double>& times,
                                       const std::vector<HermitianObservable>& observables, const SystemSpec& spec,
                                       const bath::CorrelationModel& m, int order) {
    if (order != 0 && order != 1) throw DomainError("unsupported perturbation order " + std::to_string(order));
    if (spec.rho0.dim() != spec.Hs.rows()) throw DomainError("system spec: rho0 dimension mismatch");
    auto jd = gen::jump_decomposition(spec.Hs, spec.couplings);
    InterventionGrid grid{times, observables, spec.Hs};
    auto props = make_propagators(spec.propagator, jd, m, spec.ode);
    PerturbativeTables out;
    out.diagnostics.lambda_tau = m.lambda() * m.tau();
    if (m.high_temperature_flag())
        out.diagnostics.warnings.push_back("exponential model used with beta/tau > 0.2");
    if (order == 0) {
        out.zeroth = qrf_biprob(grid, spec.rho0, props);
        out.correction = out.zeroth - out.zeroth;
        return out;
    }
    auto coeffs = make_coefficient_provider(m, grid, spec.window, spec.ode.quad);
    auto [zeroth, correction] =
        both_tables(grid, spec.rho0, props, jd, coeffs, &out.diagnostics, spec.min_separation_factor * m.tau());
    out.zeroth = std::move(zeroth);
    out.correction = std::move(correction);
    return out;
}

PerturbativeMTCResult mtc_perturbative(const oracle::MTCQuery& q, const SystemSpec& spec,
                                       const bath::CorrelationModel& m, int order) {
    q.validate();
    auto tables = perturbative_biprob(q.times, q.observables, spec, m, order);
    PerturbativeMTCResult r;
    r.zeroth = tables.zeroth.moment(q.branches);
    r.first_correction = order == 1 ? tables.correction.moment(q.branches) : Complex(0.0, 0.0);
    r.total = r.zeroth + r.first_correction;
    r.diagnostics = std::move(tables.diagnostics);
    return r;
}

}  // namespace qmtc::perturb
