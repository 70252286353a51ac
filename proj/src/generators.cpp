// generators.cpp - Davies, Redfield and Born from a jump decomposition
#include "qmtc/generators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qmtc::gen {

using opalg::commutator_superop;
using opalg::superop_from_pair;

JumpDecomposition jump_decomposition(const ComplexMatrix& Hs, const std::vector<ComplexMatrix>& V,
                                     double freq_tol) {
    opalg::require_hermitian(Hs, "jump_decomposition Hs");
    if (V.empty()) throw DomainError("jump_decomposition: no coupling operators");
    for (const auto& v : V) {
        opalg::require_hermitian(v, "jump_decomposition coupling");
        if (v.rows() != Hs.rows()) throw DomainError("jump_decomposition: coupling dimension mismatch");
    }
    double radius = opalg::spectral_radius_hermitian(Hs);
    double tol = freq_tol >= 0 ? freq_tol : 1e-8 * radius;
    auto levels = opalg::spectral_decompose(Hs, tol);
    const auto& E = levels.eigenvalues();
    const auto& P = levels.projectors();

    // positive gaps binned within tol; the frequency set is then mirrored exactly
    std::vector<double> gaps;
    for (double a : E)
        for (double b : E)
            if (a - b > tol) gaps.push_back(a - b);
    std::sort(gaps.begin(), gaps.end());
    std::vector<double> bins;
    std::vector<int> count;
    for (double g : gaps) {
        if (!bins.empty() && g - bins.back() / count.back() <= tol) {
            bins.back() += g;
            ++count.back();
        } else {
            bins.push_back(g);
            count.push_back(1);
        }
    }
    for (std::size_t i = 0; i < bins.size(); ++i) bins[i] /= count[i];

    auto bin_of = [&](double diff) -> double {
        if (std::abs(diff) <= tol) return 0.0;
        double best = 0.0, dist = 1e300;
        for (double b : bins)
            if (std::abs(std::abs(diff) - b) < dist) {
                dist = std::abs(std::abs(diff) - b);
                best = b;
            }
        return diff > 0 ? best : -best;
    };

    std::vector<double> candidates;
    for (auto it = bins.rbegin(); it != bins.rend(); ++it) candidates.push_back(-*it);
    candidates.push_back(0.0);
    for (double b : bins) candidates.push_back(b);

    auto d = Hs.rows();
    std::vector<std::vector<ComplexMatrix>> all(V.size(),
                                                std::vector<ComplexMatrix>(candidates.size(), ComplexMatrix::Zero(d, d)));
    for (std::size_t i = 0; i < E.size(); ++i)
        for (std::size_t j = 0; j < E.size(); ++j) {
            double w = bin_of(E[i] - E[j]);
            auto k = static_cast<std::size_t>(std::find(candidates.begin(), candidates.end(), w) - candidates.begin());
            for (std::size_t a = 0; a < V.size(); ++a) all[a][k] += P[i] * V[a] * P[j];
        }

    JumpDecomposition jd;
    jd.Hs = Hs;
    jd.couplings = V;
    jd.jumps.resize(V.size());
    double vscale = 0.0;
    for (const auto& v : V) vscale = std::max(vscale, v.cwiseAbs().maxCoeff());
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        bool nonzero = false;
        for (std::size_t a = 0; a < V.size(); ++a) nonzero |= all[a][k].cwiseAbs().maxCoeff() > 1e-14 * vscale;
        if (!nonzero) continue;
        jd.bohr_freqs.push_back(candidates[k]);
        for (std::size_t a = 0; a < V.size(); ++a) jd.jumps[a].push_back(all[a][k]);
    }
    return jd;
}

JumpDecomposition jump_decomposition(const ComplexMatrix& Hs, const ComplexMatrix& V, double freq_tol) {
    return jump_decomposition(Hs, std::vector<ComplexMatrix>{V}, freq_tol);
}

Renormalized renormalize(const ComplexMatrix& Hs0, const std::vector<ComplexMatrix>& system_couplings,
                         const std::vector<ComplexMatrix>& env_couplings, const ComplexMatrix& rho_e,
                         double lambda) {
    if (system_couplings.size() != env_couplings.size())
        throw DomainError("renormalize: system and environment coupling counts differ");
    Renormalized r{Hs0, {}};
    for (std::size_t a = 0; a < env_couplings.size(); ++a) {
        Complex mean = (env_couplings[a] * rho_e).trace();
        r.Hs += lambda * mean.real() * system_couplings[a];
        r.env_couplings.push_back(env_couplings[a] -
                                  mean.real() * ComplexMatrix::Identity(env_couplings[a].rows(), env_couplings[a].cols()));
    }
    return r;
}

namespace {

std::vector<std::size_t> rate_indices(const JumpDecomposition& jd, const bath::SpectralRates& rates) {
    std::vector<std::size_t> idx;
    for (double w : jd.bohr_freqs) {
        int k = rates.find(w, 1e-8);
        if (k < 0) throw DomainError("missing rate at Bohr frequency " + std::to_string(w));
        if (rates.w[static_cast<std::size_t>(k)].rows() != jd.n_couplings())
            throw DomainError("rate matrix size does not match the number of couplings");
        idx.push_back(static_cast<std::size_t>(k));
    }
    return idx;
}

SuperOperator left_mul(const ComplexMatrix& A) {
    return superop_from_pair(A, ComplexMatrix::Identity(A.rows(), A.cols()));
}

SuperOperator right_mul(const ComplexMatrix& A) {
    return superop_from_pair(ComplexMatrix::Identity(A.rows(), A.cols()), A);
}

// exact average of e^{i nu u} over [ta, tb]
Complex phase_average(double nu, double ta, double tb) {
    if (nu == 0.0) return 1.0;
    double len = tb - ta;
    if (std::abs(nu * len) < 1e-8) return std::polar(1.0, nu * 0.5 * (ta + tb));
    return (std::polar(1.0, nu * tb) - std::polar(1.0, nu * ta)) / (Complex(0.0, nu) * len);
}

// -sum [V_a(w_k), G(w_k') V_b(w_k') . - conj(G~(-w_k')) . V_b(w_k')] weighted by phase(k, k')
template <class Phase, class Transform>
SuperOperator assemble(const JumpDecomposition& jd, Phase phase, Transform T) {
    int d = jd.dim();
    SuperOperator L = SuperOperator::zero(d);
    std::size_t n = jd.n_freqs();
    for (int a = 0; a < jd.n_couplings(); ++a)
        for (std::size_t k = 0; k < n; ++k) {
            SuperOperator inner = SuperOperator::zero(d);
            bool any = false;
            for (int b = 0; b < jd.n_couplings(); ++b)
                for (std::size_t kp = 0; kp < n; ++kp) {
                    Complex ph = phase(k, kp);
                    if (ph == 0.0) continue;
                    const auto& Vb = jd.jumps[b][kp];
                    Complex g = T(a, b, kp);
                    Complex gt = std::conj(T(a, b, jd.negated(kp)));
                    inner += ph * (g * left_mul(Vb) - gt * right_mul(Vb));
                    any = true;
                }
            if (any) L += Complex(-1.0) * (commutator_superop(jd.jumps[a][k]) * inner);
        }
    return L;
}

}  // namespace

SuperOperator davies_generator(const JumpDecomposition& jd, const bath::SpectralRates& rates) {
    auto idx = rate_indices(jd, rates);
    auto T = [&](int a, int b, std::size_t k) { return rates.transform(idx[k])(a, b); };
    // secular part: only w_k' = -w_k survives
    auto phase = [&](std::size_t k, std::size_t kp) { return kp == jd.negated(k) ? Complex(1.0) : Complex(0.0); };
    return assemble(jd, phase, T);
}

SuperOperator redfield_generator(const JumpDecomposition& jd, const bath::SpectralRates& rates, double ta,
                                 double tb) {
    if (tb < ta) throw DomainError("redfield_generator: interval end precedes start");
    auto idx = rate_indices(jd, rates);
    auto T = [&](int a, int b, std::size_t k) { return rates.transform(idx[k])(a, b); };
    auto phase = [&](std::size_t k, std::size_t kp) {
        if (kp == jd.negated(k)) return Complex(1.0);
        return phase_average(jd.bohr_freqs[k] + jd.bohr_freqs[kp], ta, tb);
    };
    return assemble(jd, phase, T);
}

bath::SpectralRates rates_on_bohr_grid(const JumpDecomposition& jd, const bath::CorrelationModel& m,
                                       const quad::QuadratureConfig& cfg) {
    if (m.n_couplings() != jd.n_couplings())
        throw DomainError("correlation model and jump decomposition have different coupling counts");
    return bath::gamma_rates(m, jd.bohr_freqs, cfg);
}

GeneratorBundle make_generators(const JumpDecomposition& jd, const bath::CorrelationModel& m, double ta, double tb,
                                const quad::QuadratureConfig& cfg) {
    auto rates = rates_on_bohr_grid(jd, m, cfg);
    return {davies_generator(jd, rates), redfield_generator(jd, rates, ta, tb), jd, rates};
}

namespace {

// lambda^2 int_0^T c_ab(s) e^{-i w_k s} ds for every (a, b, k), accumulated panel by panel
class CumulativeTransform {
public:
    CumulativeTransform(const JumpDecomposition& jd, const bath::CorrelationModel& m)
        : jd_(jd), m_(m), nc_(jd.n_couplings()), values_(static_cast<std::size_t>(nc_ * nc_) * jd.n_freqs(), 0.0) {}

    void advance(double from, double to) {
        if (to <= from) return;
        // keep every panel below half an oscillation of the fastest component
        double fastest = m_.max_freq() + (jd_.bohr_freqs.empty() ? 0.0 : std::abs(jd_.bohr_freqs.back()));
        int pieces = std::max(1, static_cast<int>(std::ceil((to - from) * fastest / 3.0)));
        double l2 = m_.lambda() * m_.lambda();
        double h = (to - from) / pieces;
        for (int p = 0; p < pieces; ++p) {
            double a0 = from + p * h, a1 = (p + 1 == pieces) ? to : from + (p + 1) * h;
            for (int a = 0; a < nc_; ++a)
                for (int b = 0; b < nc_; ++b)
                    for (std::size_t k = 0; k < jd_.n_freqs(); ++k) {
                        double w = jd_.bohr_freqs[k];
                        auto f = [&](double s) { return bath::corr_fn(m_, s, a, b) * std::polar(1.0, -w * s); };
                        at(a, b, k) += l2 * quad::gauss_panel(f, a0, a1);
                    }
        }
    }

    Complex& at(int a, int b, std::size_t k) {
        return values_[(static_cast<std::size_t>(a * nc_ + b)) * jd_.n_freqs() + k];
    }

private:
    const JumpDecomposition& jd_;
    const bath::CorrelationModel& m_;
    int nc_;
    std::vector<Complex> values_;
};

SuperOperator born_generator(double t, const JumpDecomposition& jd, CumulativeTransform& G) {
    auto T = [&](int a, int b, std::size_t k) { return G.at(a, b, k); };
    auto phase = [&](std::size_t k, std::size_t kp) {
        return std::polar(1.0, (jd.bohr_freqs[k] + jd.bohr_freqs[kp]) * t);
    };
    return assemble(jd, phase, T);
}

}  // namespace

SuperOperator second_supercumulant(double t, double t0, const JumpDecomposition& jd, const bath::CorrelationModel& m,
                                   const quad::QuadratureConfig& cfg) {
    if (t < t0) throw DomainError("second_supercumulant: t must be >= t0");
    if (m.n_couplings() != jd.n_couplings())
        throw DomainError("correlation model and jump decomposition have different coupling counts");
    CumulativeTransform G(jd, m);
    double T = std::min(t - t0, m.horizon(cfg));
    double step = m.tau();
    for (double s = 0.0; s < T; s += step) G.advance(s, std::min(T, s + step));
    return born_generator(t, jd, G);
}

SuperOperator born_propagator(double t1, double t0, const JumpDecomposition& jd, const bath::CorrelationModel& m,
                              const OdeConfig& ode) {
    if (t1 < t0) throw DomainError("born_propagator: t1 must be >= t0");
    if (m.n_couplings() != jd.n_couplings())
        throw DomainError("correlation model and jump decomposition have different coupling counts");
    int d = jd.dim();
    SuperOperator Lambda = SuperOperator::identity(d);
    double span = t1 - t0;
    if (span == 0.0) return Lambda;
    double dt = ode.dt > 0 ? ode.dt : ode.dt_factor * m.tau();
    if (!(dt > 0) || dt < 1e-12 * span)
        throw NumericError("born_propagator: step size underflow (dt = " + std::to_string(dt) + ")");
    double nsteps_real = std::ceil(span / dt - 1e-9);
    if (nsteps_real > static_cast<double>(ode.max_steps))
        throw NumericError("born_propagator: " + std::to_string(nsteps_real) + " steps exceed the limit of " +
                           std::to_string(ode.max_steps));
    long N = std::max(1L, static_cast<long>(nsteps_real));
    double h = span / static_cast<double>(N);
    double horizon = m.horizon(ode.quad);

    CumulativeTransform G(jd, m);
    double covered = 0.0;
    auto generator_at = [&](double tau_rel) {
        double target = std::min(tau_rel, horizon);
        G.advance(covered, target);
        covered = std::max(covered, target);
        return born_generator(t0 + tau_rel, jd, G);
    };

    SuperOperator L0 = generator_at(0.0);
    for (long s = 0; s < N; ++s) {
        double ts = s * h;
        SuperOperator Lm = generator_at(ts + 0.5 * h);
        SuperOperator L1 = generator_at(ts + h);
        const auto& X = Lambda.matrix();
        ComplexMatrix k1 = L0.matrix() * X;
        ComplexMatrix k2 = Lm.matrix() * (X + 0.5 * h * k1);
        ComplexMatrix k3 = Lm.matrix() * (X + 0.5 * h * k2);
        ComplexMatrix k4 = L1.matrix() * (X + h * k3);
        Lambda = SuperOperator(d, X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        if (!Lambda.matrix().allFinite())
            throw NumericError("born_propagator: non-finite state at t = " + std::to_string(t0 + ts + h));
        L0 = std::move(L1);
    }
    return Lambda;
}

}  // namespace qmtc::gen
