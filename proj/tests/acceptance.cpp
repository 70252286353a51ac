// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "qmtc/experiments.hpp"
#include "qmtc/generators.hpp"
#include "qmtc/mtc_oracle.hpp"
#include "qmtc/perturb.hpp"
#include "support.hpp"

using namespace qmtc;
using oracle::Branch;
using testsupport::max_abs;
using testsupport::pauli;
using testsupport::Complex;
using testsupport::ComplexMatrix;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

// shared model of the dephasing-qubit example
constexpr double kTau = 1.0, kLambda = 0.1, kBeta = 0.2, kMu = 0.05;
constexpr double kT1 = 10.0;

perturb::SystemSpec qubit_spec() {
    perturb::SystemSpec s;
    s.Hs = ComplexMatrix::Zero(2, 2);
    s.couplings = {pauli('x')};
    s.rho0 = opalg::DensityMatrix(ComplexMatrix::Identity(2, 2) / 2.0);
    return s;
}

std::vector<double> omega_grid() { return experiments::linspace(-0.5, 0.5, 21); }

// 2 mu^2 Re int_0^inf m(u) e^{-i w u} du by composite Simpson on sampled MTC values
struct RateOracle {
    double h = 0.0625, horizon = 1000.0;
    std::vector<Complex> m0, m1;

    RateOracle() {
        bath::CorrelationModel model(bath::ExponentialHighT{kTau, kBeta, kLambda});
        auto Z = opalg::spectral_decompose(pauli('z'));
        auto spec = qubit_spec();
        spec.min_separation_factor = 0.0;
        int n = static_cast<int>(horizon / h);
        for (int i = 0; i <= n; ++i) {
            oracle::MTCQuery q{{kT1, kT1 + i * h}, {Z, Z}, {Branch::Plus, Branch::Plus}};
            auto r = perturb::mtc_perturbative(q, spec, model, 1);
            m0.push_back(r.zeroth);
            m1.push_back(r.total);
        }
    }

    double rate(int order, double w) const {
        const auto& m = order == 0 ? m0 : m1;
        Complex acc = 0.0;
        int n = static_cast<int>(m.size()) - 1;
        for (int i = 0; i <= n; ++i) {
            double wt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += wt * m[i] * std::polar(1.0, -w * i * h);
        }
        return 2 * kMu * kMu * (acc * h / 3.0).real();
    }
};

const RateOracle& rate_oracle() {
    static RateOracle o;
    return o;
}

Outcome criterion1() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    auto rep = experiments::run_thermalization_demo(kBeta, kLambda, kMu, kTau, omega_grid(),
                                                    experiments::linspace(0.0, 10.0, 11));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double wb = 2 * kLambda * kLambda * kTau;
    double max_ratio = 0, max_closed = 0, max_quad = 0;
    for (const auto& r : rep.rows) {
        max_ratio = std::max(max_ratio, std::abs(r.ratio0 - 1.0));
        // the defining integral 2 mu^2 Re int m e^{-iwu} gives 4 mu^2 w_b / ((2 w_b)^2 + w^2);
        // the literal 8 mu^2 prefactor is twice that (see README)
        double closed = 4 * kMu * kMu * wb / (4 * wb * wb + r.omega * r.omega);
        max_closed = std::max(max_closed, std::abs(r.wq0 - closed) / closed);
        max_quad = std::max(max_quad, std::abs(r.wq0 - rate_oracle().rate(0, r.omega)) / closed);
    }
    o.pass = rep.transform_path == "analytic" && max_ratio <= 1e-10 && max_closed <= 1e-10 && max_quad <= 1e-6 &&
             std::abs(rep.bath_rate0 - wb) <= 1e-12 && secs < 1.0;
    o.detail = "path=" + rep.transform_path + " max|ratio0-1|=" + fmt(max_ratio) + " rate vs 4mu^2 w/(4w^2+omega^2) rel=" +
               fmt(max_closed) + " vs quadrature rel=" + fmt(max_quad) + " (literal 8mu^2 prefactor differs by 2x)" +
               " runtime=" + fmt(secs) + "s";
    return o;
}

Outcome criterion2() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    auto rep = experiments::run_thermalization_demo(kBeta, kLambda, kMu, kTau, omega_grid(),
                                                    experiments::linspace(0.0, 10.0, 11));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double max_pade = 0, worst_margin = -1e300, max_quad = 0;
    bool cubic = true;
    for (const auto& r : rep.rows) {
        double x = kBeta * r.omega;
        double pade = (1 + x / 2) / (1 - x / 2);
        max_pade = std::max(max_pade, std::abs(r.ratio1 - pade));
        double dev = std::abs(r.ratio1 - std::exp(x));
        double bound = std::abs(x * x * x);
        if (!(dev < bound || (x == 0.0 && dev < 1e-12))) cubic = false;
        if (x != 0.0) worst_margin = std::max(worst_margin, dev / bound);
        double q = rate_oracle().rate(1, -r.omega) / rate_oracle().rate(1, r.omega);
        max_quad = std::max(max_quad, std::abs(q - pade));
    }
    o.pass = max_pade <= 1e-6 && cubic && max_quad <= 1e-6 && secs < 5.0;
    o.detail = "max|ratio1-(1+bw/2)/(1-bw/2)|=" + fmt(max_pade) + " quadrature oracle=" + fmt(max_quad) +
               " max |ratio1-e^{bw}|/|bw|^3=" + fmt(worst_margin) + " runtime=" + fmt(secs) + "s";
    return o;
}

Outcome criterion3() {
    Outcome o;
    bath::CorrelationModel m(bath::ExponentialHighT{kTau, kBeta, kLambda});
    double closed = kLambda * kLambda * kBeta * kTau / 2;
    auto nested = perturb::cross_coefficients_quadrature(m, 0.0, 0.0);
    double relK = std::abs(nested.K(0, 0) - closed) / closed;

    auto Z = opalg::spectral_decompose(pauli('z'));
    double dt = 3.0;
    auto tables = perturb::perturbative_biprob({kT1, kT1 + dt}, {Z, Z}, qubit_spec(), m, 1);
    double decay = std::exp(-2 * 2 * kLambda * kLambda * kTau * dt);
    Complex coeff(0.0, -0.5 * kLambda * kLambda * kTau * kBeta);
    const auto& Q = tables.correction;
    double worst = 0;
    for (std::size_t p = 0; p < Q.n_tuples(); ++p)
        for (std::size_t q = 0; q < Q.n_tuples(); ++q) {
            auto ip = Q.unflatten(p), iq = Q.unflatten(q);
            double s1p = Q.spectra()[0][ip[0]], s2p = Q.spectra()[1][ip[1]];
            double s1m = Q.spectra()[0][iq[0]], s2m = Q.spectra()[1][iq[1]];
            Complex expect = (s1p == -s1m && s2p == s2m) ? coeff * s1p * s2p * decay : Complex(0, 0);
            worst = std::max(worst, std::abs(Q.at(p, q) - expect));
        }
    o.pass = relK <= 1e-6 && worst <= 1e-8;
    o.detail = "nested K(0,0) rel dev=" + fmt(relK) + " correction entries vs -(i/2)lambda^2 tau beta: max abs dev=" +
               fmt(worst);
    return o;
}

Outcome criterion4() {
    Outcome o;
    bath::CorrelationModel m(bath::ExponentialHighT{kTau, kBeta, kLambda});
    auto jd = gen::jump_decomposition(ComplexMatrix::Zero(2, 2), pauli('x'));
    auto L = gen::davies_generator(jd, gen::rates_on_bohr_grid(jd, m));
    double wb = 2 * kLambda * kLambda * kTau;
    auto expect = Complex(wb, 0) * (opalg::superop_from_pair(pauli('x'), pauli('x')) - opalg::SuperOperator::identity(2));
    double gen_dev = max_abs(L.matrix() - expect.matrix());
    double min_choi = 1e300;
    for (double t : {0.1, 1.0, 5.0, 20.0})
        min_choi = std::min(min_choi, opalg::channel_diagnostics(opalg::superop_exp(L, t / wb)).min_choi_eigenvalue);
    ComplexMatrix one = ComplexMatrix::Zero(2, 2);
    one(0, 0) = 1.0;
    double relax = max_abs(opalg::superop_exp(L, 20.0 / wb).apply(one) - ComplexMatrix::Identity(2, 2) / 2.0);
    o.pass = gen_dev <= 1e-12 && min_choi >= -1e-9 && relax <= 1e-8;
    o.detail = "generator max entry dev=" + fmt(gen_dev) + " min Choi eigenvalue=" + fmt(min_choi) +
               " |state(20/w)-1/2|=" + fmt(relax);
    return o;
}

Outcome criterion5() {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    auto s = experiments::default_scaling_setup();
    auto rep = experiments::error_scaling_study(s.bath, s.system, {0.02, 0.04, 0.08}, s.times);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool below = true;
    std::ostringstream os;
    for (std::size_t i = 0; i < rep.lambdas.size(); ++i) {
        below = below && rep.err1[i] < rep.err0[i];
        os << " [" << rep.lambdas[i] << ": " << fmt(rep.err0[i]) << " -> " << fmt(rep.err1[i]) << "]";
    }
    o.pass = rep.exponent0 >= 1.6 && rep.exponent0 <= 2.4 && below && secs < 60.0;
    o.detail = "order-0 slope=" + fmt(rep.exponent0) + " errors" + os.str() + " runtime=" + fmt(secs) + "s";
    return o;
}

// tr[A rho B^dagger] straight from the definition
Complex mtc_reference(const std::vector<double>& times, const std::vector<ComplexMatrix>& F,
                      const std::vector<Branch>& br, const ComplexMatrix& H, const ComplexMatrix& rho) {
    int d = static_cast<int>(H.rows());
    ComplexMatrix A = ComplexMatrix::Identity(d, d), B = ComplexMatrix::Identity(d, d);
    for (std::size_t j = 0; j < times.size(); ++j) {
        ComplexMatrix Fj = oracle::heisenberg(F[j], H, times[j]);
        if (br[j] == Branch::Plus)
            A = Fj * A;
        else
            B = Fj * B;
    }
    return (A * rho * B.adjoint()).trace();
}

Outcome criterion6() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dims(2, 8), lens(1, 3);
    std::uniform_real_distribution<double> dt(0.05, 1.5);
    double norm = 0, herm = 0, marg = 0, mom = 0;
    for (int trial = 0; trial < 50; ++trial) {
        int d = dims(rng);
        std::size_t n = static_cast<std::size_t>(lens(rng));
        ComplexMatrix H = testsupport::random_hermitian(d, rng);
        opalg::DensityMatrix rho(testsupport::random_density(d, rng));
        std::vector<double> times;
        std::vector<ComplexMatrix> F;
        std::vector<opalg::HermitianObservable> obs;
        double t = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            t += dt(rng);
            times.push_back(t);
            F.push_back(testsupport::random_observable(d, rng, j % 2 == 0));
            obs.push_back(opalg::spectral_decompose(F.back()));
        }
        auto table = oracle::biprob_exact(times, obs, H, rho);
        norm = std::max(norm, std::abs(table.total() - 1.0));
        herm = std::max(herm, table.hermiticity_defect());
        if (n > 1) {
            std::vector<double> shorter(times.begin(), times.end() - 1);
            std::vector<opalg::HermitianObservable> fewer(obs.begin(), obs.end() - 1);
            auto prev = oracle::biprob_exact(shorter, fewer, H, rho);
            marg = std::max(marg, max_abs(table.marginalize_latest().entries() - prev.entries()));
        }
        for (unsigned bits = 0; bits < (1u << n); ++bits) {
            std::vector<Branch> br;
            for (std::size_t j = 0; j < n; ++j) br.push_back((bits >> j) & 1u ? Branch::Minus : Branch::Plus);
            Complex ref = mtc_reference(times, F, br, H, rho.matrix());
            mom = std::max(mom, std::abs(table.moment(br) - ref));
            mom = std::max(mom, std::abs(oracle::mtc_exact({times, obs, br}, H, rho) - ref));
        }
    }
    o.pass = norm <= 1e-10 && herm <= 1e-12 && marg <= 1e-10 && mom <= 1e-10;
    o.detail = "50 instances: normalization=" + fmt(norm) + " hermiticity=" + fmt(herm) + " marginalization=" +
               fmt(marg) + " moments=" + fmt(mom);
    return o;
}

Outcome criterion7() {
    using Rational = boost::multiprecision::cpp_rational;
    Outcome o;
    // explicit formulas with exact rationals
    std::map<std::vector<int>, Rational> mom{{{1}, Rational(1, 3)},     {{2}, Rational(-2, 5)},  {{3}, Rational(3, 7)},
                                             {{2, 1}, Rational(5, 11)}, {{3, 1}, Rational(-1, 2)}, {{3, 2}, Rational(2, 9)},
                                             {{3, 2, 1}, Rational(7, 13)}};
    std::function<Rational(const std::vector<int>&)> m = [&](const std::vector<int>& s) { return mom.at(s); };
    auto M = [&](std::vector<int> s) { return mom.at(s); };
    bool explicit_ok = oracle::cumulant(m, {1}) == M({1}) && oracle::cumulant(m, {2, 1}) == M({2, 1}) - M({2}) * M({1}) &&
                       oracle::cumulant(m, {3, 2, 1}) == M({3, 2, 1}) + 2 * M({3}) * M({2}) * M({1}) -
                                                             M({3}) * M({2, 1}) - M({3, 2}) * M({1}) - M({3, 1}) * M({2});

    bool round_trip = true;
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> num(-20, 20), den(1, 9);
    for (int n = 1; n <= 5; ++n) {
        std::vector<int> seq;
        for (int i = n; i >= 1; --i) seq.push_back(i);
        std::map<std::vector<int>, Rational> table;
        std::function<Rational(const std::vector<int>&)> mm = [&](const std::vector<int>& s) {
            auto it = table.find(s);
            if (it == table.end()) it = table.emplace(s, Rational(num(rng), den(rng))).first;
            return it->second;
        };
        std::map<std::vector<int>, Rational> cum;
        for (unsigned mask = 1; mask < (1u << n); ++mask) {
            std::vector<int> sub;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) sub.push_back(seq[i]);
            cum[sub] = oracle::cumulant(mm, sub);
        }
        Rational total = 0;
        for (const auto& part : oracle::ordered_partitions(n)) {
            Rational prod = 1;
            for (const auto& blk : part) prod *= cum.at(blk);
            total += prod;
        }
        round_trip = round_trip && total == mm(seq);
    }

    const std::size_t bell[] = {1, 2, 5, 15, 52};
    bool counts = true;
    std::string got;
    for (int n = 1; n <= 5; ++n) {
        auto c = oracle::ordered_partitions(n).size();
        counts = counts && c == bell[n - 1];
        got += (n > 1 ? "," : "") + std::to_string(c);
    }
    o.pass = explicit_ok && round_trip && counts;
    o.detail = std::string("explicit n<=3 ") + (explicit_ok ? "exact" : "MISMATCH") + ", rational round trip n<=5 " +
               (round_trip ? "exact" : "MISMATCH") + ", partition counts " + got;
    return o;
}

Outcome criterion8() {
    Outcome o;
    double worst = 0;
    std::mt19937_64 rng(31);
    auto Z = opalg::spectral_decompose(pauli('z'));
    for (int trial = 0; trial < 10; ++trial) {
        int de = 2 + trial % 3;
        ComplexMatrix He = testsupport::random_hermitian(de, rng);
        ComplexMatrix rho_e = opalg::thermal_state(He, 0.5).matrix();
        ComplexMatrix E = testsupport::random_hermitian(de, rng);
        E -= (E * rho_e).trace().real() * ComplexMatrix::Identity(de, de);
        bath::CorrelationModel m(bath::FiniteBath({He, {E}, rho_e, 0.05, 1.0, 0.5, -1.0}));
        int ds = 2 + trial % 2;
        perturb::SystemSpec s;
        s.Hs = testsupport::random_hermitian(ds, rng) * 0.5;
        s.couplings = {testsupport::random_hermitian(ds, rng)};
        s.rho0 = opalg::DensityMatrix(testsupport::random_density(ds, rng));
        s.propagator = trial % 2 ? perturb::PropagatorKind::Redfield : perturb::PropagatorKind::Davies;
        auto F = opalg::spectral_decompose(testsupport::random_observable(ds, rng, true));
        auto t = perturb::perturbative_biprob({1.0, 2.5, 4.0}, {F, F, F}, s, m, 1);
        worst = std::max(worst, std::abs(t.correction.total()));
    }
    bath::CorrelationModel m(bath::ExponentialHighT{kTau, kBeta, kLambda});
    auto t = perturb::perturbative_biprob({kT1, kT1 + 3.0}, {Z, Z}, qubit_spec(), m, 1);
    double example = std::abs(t.correction.total());
    o.pass = worst <= 1e-10 && example <= 1e-10;
    o.detail = "10 random models max |sum|=" + fmt(worst) + ", dephasing-qubit example |sum|=" + fmt(example);
    return o;
}

Outcome criterion9() {
    Outcome o;
    double worst = 0;
    for (double t = 0.5; t <= 5.0 + 1e-12; t += 0.125)
        worst = std::max(worst, std::abs(bath::susceptibility_residue(t, 0.1, 1.0) - bath::im_corr_from_fdt(t, 0.1, 1.0)));
    double worst_ht = 0;
    for (double t = 1.0; t <= 5.0 + 1e-12; t += 0.25) {
        double limit = -(0.05 / 2.0) * std::exp(-t);
        worst_ht = std::max(worst_ht, std::abs(bath::susceptibility_residue(t, 0.05, 1.0) - limit) / std::abs(limit));
    }
    o.pass = worst <= 1e-4 && worst_ht <= 0.05;
    o.detail = "residue vs numeric inverse transform max abs diff=" + fmt(worst) + ", high-T limit max rel dev=" +
               fmt(worst_ht);
    return o;
}

Outcome criterion10() {
    Outcome o;
    ComplexMatrix F;
    auto b = experiments::random_thermal_bath(4, 0.7, 7, &F);
    auto rep = experiments::fdt_verification(b, F, experiments::linspace(-2.0, 2.0, 41));
    double worst_abs = 0;
    for (const auto& r : rep.rows) worst_abs = std::max(worst_abs, r.abs_dev);
    o.pass = rep.rows.size() == 41 && rep.max_rel_dev <= 1e-6 && worst_abs <= 1e-6;
    o.detail = "41 points: max abs dev=" + fmt(worst_abs) + " max dev relative to max|rhs|=" + fmt(rep.max_rel_dev);
    return o;
}

}  // namespace

int main() {
    std::vector<std::function<Outcome()>> checks{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                 criterion6, criterion7, criterion8, criterion9, criterion10};
    int failed = 0;
    for (std::size_t i = 0; i < checks.size(); ++i) {
        Outcome o;
        try {
            o = checks[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("criterion %2zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
