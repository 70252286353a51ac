#include "doctest.h"
#include "support.hpp"

#include <numbers>

#include "qmtc/bath.hpp"
#include "qmtc/experiments.hpp"
#include "qmtc/mtc_oracle.hpp"

using namespace qmtc;
using namespace qmtc::bath;
using std::numbers::pi;
using testsupport::max_abs;
using testsupport::pauli;

namespace {

FiniteBath two_level_bath(double Omega, double beta, double lambda = 0.1) {
    ComplexMatrix He = 0.5 * Omega * pauli('z');
    ComplexMatrix rho = opalg::thermal_state(He, beta).matrix();
    ComplexMatrix E = pauli('x');  // tr(E rho) = 0 for a diagonal state
    return FiniteBath({He, {E}, rho, lambda, 1.0, beta, -1.0});
}

}  // namespace

TEST_CASE("exponential correlation function") {
    CorrelationModel m(ExponentialHighT{2.0, 0.3, 0.1});
    CHECK(corr_fn(m, 0.0).real() == doctest::Approx(1.0));
    for (double u : {0.0, 0.5, 3.0}) {
        CHECK(corr_fn(m, u).real() == doctest::Approx(std::exp(-u / 2.0)));
        CHECK(corr_fn(m, u).imag() == doctest::Approx(-(0.3 / 4.0) * std::exp(-u / 2.0)));
    }
    CHECK_THROWS_AS(corr_fn(m, -1.0), DomainError);
    CHECK_FALSE(m.high_temperature_flag());
    CHECK(CorrelationModel(ExponentialHighT{1.0, 0.5, 0.1}).high_temperature_flag());
}

TEST_CASE("finite bath correlations match a direct trace and are stationary") {
    std::mt19937_64 rng(4);
    ComplexMatrix He = testsupport::random_hermitian(4, rng);
    ComplexMatrix rho = opalg::thermal_state(He, 0.6).matrix();
    ComplexMatrix E = testsupport::random_hermitian(4, rng);
    E -= (E * rho).trace().real() * ComplexMatrix::Identity(4, 4);
    CorrelationModel m(FiniteBath({He, {E}, rho, 0.1, 1.0, 0.6, -1.0}));
    for (double u : {0.0, 0.7, 2.3}) {
        Complex direct = (oracle::heisenberg(E, He, u) * E * rho).trace();
        CHECK(std::abs(corr_fn(m, u) - direct) < 1e-12);
        for (double s : {0.4, 3.1}) {
            Complex shifted = (oracle::heisenberg(E, He, u + s) * oracle::heisenberg(E, He, s) * rho).trace();
            CHECK(std::abs(shifted - direct) < 1e-12);
        }
    }
}

TEST_CASE("infinite-temperature finite bath has real correlations") {
    std::mt19937_64 rng(6);
    ComplexMatrix He = testsupport::random_hermitian(3, rng);
    ComplexMatrix E = testsupport::random_hermitian(3, rng);
    E -= (E.trace().real() / 3.0) * ComplexMatrix::Identity(3, 3);
    CorrelationModel m(FiniteBath({He, {E}, ComplexMatrix::Identity(3, 3) / 3.0, 0.1, 1.0, 0.0, -1.0}));
    for (double u = 0.0; u < 10.0; u += 0.37) CHECK(std::abs(corr_fn(m, u).imag()) < 1e-14);
}

TEST_CASE("finite bath validation") {
    std::mt19937_64 rng(7);
    ComplexMatrix He = testsupport::random_hermitian(3, rng);
    ComplexMatrix rho = testsupport::random_density(3, rng);  // does not commute with He
    ComplexMatrix E = ComplexMatrix::Zero(3, 3);
    CHECK_THROWS_AS(FiniteBath({He, {E}, rho, 0.1, 1.0, std::nullopt, -1.0}), DomainError);
    ComplexMatrix th = opalg::thermal_state(He, 1.0).matrix();
    CHECK_THROWS_AS(FiniteBath({He, {ComplexMatrix::Identity(3, 3)}, th, 0.1, 1.0, 1.0, -1.0}), DomainError);
    CHECK_THROWS_AS(FiniteBath({He, {E}, th, 0.1, -1.0, 1.0, -1.0}), DomainError);
}

TEST_CASE("exponential rates in closed form") {
    double tau = 1.5, lambda = 0.1;
    CorrelationModel m(ExponentialHighT{tau, 0.0, lambda});
    std::vector<double> omegas{-1.0, 0.0, 0.4, 2.0};
    auto r = gamma_rates(m, omegas);
    CHECK(r.w[1](0, 0) == doctest::Approx(2 * lambda * lambda * tau).epsilon(1e-14));
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        double w = omegas[k];
        // int_0^inf e^{-u/tau} e^{-i w u} du = tau / (1 + i w tau)
        Complex G = tau / Complex(1.0, w * tau);
        CHECK(r.w[k](0, 0) == doctest::Approx(2 * lambda * lambda * G.real()).epsilon(1e-13));
        CHECK(r.h[k](0, 0) == doctest::Approx(-2 * lambda * lambda * G.imag()).epsilon(1e-13));
        CHECK(r.w[k](0, 0) >= 0.0);
        Complex gamma = r.gamma(k)(0, 0);
        CHECK(gamma == Complex(r.w[k](0, 0) / 2.0, r.h[k](0, 0) / 2.0));
        CHECK(r.transform(k)(0, 0) == std::conj(gamma));
    }
    CHECK(r.find(0.4) == 2);
    CHECK(r.find(0.41) == -1);
    quad::QuadratureConfig short_cut;
    short_cut.cutoff_factor = 10;
    CHECK_THROWS_AS(gamma_rates(m, {0.0}, short_cut), DomainError);
}

TEST_CASE("exponential rates with temperature against quadrature of the correlation") {
    CorrelationModel m(ExponentialHighT{1.0, 0.2, 0.1});
    for (double w : {-0.7, 0.0, 1.3}) {
        auto r = gamma_rates(m, {w});
        auto q = finite_transform(m, w, 60.0, 0, 0);
        CHECK(std::abs(r.transform(0)(0, 0) - 0.01 * q.value) < 1e-12);
    }
}

TEST_CASE("two-level finite bath rates match the damped oscillatory closed form") {
    double Omega = 0.8, beta = 0.7;
    auto b = two_level_bath(Omega, beta, 0.1);
    CorrelationModel m(b);
    double eta = b.broadening(), H = m.horizon({});
    ComplexMatrix rho = b.rho_e().matrix();
    // c(u) = p_up e^{i Omega u} + p_down e^{-i Omega u} for E = sigma_x, He = Omega sigma_z / 2
    double pu = rho(0, 0).real(), pd = rho(1, 1).real();
    auto window = [&](double nu, double w) {
        Complex z(-eta, nu - w);
        return (std::exp(z * H) - 1.0) / z;
    };
    for (double w : {-Omega, 0.0, 0.3, Omega}) {
        Complex G = pu * window(Omega, w) + pd * window(-Omega, w);
        auto r = gamma_rates(m, {w});
        CHECK(std::abs(r.transform(0)(0, 0) - 0.01 * G) < 1e-10 * std::max(1.0, std::abs(G)));
    }
    // thermal bath: positive rates on its own Bohr grid, with KMS ratio
    auto r = gamma_rates(m, {-Omega, Omega});
    CHECK(r.w[0](0, 0) > 0);
    CHECK(r.w[1](0, 0) > 0);
}

TEST_CASE("thermal finite bath rates are nonnegative on the Bohr grid") {
    std::mt19937_64 rng(12);
    ComplexMatrix F;
    auto b = experiments::random_thermal_bath(4, 0.8, 99, &F);
    CorrelationModel m(b);
    std::vector<double> grid;
    for (const auto& l : b.lines(0, 0)) grid.push_back(l.freq);
    auto r = gamma_rates(m, grid);
    for (const auto& w : r.w) CHECK(w(0, 0) >= -1e-10);
}

TEST_CASE("spectral density of the exponential model") {
    CorrelationModel m(ExponentialHighT{1.3, 0.1, 0.1});
    CHECK(spectral_density(m, 0.0) == doctest::Approx(2.6));
    for (double w : {0.2, 1.1, 4.0}) CHECK(spectral_density(m, w) == doctest::Approx(spectral_density(m, -w)));
    // int S dw / 2pi = Re c(0) = 1 ; the Lorentzian integral is done on u = tan(theta)
    auto f = [&](double th) {
        double w = std::tan(th) / 1.3;
        return Complex(spectral_density(m, w) / (2 * pi) / (1.3 * std::cos(th) * std::cos(th)), 0.0);
    };
    CHECK(quad::integrate(f, -pi / 2, pi / 2).value.real() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("fdt imaginary spectrum") {
    CorrelationModel hot(ExponentialHighT{1.0, 0.0, 0.1});
    for (double w : {-1.0, 0.0, 2.0}) CHECK(fdt_im_spectrum(hot, w) == 0.0);
    CorrelationModel m(ExponentialHighT{1.0, 0.3, 0.1});
    CHECK(fdt_im_spectrum(m, 0.5) == doctest::Approx(0.5 * std::tanh(0.075) * 2.0 / 1.25));

    std::mt19937_64 rng(1);
    ComplexMatrix He = testsupport::random_hermitian(3, rng);
    ComplexMatrix rho = opalg::thermal_state(He, 1.0).matrix();
    ComplexMatrix E = testsupport::random_hermitian(3, rng);
    E -= (E * rho).trace().real() * ComplexMatrix::Identity(3, 3);
    // declared beta differs from the state's temperature
    CorrelationModel wrong(FiniteBath({He, {E}, rho, 0.1, 1.0, 2.0, -1.0}));
    CHECK_THROWS_AS(fdt_im_spectrum(wrong, 0.1), DomainError);
}

TEST_CASE("FDT-reconstructed imaginary part approaches the high-temperature limit") {
    double tau = 1.0, beta = 0.05;
    for (double t = 1.0; t <= 5.0; t += 0.5) {
        double limit = -(beta / (2 * tau)) * std::exp(-t / tau);
        CHECK(std::abs(im_corr_from_fdt(t, beta, tau) - limit) < 0.05 * std::abs(limit));
    }
    CHECK(im_corr_from_fdt(1.0, 0.0, 1.0) == 0.0);
}

TEST_CASE("residue-sum susceptibility") {
    CHECK(susceptibility_residue(1.0, 0.0, 1.0) == 0.0);
    CHECK(std::abs(susceptibility_residue(1.0, 1e-4, 1.0)) < 1e-4);
    // against the numerical inverse transform of i tanh(beta w/2) S(w)
    for (double t = 0.5; t <= 5.0; t += 0.25)
        CHECK(std::abs(susceptibility_residue(t, 0.1, 1.0) - im_corr_from_fdt(t, 0.1, 1.0)) < 1e-4);
    // truncated series converges toward the full one
    double full = susceptibility_residue(0.3, 0.4, 1.0);
    CHECK(std::abs(susceptibility_residue(0.3, 0.4, 1.0, 1) - full) > std::abs(susceptibility_residue(0.3, 0.4, 1.0, 5) - full));
    CHECK_THROWS_AS(susceptibility_residue(0.0, 0.1, 1.0), DomainError);
    // beta / (2 pi tau) = 1 is a pole collision
    CHECK_THROWS_AS(susceptibility_residue(1.0, 2 * pi, 1.0), DomainError);
    CHECK_THROWS_AS(susceptibility_residue(1.0, 2 * pi * (1 + 1e-8), 1.0), DomainError);
}

TEST_CASE("incomplete beta and the closed-form susceptibility") {
    // B_z(a, 1) = z^a / a and B_z(1, b) = (1 - (1-z)^b) / b
    CHECK(incomplete_beta(0.3, 2.5, 1.0) == doctest::Approx(std::pow(0.3, 2.5) / 2.5).epsilon(1e-12));
    CHECK(incomplete_beta(0.6, 1.0, 3.0) == doctest::Approx((1 - std::pow(0.4, 3.0)) / 3.0).epsilon(1e-12));
    // b = 0: B_z(a, 0) = sum_k z^{a+k}/(a+k)
    double z = 0.2, a = 0.7, series = 0.0;
    for (int k = 0; k < 200; ++k) series += std::pow(z, a + k) / (a + k);
    CHECK(incomplete_beta(z, a, 0.0) == doctest::Approx(series).epsilon(1e-12));
    CHECK_THROWS_AS(incomplete_beta(1.0, 1.0, 1.0), DomainError);

    for (double beta : {0.1, 0.5, 2.0})
        for (double t : {0.2, 1.0, 3.0})
            CHECK(std::abs(susceptibility_closed_form(t, beta, 1.0) - susceptibility_residue(t, beta, 1.0)) < 1e-8);
}
