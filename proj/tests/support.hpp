#pragma once
// shared helpers for the test binaries: seeded random operators and small fixtures

#include <cmath>
#include <random>

#include "qmtc/opalg.hpp"

namespace testsupport {

using qmtc::opalg::Complex;
using qmtc::opalg::ComplexMatrix;

inline ComplexMatrix pauli(char which) {
    ComplexMatrix m(2, 2);
    switch (which) {
        case 'x': m << 0, 1, 1, 0; break;
        case 'y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        case 'z': m << 1, 0, 0, -1; break;
        default: m = ComplexMatrix::Identity(2, 2);
    }
    return m;
}

inline ComplexMatrix random_matrix(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = Complex(g(rng), g(rng));
    return A;
}

inline ComplexMatrix random_hermitian(int d, std::mt19937_64& rng) {
    ComplexMatrix A = random_matrix(d, rng);
    return 0.5 * (A + A.adjoint());
}

// random full-rank density matrix
inline ComplexMatrix random_density(int d, std::mt19937_64& rng) {
    ComplexMatrix A = random_matrix(d, rng);
    ComplexMatrix rho = A * A.adjoint();
    return rho / rho.trace().real();
}

// hermitian observable with a degenerate eigenvalue when d > 2, so projectors have rank > 1
inline ComplexMatrix random_observable(int d, std::mt19937_64& rng, bool degenerate) {
    ComplexMatrix H = random_hermitian(d, rng);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
    Eigen::VectorXd ev(d);
    std::uniform_int_distribution<int> level(-2, 2);
    for (int i = 0; i < d; ++i) ev(i) = degenerate ? level(rng) : es.eigenvalues()(i);
    return es.eigenvectors() * ev.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

inline double max_abs(const ComplexMatrix& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testsupport
