#pragma once
// opalg.hpp - dense operator and superoperator algebra
//
// Vectorization is column stacking, so the map X -> L X R is the matrix
// kron(R^T, L) and composing superoperators is plain matrix multiplication.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qmtc/errors.hpp"

namespace qmtc::opalg {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kHermTol = 1e-10;

bool is_hermitian(const ComplexMatrix& A, double tol = kHermTol);
void require_square(const ComplexMatrix& A, const char* what);
void require_hermitian(const ComplexMatrix& A, const char* what, double tol = kHermTol);

ComplexMatrix kron(const ComplexMatrix& A, const ComplexMatrix& B);
ComplexMatrix commutator(const ComplexMatrix& A, const ComplexMatrix& B);
double spectral_radius_hermitian(const ComplexMatrix& A);

// Hermitian operator with its spectral decomposition cached.
class HermitianObservable {
public:
    const ComplexMatrix& matrix() const { return matrix_; }
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    const std::vector<ComplexMatrix>& projectors() const { return projectors_; }
    int dim() const { return static_cast<int>(matrix_.rows()); }
    std::size_t size() const { return eigenvalues_.size(); }
    // index of eigenvalue f, or -1 when f is not in the spectrum
    int index_of(double f, double tol = 1e-9) const;

private:
    friend HermitianObservable spectral_decompose(const ComplexMatrix&, double);
    ComplexMatrix matrix_;
    std::vector<double> eigenvalues_;
    std::vector<ComplexMatrix> projectors_;
};

// eig_tol < 0 selects the default 1e-9 * spectral radius.
HermitianObservable spectral_decompose(const ComplexMatrix& A, double eig_tol = -1.0);

class DensityMatrix {
public:
    DensityMatrix() = default;
    // throws DomainError unless hermitian, PSD and unit trace within tol
    explicit DensityMatrix(ComplexMatrix rho, double tol = kHermTol);
    const ComplexMatrix& matrix() const { return rho_; }
    int dim() const { return static_cast<int>(rho_.rows()); }

private:
    ComplexMatrix rho_;
};

ComplexMatrix unitary_at(const ComplexMatrix& H, double t);
DensityMatrix thermal_state(const ComplexMatrix& H, double beta);

class SuperOperator {
public:
    SuperOperator() = default;
    SuperOperator(int dim, ComplexMatrix matrix);
    static SuperOperator identity(int dim);
    static SuperOperator zero(int dim);

    int dim() const { return dim_; }
    const ComplexMatrix& matrix() const { return m_; }

    ComplexMatrix apply(const ComplexMatrix& X) const;
    SuperOperator operator*(const SuperOperator& o) const;  // composition, right acts first
    SuperOperator operator+(const SuperOperator& o) const;
    SuperOperator operator-(const SuperOperator& o) const;
    SuperOperator& operator+=(const SuperOperator& o);
    friend SuperOperator operator*(Complex c, const SuperOperator& s);

private:
    int dim_ = 0;
    ComplexMatrix m_;
};

ComplexVector vec(const ComplexMatrix& X);
ComplexMatrix unvec(const ComplexVector& v, int dim);

SuperOperator superop_from_pair(const ComplexMatrix& L, const ComplexMatrix& R);
SuperOperator commutator_superop(const ComplexMatrix& V);      // [V, .]
SuperOperator anticommutator_superop(const ComplexMatrix& V);  // {V, .}
SuperOperator superop_exp(const SuperOperator& S, double t);

struct ChannelDiagnostics {
    double min_choi_eigenvalue = 0.0;
    double trace_defect = 0.0;  // max |tr S(|i><j|) - delta_ij|
};
ChannelDiagnostics channel_diagnostics(const SuperOperator& S);
bool is_cptp(const SuperOperator& S, double tol = 1e-9);

// tr_2 of an operator on C^d1 (x) C^d2
ComplexMatrix partial_trace_second(const ComplexMatrix& X, int d1, int d2);

}  // namespace qmtc::opalg
