// opalg.cpp - operator algebra on Eigen dense matrices
#include "qmtc/opalg.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <string>

namespace qmtc::opalg {

namespace {

Eigen::SelfAdjointEigenSolver<ComplexMatrix> hermitian_eig(const ComplexMatrix& A) {
    // symmetrize away rounding noise before the solver sees it
    ComplexMatrix S = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(S);
    if (es.info() != Eigen::Success) throw NumericError("hermitian eigensolver failed");
    return es;
}

}  // namespace

void require_square(const ComplexMatrix& A, const char* what) {
    if (A.rows() == 0 || A.rows() != A.cols())
        throw DomainError(std::string(what) + ": expected a nonempty square matrix, got " +
                          std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
    if (!A.allFinite()) throw DomainError(std::string(what) + ": non-finite entries");
}

bool is_hermitian(const ComplexMatrix& A, double tol) {
    if (A.rows() != A.cols()) return false;
    return (A - A.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

void require_hermitian(const ComplexMatrix& A, const char* what, double tol) {
    require_square(A, what);
    if (!is_hermitian(A, tol)) throw DomainError(std::string(what) + ": matrix is not hermitian");
}

ComplexMatrix kron(const ComplexMatrix& A, const ComplexMatrix& B) {
    ComplexMatrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

ComplexMatrix commutator(const ComplexMatrix& A, const ComplexMatrix& B) { return A * B - B * A; }

double spectral_radius_hermitian(const ComplexMatrix& A) {
    auto ev = hermitian_eig(A).eigenvalues();
    return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
}

int HermitianObservable::index_of(double f, double tol) const {
    for (std::size_t k = 0; k < eigenvalues_.size(); ++k)
        if (std::abs(eigenvalues_[k] - f) <= tol * std::max(1.0, std::abs(f))) return static_cast<int>(k);
    return -1;
}

HermitianObservable spectral_decompose(const ComplexMatrix& A, double eig_tol) {
    require_square(A, "spectral_decompose");
    auto es = hermitian_eig(A);
    const auto& ev = es.eigenvalues();
    double radius = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    double tol = eig_tol >= 0 ? eig_tol : 1e-9 * radius;
    if (!is_hermitian(A, std::max(kHermTol * std::max(1.0, radius), tol)))
        throw DomainError("spectral_decompose: matrix is not hermitian");

    HermitianObservable obs;
    obs.matrix_ = A;
    const auto& V = es.eigenvectors();
    Eigen::Index n = ev.size();
    Eigen::Index start = 0;
    // eigenvalues come sorted; chain-merge neighbours closer than tol
    for (Eigen::Index i = 1; i <= n; ++i) {
        if (i < n && ev(i) - ev(i - 1) <= tol) continue;
        Eigen::Index len = i - start;
        auto block = V.middleCols(start, len);
        obs.eigenvalues_.push_back(ev.segment(start, len).mean());
        obs.projectors_.push_back(block * block.adjoint());
        start = i;
    }
    return obs;
}

DensityMatrix::DensityMatrix(ComplexMatrix rho, double tol) : rho_(std::move(rho)) {
    require_hermitian(rho_, "density matrix", tol);
    if (std::abs(rho_.trace() - Complex(1.0)) > tol)
        throw DomainError("density matrix: trace differs from 1");
    if (hermitian_eig(rho_).eigenvalues().minCoeff() < -tol)
        throw DomainError("density matrix: not positive semidefinite");
}

ComplexMatrix unitary_at(const ComplexMatrix& H, double t) {
    require_hermitian(H, "unitary_at");
    auto es = hermitian_eig(H);
    ComplexVector phases = (es.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

DensityMatrix thermal_state(const ComplexMatrix& H, double beta) {
    require_hermitian(H, "thermal_state");
    if (!std::isfinite(beta) || beta < 0) throw DomainError("thermal_state: beta must be finite and >= 0");
    auto es = hermitian_eig(H);
    const auto& ev = es.eigenvalues();
    Eigen::VectorXd p = (-beta * (ev.array() - ev.minCoeff())).exp();
    p /= p.sum();
    ComplexMatrix rho = es.eigenvectors() * p.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    return DensityMatrix(rho);
}

SuperOperator::SuperOperator(int dim, ComplexMatrix matrix) : dim_(dim), m_(std::move(matrix)) {
    if (dim <= 0 || m_.rows() != dim * dim || m_.cols() != dim * dim)
        throw DomainError("SuperOperator: matrix must be d^2 x d^2");
}

SuperOperator SuperOperator::identity(int dim) {
    return SuperOperator(dim, ComplexMatrix::Identity(dim * dim, dim * dim));
}

SuperOperator SuperOperator::zero(int dim) {
    return SuperOperator(dim, ComplexMatrix::Zero(dim * dim, dim * dim));
}

ComplexMatrix SuperOperator::apply(const ComplexMatrix& X) const {
    if (X.rows() != dim_ || X.cols() != dim_) throw DomainError("SuperOperator::apply: dimension mismatch");
    return unvec(m_ * vec(X), dim_);
}

SuperOperator SuperOperator::operator*(const SuperOperator& o) const {
    if (o.dim_ != dim_) throw DomainError("SuperOperator composition: dimension mismatch");
    return SuperOperator(dim_, m_ * o.m_);
}

SuperOperator SuperOperator::operator+(const SuperOperator& o) const {
    if (o.dim_ != dim_) throw DomainError("SuperOperator sum: dimension mismatch");
    return SuperOperator(dim_, m_ + o.m_);
}

SuperOperator SuperOperator::operator-(const SuperOperator& o) const {
    if (o.dim_ != dim_) throw DomainError("SuperOperator difference: dimension mismatch");
    return SuperOperator(dim_, m_ - o.m_);
}

SuperOperator& SuperOperator::operator+=(const SuperOperator& o) {
    if (o.dim_ != dim_) throw DomainError("SuperOperator sum: dimension mismatch");
    m_ += o.m_;
    return *this;
}

SuperOperator operator*(Complex c, const SuperOperator& s) { return SuperOperator(s.dim_, c * s.m_); }

ComplexVector vec(const ComplexMatrix& X) {
    return Eigen::Map<const ComplexVector>(X.data(), X.size());
}

ComplexMatrix unvec(const ComplexVector& v, int dim) {
    return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

SuperOperator superop_from_pair(const ComplexMatrix& L, const ComplexMatrix& R) {
    require_square(L, "superop_from_pair");
    require_square(R, "superop_from_pair");
    if (L.rows() != R.rows()) throw DomainError("superop_from_pair: dimension mismatch");
    return SuperOperator(static_cast<int>(L.rows()), kron(R.transpose(), L));
}

SuperOperator commutator_superop(const ComplexMatrix& V) {
    ComplexMatrix I = ComplexMatrix::Identity(V.rows(), V.cols());
    return superop_from_pair(V, I) - superop_from_pair(I, V);
}

SuperOperator anticommutator_superop(const ComplexMatrix& V) {
    ComplexMatrix I = ComplexMatrix::Identity(V.rows(), V.cols());
    return superop_from_pair(V, I) + superop_from_pair(I, V);
}

SuperOperator superop_exp(const SuperOperator& S, double t) {
    if (!S.matrix().allFinite()) throw DomainError("superop_exp: non-finite generator");
    if (t == 0.0) return SuperOperator::identity(S.dim());
    ComplexMatrix tS = t * S.matrix();
    return SuperOperator(S.dim(), tS.exp());
}

ChannelDiagnostics channel_diagnostics(const SuperOperator& S) {
    int d = S.dim();
    ComplexMatrix choi = ComplexMatrix::Zero(d * d, d * d);
    ChannelDiagnostics diag;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            ComplexMatrix Eij = ComplexMatrix::Zero(d, d);
            Eij(i, j) = 1.0;
            ComplexMatrix out = S.apply(Eij);
            choi.block(i * d, j * d, d, d) = out;
            double expect = i == j ? 1.0 : 0.0;
            diag.trace_defect = std::max(diag.trace_defect, std::abs(out.trace() - expect));
        }
    diag.min_choi_eigenvalue = hermitian_eig(choi).eigenvalues().minCoeff();
    // a non-hermitian Choi matrix cannot be PSD; fold the defect in
    diag.min_choi_eigenvalue -= (choi - choi.adjoint()).cwiseAbs().maxCoeff();
    return diag;
}

bool is_cptp(const SuperOperator& S, double tol) {
    auto d = channel_diagnostics(S);
    return d.min_choi_eigenvalue >= -tol && d.trace_defect <= tol;
}

ComplexMatrix partial_trace_second(const ComplexMatrix& X, int d1, int d2) {
    if (X.rows() != d1 * d2 || X.cols() != d1 * d2) throw DomainError("partial_trace_second: dimension mismatch");
    ComplexMatrix out = ComplexMatrix::Zero(d1, d1);
    for (int a = 0; a < d1; ++a)
        for (int b = 0; b < d1; ++b)
            for (int k = 0; k < d2; ++k) out(a, b) += X(a * d2 + k, b * d2 + k);
    return out;
}

}  // namespace qmtc::opalg
