// mtc_oracle.cpp - definition-level MTCs and bi-probability tables
#include "qmtc/mtc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qmtc::oracle {

void MTCQuery::validate() const {
    if (times.empty()) throw DomainError("MTCQuery: no times");
    if (observables.size() != times.size() || branches.size() != times.size())
        throw DomainError("MTCQuery: times, observables and branches must have equal length");
    if (times.front() < 0) throw DomainError("MTCQuery: times must be >= 0");
    for (std::size_t j = 1; j < times.size(); ++j)
        if (times[j] < times[j - 1]) throw DomainError("MTCQuery: times must be nondecreasing");
    for (const auto& F : observables)
        if (F.dim() != observables.front().dim()) throw DomainError("MTCQuery: observable dimension mismatch");
}

BiProbTable::BiProbTable(std::vector<double> times, std::vector<std::vector<double>> spectra)
    : times_(std::move(times)), spectra_(std::move(spectra)) {
    if (times_.size() != spectra_.size()) throw DomainError("BiProbTable: times and spectra length mismatch");
    for (const auto& s : spectra_) {
        if (s.empty()) throw DomainError("BiProbTable: empty spectrum");
        strides_.push_back(n_tuples_);
        n_tuples_ *= s.size();
    }
    entries_ = ComplexMatrix::Zero(static_cast<Eigen::Index>(n_tuples_), static_cast<Eigen::Index>(n_tuples_));
}

std::size_t BiProbTable::flatten(const std::vector<int>& idx) const {
    if (idx.size() != spectra_.size()) throw DomainError("BiProbTable::flatten: wrong tuple length");
    std::size_t flat = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] < 0 || static_cast<std::size_t>(idx[j]) >= spectra_[j].size())
            throw DomainError("BiProbTable::flatten: index out of range");
        flat += strides_[j] * static_cast<std::size_t>(idx[j]);
    }
    return flat;
}

std::vector<int> BiProbTable::unflatten(std::size_t flat) const {
    std::vector<int> idx(spectra_.size());
    for (std::size_t j = 0; j < spectra_.size(); ++j) {
        idx[j] = static_cast<int>(flat % spectra_[j].size());
        flat /= spectra_[j].size();
    }
    return idx;
}

double BiProbTable::hermiticity_defect() const {
    if (entries_.size() == 0) return 0.0;
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

Complex BiProbTable::moment(const std::vector<Branch>& branches) const {
    if (branches.size() != spectra_.size()) throw DomainError("BiProbTable::moment: branch count mismatch");
    // weight of a tuple on one side: product of eigenvalues at the times carried by that side
    auto weights = [&](Branch side) {
        Eigen::VectorXd w(static_cast<Eigen::Index>(n_tuples_));
        for (std::size_t k = 0; k < n_tuples_; ++k) {
            auto idx = unflatten(k);
            double p = 1.0;
            for (std::size_t j = 0; j < idx.size(); ++j)
                if (branches[j] == side) p *= spectra_[j][idx[j]];
            w(static_cast<Eigen::Index>(k)) = p;
        }
        return w;
    };
    Eigen::VectorXd wp = weights(Branch::Plus), wm = weights(Branch::Minus);
    return (wp.cast<Complex>().transpose() * entries_ * wm.cast<Complex>())(0, 0);
}

BiProbTable BiProbTable::marginalize_latest() const {
    if (spectra_.size() < 2) throw DomainError("BiProbTable::marginalize_latest: needs at least two times");
    std::vector<double> t(times_.begin(), times_.end() - 1);
    std::vector<std::vector<double>> s(spectra_.begin(), spectra_.end() - 1);
    BiProbTable out(t, s);
    std::size_t m = out.n_tuples_;
    std::size_t last = spectra_.back().size();
    // the latest index has the largest stride, so blocks of size m are contiguous
    for (std::size_t a = 0; a < last; ++a)
        for (std::size_t b = 0; b < last; ++b)
            out.entries_ += entries_.block(static_cast<Eigen::Index>(a * m), static_cast<Eigen::Index>(b * m),
                                           static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    return out;
}

BiProbTable BiProbTable::operator+(const BiProbTable& o) const {
    if (o.spectra_ != spectra_) throw DomainError("BiProbTable sum: table layouts differ");
    BiProbTable r = *this;
    r.entries_ += o.entries_;
    return r;
}

BiProbTable BiProbTable::operator-(const BiProbTable& o) const {
    if (o.spectra_ != spectra_) throw DomainError("BiProbTable difference: table layouts differ");
    BiProbTable r = *this;
    r.entries_ -= o.entries_;
    return r;
}

ComplexMatrix heisenberg(const ComplexMatrix& F, const ComplexMatrix& H, double t) {
    opalg::require_square(F, "heisenberg");
    if (F.rows() != H.rows()) throw DomainError("heisenberg: dimension mismatch");
    if (t == 0.0) return F;
    ComplexMatrix U = opalg::unitary_at(H, t);
    return U.adjoint() * F * U;
}

namespace {

void check_dims(const ComplexMatrix& H, const DensityMatrix& rho, int obs_dim) {
    opalg::require_hermitian(H, "hamiltonian");
    if (H.rows() != rho.dim() || H.rows() != obs_dim) throw DomainError("dimension mismatch between H, rho and F");
}

}  // namespace

Complex mtc_exact(const MTCQuery& q, const ComplexMatrix& H, const DensityMatrix& rho) {
    q.validate();
    check_dims(H, rho, q.observables.front().dim());
    int d = rho.dim();
    ComplexMatrix A = ComplexMatrix::Identity(d, d), B = ComplexMatrix::Identity(d, d);
    // accumulate with later times to the left
    for (std::size_t j = 0; j < q.times.size(); ++j) {
        ComplexMatrix Fj = heisenberg(q.observables[j].matrix(), H, q.times[j]);
        if (q.branches[j] == Branch::Plus)
            A = Fj * A;
        else
            B = Fj * B;
    }
    return (A * rho.matrix() * B.adjoint()).trace();
}

BiProbTable biprob_exact(const std::vector<double>& times, const std::vector<HermitianObservable>& observables,
                         const ComplexMatrix& H, const DensityMatrix& rho) {
    MTCQuery q{times, observables, std::vector<Branch>(times.size(), Branch::Plus)};
    q.validate();
    check_dims(H, rho, observables.front().dim());
    std::vector<std::vector<double>> spectra;
    std::vector<std::vector<ComplexMatrix>> proj_t;
    for (std::size_t j = 0; j < times.size(); ++j) {
        spectra.push_back(observables[j].eigenvalues());
        std::vector<ComplexMatrix> ps;
        for (const auto& P : observables[j].projectors()) ps.push_back(heisenberg(P, H, times[j]));
        proj_t.push_back(std::move(ps));
    }
    BiProbTable table(times, spectra);
    int d = rho.dim();
    // branch operators P_n(f_n) ... P_1(f_1) for every tuple
    std::vector<ComplexMatrix> branch_ops(table.n_tuples());
    for (std::size_t k = 0; k < table.n_tuples(); ++k) {
        auto idx = table.unflatten(k);
        ComplexMatrix L = ComplexMatrix::Identity(d, d);
        for (std::size_t j = 0; j < idx.size(); ++j) L = proj_t[j][idx[j]] * L;
        branch_ops[k] = std::move(L);
    }
    for (std::size_t p = 0; p < table.n_tuples(); ++p) {
        ComplexMatrix Lr = branch_ops[p] * rho.matrix();
        for (std::size_t m = 0; m < table.n_tuples(); ++m)
            // tr[A rho B^dagger] = sum_ab (A rho)_ab conj(B_ab)
            table.at(p, m) = (Lr.array() * branch_ops[m].array().conjugate()).sum();
    }
    return table;
}

std::vector<Partition> ordered_partitions(int n) {
    if (n < 0) throw DomainError("ordered_partitions: n must be >= 0");
    std::vector<Partition> parts{Partition{}};
    // insert labels n, n-1, ..., 1; appending keeps every block descending
    for (int label = n; label >= 1; --label) {
        std::vector<Partition> next;
        for (const auto& p : parts) {
            for (std::size_t b = 0; b < p.size(); ++b) {
                Partition q = p;
                q[b].push_back(label);
                next.push_back(std::move(q));
            }
            Partition q = p;
            q.push_back(Block{label});
            next.push_back(std::move(q));
        }
        parts = std::move(next);
    }
    return parts;
}

double autocorrelation(const ComplexMatrix& F, const ComplexMatrix& H, const DensityMatrix& rho, double t2,
                       double t1) {
    opalg::require_hermitian(F, "autocorrelation observable");
    check_dims(H, rho, static_cast<int>(F.rows()));
    if (t1 < 0 || t2 < 0) throw DomainError("autocorrelation: times must be >= 0");
    ComplexMatrix F2 = heisenberg(F, H, t2), F1 = heisenberg(F, H, t1);
    const auto& r = rho.matrix();
    double sym = 0.5 * ((F2 * F1 + F1 * F2) * r).trace().real();
    return sym - (F2 * r).trace().real() * (F1 * r).trace().real();
}

double susceptibility(const ComplexMatrix& F, const ComplexMatrix& H, const DensityMatrix& rho, double t2,
                      double t1) {
    opalg::require_hermitian(F, "susceptibility observable");
    check_dims(H, rho, static_cast<int>(F.rows()));
    if (t1 < 0 || t2 < 0) throw DomainError("susceptibility: times must be >= 0");
    if (!(t2 > t1)) return 0.0;
    ComplexMatrix F2 = heisenberg(F, H, t2), F1 = heisenberg(F, H, t1);
    return (F2 * F1 * rho.matrix()).trace().imag();
}

}  // namespace qmtc::oracle
