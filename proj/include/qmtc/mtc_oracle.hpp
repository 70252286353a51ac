#pragma once
// mtc_oracle.hpp - exact multi-time correlations, bi-probabilities and cumulants
// for closed finite-dimensional systems

#include <functional>
#include <map>
#include <vector>

#include "qmtc/opalg.hpp"

namespace qmtc::oracle {

using opalg::Complex;
using opalg::ComplexMatrix;
using opalg::DensityMatrix;
using opalg::HermitianObservable;

enum class Branch { Plus, Minus };

struct MTCQuery {
    std::vector<double> times;
    std::vector<HermitianObservable> observables;
    std::vector<Branch> branches;

    // throws DomainError on unsorted or negative times and length mismatches
    void validate() const;
};

// Dense table over (f+ tuple, f- tuple). Tuples are flattened with the
// earliest time varying fastest; rows index f+, columns index f-.
class BiProbTable {
public:
    BiProbTable() = default;
    BiProbTable(std::vector<double> times, std::vector<std::vector<double>> spectra);

    std::size_t n_times() const { return spectra_.size(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<std::vector<double>>& spectra() const { return spectra_; }
    std::size_t n_tuples() const { return n_tuples_; }

    // flat index <-> per-time eigenvalue indices (index j refers to time j, ascending)
    std::size_t flatten(const std::vector<int>& idx) const;
    std::vector<int> unflatten(std::size_t flat) const;

    Complex& at(std::size_t plus, std::size_t minus) { return entries_(plus, minus); }
    Complex at(std::size_t plus, std::size_t minus) const { return entries_(plus, minus); }
    const ComplexMatrix& entries() const { return entries_; }
    ComplexMatrix& entries() { return entries_; }

    Complex total() const { return entries_.sum(); }
    // max |Q(f+,f-)* - Q(f-,f+)|
    double hermiticity_defect() const;
    // sum of prod_{j in I+} f_j+ prod_{k in I-} f_k- Q over the table
    Complex moment(const std::vector<Branch>& branches) const;
    // sum over the latest (f_n+, f_n-) independently
    BiProbTable marginalize_latest() const;

    BiProbTable operator+(const BiProbTable& o) const;
    BiProbTable operator-(const BiProbTable& o) const;
    double max_abs() const { return entries_.size() ? entries_.cwiseAbs().maxCoeff() : 0.0; }

private:
    std::vector<double> times_;
    std::vector<std::vector<double>> spectra_;
    std::vector<std::size_t> strides_;
    std::size_t n_tuples_ = 1;
    ComplexMatrix entries_;
};

ComplexMatrix heisenberg(const ComplexMatrix& F, const ComplexMatrix& H, double t);

Complex mtc_exact(const MTCQuery& q, const ComplexMatrix& H, const DensityMatrix& rho);

BiProbTable biprob_exact(const std::vector<double>& times, const std::vector<HermitianObservable>& observables,
                         const ComplexMatrix& H, const DensityMatrix& rho);

// Set partitions of the labels {n, ..., 1}; each block lists its labels in
// descending order. n = 0 yields one empty partition.
using Block = std::vector<int>;
using Partition = std::vector<Block>;
std::vector<Partition> ordered_partitions(int n);

// Cumulant of the sequence seq from its moments. moment_fn receives a
// subsequence of seq (relative order preserved) and returns its moment.
template <class T>
T cumulant(const std::function<T(const std::vector<int>&)>& moment_fn, const std::vector<int>& seq);

double autocorrelation(const ComplexMatrix& F, const ComplexMatrix& H, const DensityMatrix& rho, double t2,
                       double t1);
double susceptibility(const ComplexMatrix& F, const ComplexMatrix& H, const DensityMatrix& rho, double t2,
                      double t1);

// ---- template implementation ----

namespace detail {

template <class T>
T cumulant_mask(const std::function<T(const std::vector<int>&)>& moment_fn, const std::vector<int>& seq,
                unsigned mask, std::map<unsigned, T>& memo) {
    if (auto it = memo.find(mask); it != memo.end()) return it->second;
    std::vector<int> positions;
    for (int i = 0; i < static_cast<int>(seq.size()); ++i)
        if (mask & (1u << i)) positions.push_back(i);
    std::vector<int> sub;
    for (int p : positions) sub.push_back(seq[p]);
    T value = moment_fn(sub);
    // subtract every partition into two or more blocks
    int m = static_cast<int>(positions.size());
    for (const auto& part : ordered_partitions(m)) {
        if (part.size() < 2) continue;
        T prod = T(1);
        for (const auto& block : part) {
            unsigned bm = 0;
            // labels m..1 map to positions in ascending order: label l -> positions[m - l]
            for (int label : block) bm |= 1u << positions[m - label];
            prod = prod * cumulant_mask(moment_fn, seq, bm, memo);
        }
        value = value - prod;
    }
    memo.emplace(mask, value);
    return value;
}

}  // namespace detail

template <class T>
T cumulant(const std::function<T(const std::vector<int>&)>& moment_fn, const std::vector<int>& seq) {
    if (seq.size() > 20) throw DomainError("cumulant: sequence too long");
    if (seq.empty()) return T(0);
    std::map<unsigned, T> memo;
    unsigned full = (1u << seq.size()) - 1u;
    return detail::cumulant_mask(moment_fn, seq, full, memo);
}

}  // namespace qmtc::oracle
