#include "sdtf/linalg.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace sdtf {

SparseMatrix SparseMatrix::from_triplets(std::vector<Triplet> triplets,
                                         std::size_t n_rows, std::size_t n_cols) {
    for (const Triplet& t : triplets) {
        if (t.row >= n_rows || t.col >= n_cols) {
            throw std::out_of_range("triplet index (" + std::to_string(t.row) + "," +
                                    std::to_string(t.col) + ") outside shape " +
                                    std::to_string(n_rows) + "x" + std::to_string(n_cols));
        }
    }
    // Sorting on the value as a tie-breaker fixes the accumulation order of
    // duplicates, which makes the summed result independent of the input
    // permutation bit for bit.
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        if (a.row != b.row) return a.row < b.row;
        if (a.col != b.col) return a.col < b.col;
        return a.value < b.value;
    });

    SparseMatrix m;
    m.n_rows_ = n_rows;
    m.n_cols_ = n_cols;
    m.row_offsets_.assign(n_rows + 1, 0);
    m.col_indices_.reserve(triplets.size());
    m.values_.reserve(triplets.size());

    std::size_t i = 0;
    for (std::size_t row = 0; row < n_rows; ++row) {
        while (i < triplets.size() && triplets[i].row == row) {
            const std::size_t col = triplets[i].col;
            double sum = 0.0;
            while (i < triplets.size() && triplets[i].row == row && triplets[i].col == col) {
                sum += triplets[i].value;
                ++i;
            }
            m.col_indices_.push_back(col);
            m.values_.push_back(sum);
        }
        m.row_offsets_[row + 1] = m.col_indices_.size();
    }
    return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(std::move(t), n, n);
}

Vector SparseMatrix::matvec(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != n_cols_) {
        throw std::invalid_argument("matvec: vector length " + std::to_string(x.size()) +
                                    " does not match " + std::to_string(n_cols_) + " columns");
    }
    Vector y = Vector::Zero(static_cast<Eigen::Index>(n_rows_));
    for (std::size_t row = 0; row < n_rows_; ++row) {
        double acc = 0.0;
        for (std::size_t k = row_offsets_[row]; k < row_offsets_[row + 1]; ++k) {
            acc += values_[k] * x[static_cast<Eigen::Index>(col_indices_[k])];
        }
        y[static_cast<Eigen::Index>(row)] = acc;
    }
    return y;
}

Vector SparseMatrix::matvec_transpose(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != n_rows_) {
        throw std::invalid_argument("matvec_transpose: vector length mismatch");
    }
    Vector y = Vector::Zero(static_cast<Eigen::Index>(n_cols_));
    for (std::size_t row = 0; row < n_rows_; ++row) {
        const double xi = x[static_cast<Eigen::Index>(row)];
        if (xi == 0.0) continue;
        for (std::size_t k = row_offsets_[row]; k < row_offsets_[row + 1]; ++k) {
            y[static_cast<Eigen::Index>(col_indices_[k])] += values_[k] * xi;
        }
    }
    return y;
}

SparseMatrix SparseMatrix::transposed() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t row = 0; row < n_rows_; ++row) {
        for (std::size_t k = row_offsets_[row]; k < row_offsets_[row + 1]; ++k) {
            t.push_back({col_indices_[k], row, values_[k]});
        }
    }
    return from_triplets(std::move(t), n_cols_, n_rows_);
}

SparseMatrix SparseMatrix::scaled(double factor) const {
    SparseMatrix m = *this;
    for (double& v : m.values_) v *= factor;
    return m;
}

SparseMatrix SparseMatrix::add(const SparseMatrix& a, const SparseMatrix& b,
                               double wa, double wb) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("add: shape mismatch");
    }
    std::vector<Triplet> t;
    t.reserve(a.nnz() + b.nnz());
    for (std::size_t row = 0; row < a.n_rows_; ++row) {
        for (std::size_t k = a.row_offsets_[row]; k < a.row_offsets_[row + 1]; ++k) {
            t.push_back({row, a.col_indices_[k], wa * a.values_[k]});
        }
    }
    for (std::size_t row = 0; row < b.n_rows_; ++row) {
        for (std::size_t k = b.row_offsets_[row]; k < b.row_offsets_[row + 1]; ++k) {
            t.push_back({row, b.col_indices_[k], wb * b.values_[k]});
        }
    }
    return from_triplets(std::move(t), a.rows(), a.cols());
}

double SparseMatrix::coeff(std::size_t row, std::size_t col) const {
    if (row >= n_rows_ || col >= n_cols_) throw std::out_of_range("coeff: index outside shape");
    const auto begin = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row]);
    const auto end = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row + 1]);
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

std::string SparseMatrix::to_matrix_market() const {
    std::ostringstream os;
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << n_rows_ << " " << n_cols_ << " " << nnz() << "\n";
    os.precision(17);
    for (std::size_t row = 0; row < n_rows_; ++row) {
        for (std::size_t k = row_offsets_[row]; k < row_offsets_[row + 1]; ++k) {
            os << row + 1 << " " << col_indices_[k] + 1 << " " << values_[k] << "\n";
        }
    }
    return os.str();
}

void SparseMatrix::dump_matrix_market(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << to_matrix_market();
}

struct LuSolver::Impl {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

LuSolver::LuSolver(const SparseMatrix& a) : impl_(std::make_unique<Impl>()), dim_(a.rows()) {
    if (a.rows() != a.cols()) throw std::invalid_argument("LuSolver: matrix not square");
    Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(a.rows()),
                                  static_cast<Eigen::Index>(a.cols()));
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(a.nnz());
    const auto& offsets = a.row_offsets();
    const auto& cols = a.col_indices();
    const auto& vals = a.values();
    for (std::size_t row = 0; row < a.rows(); ++row) {
        for (std::size_t k = offsets[row]; k < offsets[row + 1]; ++k) {
            t.emplace_back(static_cast<int>(row), static_cast<int>(cols[k]), vals[k]);
        }
    }
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    impl_->lu.compute(m);
    if (impl_->lu.info() != Eigen::Success) {
        impl_.reset();
        throw std::runtime_error("LuSolver: matrix is singular to working precision");
    }
}

LuSolver::~LuSolver() = default;
LuSolver::LuSolver(LuSolver&&) noexcept = default;
LuSolver& LuSolver::operator=(LuSolver&&) noexcept = default;

Vector LuSolver::solve(const Vector& b) const {
    if (static_cast<std::size_t>(b.size()) != dim_) {
        throw std::invalid_argument("LuSolver::solve: rhs length mismatch");
    }
    Vector x = impl_->lu.solve(b);
    if (impl_->lu.info() != Eigen::Success || !x.allFinite()) {
        throw std::runtime_error("LuSolver::solve: back substitution failed");
    }
    return x;
}

Vector solve_direct(const SparseMatrix& a, const Vector& b) {
    return LuSolver(a).solve(b);
}

const LuSolver& FactorizationCache::get(double mass_weight, double step, const Builder& build) {
    const auto key = std::make_pair(mass_weight, step);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        it = cache_.emplace(key, LuSolver(build())).first;
    }
    return it->second;
}

}  // namespace sdtf
