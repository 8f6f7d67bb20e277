#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace sdtf {

using Vector = Eigen::VectorXd;

/// One (row, col, value) contribution prior to assembly.
struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Immutable sparse matrix in compressed sparse row layout.
///
/// Finalization sums duplicate contributions in (row, col, value) order, so
/// the stored values are bit-identical for any permutation of the input
/// triplet list. Column indices are strictly increasing within each row.
class SparseMatrix {
  public:
    SparseMatrix() = default;

    static SparseMatrix from_triplets(std::vector<Triplet> triplets,
                                      std::size_t n_rows, std::size_t n_cols);
    static SparseMatrix identity(std::size_t n);

    std::size_t rows() const { return n_rows_; }
    std::size_t cols() const { return n_cols_; }
    std::size_t nnz() const { return values_.size(); }

    const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
    const std::vector<std::size_t>& col_indices() const { return col_indices_; }
    const std::vector<double>& values() const { return values_; }

    Vector matvec(const Vector& x) const;
    /// y = A^T x without forming the transpose.
    Vector matvec_transpose(const Vector& x) const;
    SparseMatrix transposed() const;
    SparseMatrix scaled(double factor) const;
    static SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b,
                            double wa = 1.0, double wb = 1.0);

    double coeff(std::size_t row, std::size_t col) const;

    /// MatrixMarket coordinate text, 1-based indices.
    std::string to_matrix_market() const;
    void dump_matrix_market(const std::string& path) const;

  private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<std::size_t> col_indices_;
    std::vector<double> values_;
};

/// Sparse LU factorization with partial pivoting. Construction throws
/// std::runtime_error if the matrix is singular to working precision.
class LuSolver {
  public:
    explicit LuSolver(const SparseMatrix& a);
    ~LuSolver();
    LuSolver(LuSolver&&) noexcept;
    LuSolver& operator=(LuSolver&&) noexcept;

    Vector solve(const Vector& b) const;
    std::size_t dim() const { return dim_; }

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t dim_ = 0;
};

/// One-shot direct solve of A x = b.
Vector solve_direct(const SparseMatrix& a, const Vector& b);

/// Keeps LU factorizations of the step matrices alive, keyed by the scalar
/// pair that determines them (mass weight and step size). Variable-step runs
/// refactor whenever the pair changes; constant-step runs hit the cache.
class FactorizationCache {
  public:
    using Builder = std::function<SparseMatrix()>;

    const LuSolver& get(double mass_weight, double step, const Builder& build);
    void clear() { cache_.clear(); }
    std::size_t size() const { return cache_.size(); }

  private:
    std::map<std::pair<double, double>, LuSolver> cache_;
};

}  // namespace sdtf
