#pragma once

#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "inphys/errors.hpp"

namespace inphys {

// Dense row-major matrix of doubles. Rows and columns may be zero
// (a graph with no relations produces legitimate 0-column matrices).
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c);

    static Matrix zeros(int r, int c) { return Matrix(r, c); }
    static Matrix identity(int n);
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rws);

    double& operator()(int r, int c) {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return data[static_cast<std::size_t>(r) * cols + c];
    }
    double operator()(int r, int c) const {
        assert(r >= 0 && r < rows && c >= 0 && c < cols);
        return data[static_cast<std::size_t>(r) * cols + c];
    }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
    std::size_t size() const { return data.size(); }
};

std::string shape_str(const Matrix& m);

// Core kernels.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_abt(const Matrix& a, const Matrix& b); // a * b^T
Matrix matmul_atb(const Matrix& a, const Matrix& b); // a^T * b
Matrix transpose(const Matrix& a);

// Stacking. Parts are passed by pointer so callers can mix lvalues
// without copying into a temporary vector.
Matrix vconcat(std::span<const Matrix* const> parts);
Matrix hconcat(std::span<const Matrix* const> parts);
inline Matrix vconcat(std::initializer_list<const Matrix*> parts) {
    return vconcat(std::span<const Matrix* const>(parts.begin(), parts.size()));
}
inline Matrix hconcat(std::initializer_list<const Matrix*> parts) {
    return hconcat(std::span<const Matrix* const>(parts.begin(), parts.size()));
}

// Per-row sum over columns; returns rows x 1.
Matrix col_sum(const Matrix& a);

// Elementwise arithmetic.
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix mul_elem(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
void add_in_place(Matrix& dst, const Matrix& src);
void add_scaled_in_place(Matrix& dst, const Matrix& src, double s);
// Adds the column vector `col` (rows x 1) to every column of m.
void add_col_in_place(Matrix& m, const Matrix& col);

double sum_squares(const Matrix& a);

// Contiguous row slice [begin, end).
Matrix take_rows(const Matrix& a, int begin, int end);
// Columns of `a` selected by `idx`, in order (duplicates allowed).
Matrix gather_cols(const Matrix& a, std::span<const int> idx);
// dst[:, idx[k]] += src[:, k] for each k, in ascending k order.
void scatter_add_cols(Matrix& dst, const Matrix& src, std::span<const int> idx);

bool all_finite(const Matrix& m);

namespace detail {
void check_finite_impl(const Matrix& m, const char* where);
}

// Debug-build invariant: public operations only ever hand back finite
// matrices. Violations throw numeric_error (overflow is a legitimate
// runtime state during diverging training). Compiled out under NDEBUG,
// where callers detect divergence from the loss instead.
#ifndef NDEBUG
#define INPHYS_CHECK_FINITE(m) ::inphys::detail::check_finite_impl((m), __func__)
#else
#define INPHYS_CHECK_FINITE(m) ((void)0)
#endif

// Sparse representation of a matrix whose columns are one-hot: column k
// has a single 1 in row index[k]. Used for the receiver/sender incidence
// of an interaction graph.
struct OneHotColumns {
    int n_rows = 0;
    std::vector<int> index;

    int n_cols() const { return static_cast<int>(index.size()); }
    void validate() const;
    Matrix to_matrix() const;
    static OneHotColumns from_matrix(const Matrix& m);
};

} // namespace inphys
