#include "inphys/matrix.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace inphys {

Matrix::Matrix(int r, int c) : rows(r), cols(c) {
    if (r < 0 || c < 0)
        throw shape_error("matrix dimensions must be non-negative, got " +
                          std::to_string(r) + "x" + std::to_string(c));
    data.assign(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0);
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rws) {
    int r = static_cast<int>(rws.size());
    int c = r > 0 ? static_cast<int>(rws.begin()->size()) : 0;
    Matrix m(r, c);
    int i = 0;
    for (const auto& row : rws) {
        if (static_cast<int>(row.size()) != c)
            throw shape_error("from_rows: ragged row lengths");
        int j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

namespace detail {
void check_finite_impl(const Matrix& m, const char* where) {
    if (!all_finite(m))
        throw numeric_error("non-finite matrix (" + shape_str(m) + ") produced by " +
                            where);
}
} // namespace detail

bool all_finite(const Matrix& m) {
    for (double v : m.data)
        if (!std::isfinite(v)) return false;
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw shape_error("matmul: inner dimensions differ, " + shape_str(a) +
                          " * " + shape_str(b));
    Matrix c(a.rows, b.cols);
    // i-k-j order: the inner loop runs over contiguous rows of b and c,
    // which is what keeps single-core training throughput acceptable.
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + static_cast<std::size_t>(i) * a.cols;
        double* crow = c.data.data() + static_cast<std::size_t>(i) * c.cols;
        for (int k = 0; k < a.cols; ++k) {
            double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.data.data() + static_cast<std::size_t>(k) * b.cols;
            for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    INPHYS_CHECK_FINITE(c);
    return c;
}

Matrix matmul_abt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols)
        throw shape_error("matmul_abt: column counts differ, " + shape_str(a) +
                          " * " + shape_str(b) + "^T");
    Matrix c(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + static_cast<std::size_t>(i) * a.cols;
        double* crow = c.data.data() + static_cast<std::size_t>(i) * c.cols;
        for (int j = 0; j < b.rows; ++j) {
            const double* brow = b.data.data() + static_cast<std::size_t>(j) * b.cols;
            double acc = 0.0;
            for (int k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
            crow[j] = acc;
        }
    }
    INPHYS_CHECK_FINITE(c);
    return c;
}

Matrix matmul_atb(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows)
        throw shape_error("matmul_atb: row counts differ, " + shape_str(a) +
                          "^T * " + shape_str(b));
    Matrix c(a.cols, b.cols);
    for (int k = 0; k < a.rows; ++k) {
        const double* arow = a.data.data() + static_cast<std::size_t>(k) * a.cols;
        const double* brow = b.data.data() + static_cast<std::size_t>(k) * b.cols;
        for (int i = 0; i < a.cols; ++i) {
            double aki = arow[i];
            if (aki == 0.0) continue;
            double* crow = c.data.data() + static_cast<std::size_t>(i) * c.cols;
            for (int j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
        }
    }
    INPHYS_CHECK_FINITE(c);
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

Matrix vconcat(std::span<const Matrix* const> parts) {
    if (parts.empty()) throw shape_error("vconcat: no parts");
    int cols = parts[0]->cols;
    int rows = 0;
    for (const Matrix* p : parts) {
        if (p->cols != cols)
            throw shape_error("vconcat: column count mismatch, expected " +
                              std::to_string(cols) + ", got " + shape_str(*p));
        rows += p->rows;
    }
    Matrix out(rows, cols);
    int at = 0;
    for (const Matrix* p : parts) {
        for (int i = 0; i < p->rows; ++i)
            for (int j = 0; j < cols; ++j) out(at + i, j) = (*p)(i, j);
        at += p->rows;
    }
    return out;
}

Matrix hconcat(std::span<const Matrix* const> parts) {
    if (parts.empty()) throw shape_error("hconcat: no parts");
    int rows = parts[0]->rows;
    int cols = 0;
    for (const Matrix* p : parts) {
        if (p->rows != rows)
            throw shape_error("hconcat: row count mismatch, expected " +
                              std::to_string(rows) + ", got " + shape_str(*p));
        cols += p->cols;
    }
    Matrix out(rows, cols);
    int at = 0;
    for (const Matrix* p : parts) {
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < p->cols; ++j) out(i, at + j) = (*p)(i, j);
        at += p->cols;
    }
    return out;
}

Matrix col_sum(const Matrix& a) {
    Matrix s(a.rows, 1);
    for (int i = 0; i < a.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < a.cols; ++j) acc += a(i, j);
        s(i, 0) = acc;
    }
    INPHYS_CHECK_FINITE(s);
    return s;
}

static void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b))
        throw shape_error(std::string(op) + ": shape mismatch, " + shape_str(a) +
                          " vs " + shape_str(b));
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] -= b.data[i];
    return c;
}

Matrix mul_elem(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "mul_elem");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] *= b.data[i];
    return c;
}

Matrix scale(const Matrix& a, double s) {
    Matrix c = a;
    for (double& v : c.data) v *= s;
    INPHYS_CHECK_FINITE(c);
    return c;
}

void add_in_place(Matrix& dst, const Matrix& src) {
    require_same_shape(dst, src, "add_in_place");
    for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

void add_scaled_in_place(Matrix& dst, const Matrix& src, double s) {
    require_same_shape(dst, src, "add_scaled_in_place");
    for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += s * src.data[i];
}

void add_col_in_place(Matrix& m, const Matrix& col) {
    if (col.rows != m.rows || col.cols != 1)
        throw shape_error("add_col_in_place: need " + std::to_string(m.rows) +
                          "x1 column, got " + shape_str(col));
    for (int i = 0; i < m.rows; ++i) {
        double v = col(i, 0);
        double* row = m.data.data() + static_cast<std::size_t>(i) * m.cols;
        for (int j = 0; j < m.cols; ++j) row[j] += v;
    }
}

double sum_squares(const Matrix& a) {
    double acc = 0.0;
    for (double v : a.data) acc += v * v;
    return acc;
}

Matrix take_rows(const Matrix& a, int begin, int end) {
    if (begin < 0 || end < begin || end > a.rows)
        throw shape_error("take_rows: range [" + std::to_string(begin) + ", " +
                          std::to_string(end) + ") out of bounds for " + shape_str(a));
    Matrix out(end - begin, a.cols);
    for (int i = begin; i < end; ++i)
        for (int j = 0; j < a.cols; ++j) out(i - begin, j) = a(i, j);
    return out;
}

Matrix gather_cols(const Matrix& a, std::span<const int> idx) {
    Matrix out(a.rows, static_cast<int>(idx.size()));
    for (int k = 0; k < out.cols; ++k) {
        int c = idx[static_cast<std::size_t>(k)];
        if (c < 0 || c >= a.cols)
            throw shape_error("gather_cols: index " + std::to_string(c) +
                              " out of range for " + shape_str(a));
        for (int i = 0; i < a.rows; ++i) out(i, k) = a(i, c);
    }
    return out;
}

void scatter_add_cols(Matrix& dst, const Matrix& src, std::span<const int> idx) {
    if (src.rows != dst.rows)
        throw shape_error("scatter_add_cols: row mismatch, " + shape_str(dst) +
                          " vs " + shape_str(src));
    if (static_cast<int>(idx.size()) != src.cols)
        throw shape_error("scatter_add_cols: need one index per source column");
    for (int k = 0; k < src.cols; ++k) {
        int c = idx[static_cast<std::size_t>(k)];
        if (c < 0 || c >= dst.cols)
            throw shape_error("scatter_add_cols: index " + std::to_string(c) +
                              " out of range for " + shape_str(dst));
        for (int i = 0; i < src.rows; ++i) dst(i, c) += src(i, k);
    }
}

void OneHotColumns::validate() const {
    if (n_rows < 0) throw shape_error("one-hot: negative row count");
    for (int i : index)
        if (i < 0 || i >= n_rows)
            throw shape_error("one-hot: index " + std::to_string(i) +
                              " outside [0, " + std::to_string(n_rows) + ")");
}

Matrix OneHotColumns::to_matrix() const {
    validate();
    Matrix m(n_rows, n_cols());
    for (int k = 0; k < n_cols(); ++k) m(index[static_cast<std::size_t>(k)], k) = 1.0;
    return m;
}

OneHotColumns OneHotColumns::from_matrix(const Matrix& m) {
    OneHotColumns oh;
    oh.n_rows = m.rows;
    oh.index.resize(static_cast<std::size_t>(m.cols), -1);
    for (int j = 0; j < m.cols; ++j) {
        int hot = -1;
        for (int i = 0; i < m.rows; ++i) {
            double v = m(i, j);
            if (v == 0.0) continue;
            if (v != 1.0 || hot != -1)
                throw shape_error("one-hot: column " + std::to_string(j) +
                                  " is not a unit basis vector");
            hot = i;
        }
        if (hot == -1)
            throw shape_error("one-hot: column " + std::to_string(j) + " is all zero");
        oh.index[static_cast<std::size_t>(j)] = hot;
    }
    return oh;
}

} // namespace inphys
