#include "inphys/normalizer.hpp"

#include <algorithm>
#include <cmath>

#include "inphys/errors.hpp"
#include "inphys/serialize.hpp"

namespace inphys {

double sorted_percentile(const std::vector<double>& values, double p) {
    if (values.empty()) throw data_error("percentile: no values");
    if (p < 0.0 || p > 100.0) throw config_error("percentile: p outside [0, 100]");
    double idx = p / 100.0 * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(idx);
    double frac = idx - static_cast<double>(lo);
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

double percentile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    return sorted_percentile(values, p);
}

RowNormalizer RowNormalizer::fit(const Matrix& samples) {
    if (samples.cols == 0) throw data_error("RowNormalizer::fit: empty sample set");
    RowNormalizer n;
    n.median = Matrix(samples.rows, 1);
    n.half_range = Matrix(samples.rows, 1);
    std::vector<double> row(static_cast<std::size_t>(samples.cols));
    for (int i = 0; i < samples.rows; ++i) {
        for (int j = 0; j < samples.cols; ++j)
            row[static_cast<std::size_t>(j)] = samples(i, j);
        double p5 = percentile(row, 5.0);
        double p95 = percentile(row, 95.0);
        if (!(p95 >= p5)) throw numeric_error("RowNormalizer::fit: non-finite percentiles");
        n.median(i, 0) = percentile(row, 50.0);
        n.half_range(i, 0) = (p95 - p5) / 2.0;
    }
    return n;
}

Matrix RowNormalizer::apply(const Matrix& m) const {
    if (m.rows != rows()) throw shape_error("RowNormalizer::apply: row mismatch");
    Matrix out(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i) {
        double hr = half_range(i, 0);
        double med = median(i, 0);
        for (int j = 0; j < m.cols; ++j)
            out(i, j) = hr == 0.0 ? 0.0 : (m(i, j) - med) / hr;
    }
    return out;
}

Matrix RowNormalizer::invert(const Matrix& m) const {
    if (m.rows != rows()) throw shape_error("RowNormalizer::invert: row mismatch");
    Matrix out(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i) {
        double hr = half_range(i, 0);
        double med = median(i, 0);
        for (int j = 0; j < m.cols; ++j) out(i, j) = m(i, j) * hr + med;
    }
    return out;
}

void write_row_normalizer(std::ostream& out, const RowNormalizer& n) {
    write_matrix(out, n.median);
    write_matrix(out, n.half_range);
}

RowNormalizer read_row_normalizer(std::istream& in) {
    RowNormalizer n;
    n.median = read_matrix(in);
    n.half_range = read_matrix(in);
    if (!n.median.same_shape(n.half_range) || n.median.cols != 1)
        throw io_error("read_row_normalizer: malformed statistics");
    return n;
}

void write_normalizer(std::ostream& out, const Normalizer& n) {
    write_row_normalizer(out, n.o);
    write_row_normalizer(out, n.x);
    write_row_normalizer(out, n.r_a);
    write_row_normalizer(out, n.target);
}

Normalizer read_normalizer(std::istream& in) {
    Normalizer n;
    n.o = read_row_normalizer(in);
    n.x = read_row_normalizer(in);
    n.r_a = read_row_normalizer(in);
    n.target = read_row_normalizer(in);
    return n;
}

} // namespace inphys
