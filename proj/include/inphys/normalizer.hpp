#pragma once

#include <iosfwd>

#include "inphys/matrix.hpp"

namespace inphys {

// Per-row affine normalization: center at the median, rescale so the
// 5th percentile maps to -1 and the 95th to +1. Rows whose percentiles
// coincide are degenerate and map to exactly 0.
struct RowNormalizer {
    Matrix median;      // rows x 1
    Matrix half_range;  // rows x 1; (p95 - p5) / 2, zero for degenerate rows

    int rows() const { return median.rows; }

    // `samples` holds one observation per column.
    static RowNormalizer fit(const Matrix& samples);

    Matrix apply(const Matrix& m) const;
    Matrix invert(const Matrix& m) const;
};

// Linear-interpolation percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);
// Same, but `values` must already be sorted ascending (no copy).
double sorted_percentile(const std::vector<double>& values, double p);

// Normalization state for one dataset: object state rows, external
// effect rows, relation attribute rows, and target rows. Incidence
// indices are never normalized.
struct Normalizer {
    RowNormalizer o;
    RowNormalizer x;
    RowNormalizer r_a;
    RowNormalizer target;
};

void write_row_normalizer(std::ostream& out, const RowNormalizer& n);
RowNormalizer read_row_normalizer(std::istream& in);
void write_normalizer(std::ostream& out, const Normalizer& n);
Normalizer read_normalizer(std::istream& in);

} // namespace inphys
