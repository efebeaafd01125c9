#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "inphys/errors.hpp"
#include "inphys/matrix.hpp"

namespace inphys {

// Little-endian primitives for the binary artifact formats. Every reader
// throws io_error on truncation so callers never see half-parsed state.
void write_u8(std::ostream& out, std::uint8_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_i32(std::ostream& out, std::int32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_string(std::ostream& out, const std::string& s);
void write_matrix(std::ostream& out, const Matrix& m);
void write_f64_vector(std::ostream& out, const std::vector<double>& v);
void write_i32_vector(std::ostream& out, const std::vector<int>& v);

std::uint8_t read_u8(std::istream& in);
std::uint32_t read_u32(std::istream& in);
std::int32_t read_i32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);
Matrix read_matrix(std::istream& in);
std::vector<double> read_f64_vector(std::istream& in);
std::vector<int> read_i32_vector(std::istream& in);

// magic is exactly four characters, e.g. "INDS".
void write_magic(std::ostream& out, const char* magic, std::uint32_t version);
std::uint32_t read_magic(std::istream& in, const char* magic, std::uint32_t max_version);

} // namespace inphys
