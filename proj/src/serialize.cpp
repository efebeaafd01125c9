#include "inphys/serialize.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

namespace inphys {

namespace {

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) throw io_error("serialize: write failed");
}

void get_bytes(std::istream& in, void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n))
        throw io_error("serialize: unexpected end of stream");
}

} // namespace

void write_u8(std::ostream& out, std::uint8_t v) { put_bytes(out, &v, 1); }

void write_u32(std::ostream& out, std::uint32_t v) {
    std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                         static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
    put_bytes(out, b, 4);
}

void write_i32(std::ostream& out, std::int32_t v) {
    write_u32(out, static_cast<std::uint32_t>(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
    write_u32(out, static_cast<std::uint32_t>(v));
    write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void write_f64(std::ostream& out, double v) {
    write_u64(out, std::bit_cast<std::uint64_t>(v));
}

void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    if (!s.empty()) put_bytes(out, s.data(), s.size());
}

void write_matrix(std::ostream& out, const Matrix& m) {
    write_i32(out, m.rows);
    write_i32(out, m.cols);
    for (double v : m.data) write_f64(out, v);
}

void write_f64_vector(std::ostream& out, const std::vector<double>& v) {
    write_u32(out, static_cast<std::uint32_t>(v.size()));
    for (double d : v) write_f64(out, d);
}

void write_i32_vector(std::ostream& out, const std::vector<int>& v) {
    write_u32(out, static_cast<std::uint32_t>(v.size()));
    for (int d : v) write_i32(out, d);
}

std::uint8_t read_u8(std::istream& in) {
    std::uint8_t v;
    get_bytes(in, &v, 1);
    return v;
}

std::uint32_t read_u32(std::istream& in) {
    std::uint8_t b[4];
    get_bytes(in, b, 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::int32_t read_i32(std::istream& in) {
    return static_cast<std::int32_t>(read_u32(in));
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t lo = read_u32(in);
    std::uint64_t hi = read_u32(in);
    return lo | (hi << 32);
}

double read_f64(std::istream& in) {
    return std::bit_cast<double>(read_u64(in));
}

std::string read_string(std::istream& in) {
    std::uint32_t n = read_u32(in);
    if (n > (1u << 24)) throw io_error("serialize: unreasonable string length");
    std::string s(n, '\0');
    if (n) get_bytes(in, s.data(), n);
    return s;
}

Matrix read_matrix(std::istream& in) {
    int rows = read_i32(in);
    int cols = read_i32(in);
    if (rows < 0 || cols < 0 || static_cast<long long>(rows) * cols > (1ll << 31))
        throw io_error("serialize: bad matrix header");
    Matrix m(rows, cols);
    for (double& v : m.data) v = read_f64(in);
    return m;
}

std::vector<double> read_f64_vector(std::istream& in) {
    std::uint32_t n = read_u32(in);
    if (n > (1u << 28)) throw io_error("serialize: unreasonable vector length");
    std::vector<double> v(n);
    for (double& d : v) d = read_f64(in);
    return v;
}

std::vector<int> read_i32_vector(std::istream& in) {
    std::uint32_t n = read_u32(in);
    if (n > (1u << 28)) throw io_error("serialize: unreasonable vector length");
    std::vector<int> v(n);
    for (int& d : v) d = read_i32(in);
    return v;
}

void write_magic(std::ostream& out, const char* magic, std::uint32_t version) {
    put_bytes(out, magic, 4);
    write_u32(out, version);
}

std::uint32_t read_magic(std::istream& in, const char* magic, std::uint32_t max_version) {
    char got[4];
    get_bytes(in, got, 4);
    if (std::memcmp(got, magic, 4) != 0)
        throw io_error(std::string("serialize: bad magic, expected ") + magic);
    std::uint32_t version = read_u32(in);
    if (version == 0 || version > max_version)
        throw io_error(std::string("serialize: unsupported ") + magic + " version");
    return version;
}

} // namespace inphys
