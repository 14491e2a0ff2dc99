#include "evenspec/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace evenspec {

std::string format_double(double v)
{
    if (v == 0.0)
        return "0"; // also for -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void emit(const nlohmann::json& j, int indent, int depth, std::string& out)
{
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent) * (depth + 1), ' ') : "";
    const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent) * depth, ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
    case nlohmann::json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{";
        out += nl;
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) { // std::map keeps keys sorted
            if (!first) {
                out += ",";
                out += nl;
            }
            first = false;
            out += pad + nlohmann::json(it.key()).dump() + (indent > 0 ? ": " : ":");
            emit(it.value(), indent, depth + 1, out);
        }
        out += nl + close_pad + "}";
        return;
    }
    case nlohmann::json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        bool flat = std::none_of(j.begin(), j.end(), [](const auto& e) { return e.is_structured(); });
        out += "[";
        bool first = true;
        for (const auto& e : j) {
            if (!first)
                out += flat ? ", " : ",";
            if (!flat) {
                out += nl;
                out += pad;
            }
            first = false;
            emit(e, indent, depth + 1, out);
        }
        if (!flat)
            out += nl + close_pad;
        out += "]";
        return;
    }
    case nlohmann::json::value_t::number_float: {
        const double v = j.get<double>();
        out += std::isfinite(v) ? format_double(v) : "null";
        return;
    }
    default:
        out += j.dump();
    }
}

} // namespace

std::string dump_json(const nlohmann::json& j, int indent)
{
    std::string out;
    emit(j, indent, 0, out);
    out += "\n";
    return out;
}

void write_matrix_csv(const CMatrix& M, std::ostream& out)
{
    for (int r = 0; r < M.rows(); ++r) {
        for (int c = 0; c < M.cols(); ++c) {
            if (c)
                out << ',';
            out << format_double(M(r, c).real()) << ',' << format_double(M(r, c).imag());
        }
        out << '\n';
    }
}

namespace {

void put_le(std::ostream& out, double v)
{
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double get_le(const unsigned char* b)
{
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

} // namespace

void write_matrix_binary(const CMatrix& M, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    for (int r = 0; r < M.rows(); ++r)
        for (int c = 0; c < M.cols(); ++c) {
            put_le(out, M(r, c).real());
            put_le(out, M(r, c).imag());
        }
}

CMatrix read_matrix_binary(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t count = bytes.size() / 16;
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(count))));
    if (bytes.size() % 16 != 0 || d * d != count)
        throw std::runtime_error(path + " does not hold a square complex matrix");
    CMatrix M(d, d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) {
            const unsigned char* p = bytes.data() + 16 * (r * d + c);
            M(r, c) = cplx(get_le(p), get_le(p + 8));
        }
    return M;
}

void write_spectrum_csv(const MatchedSpectrum& ms, std::ostream& out)
{
    out << "index,re,im,confidence,reliable\n";
    for (const auto& e : ms.all())
        out << e.index << ',' << format_double(e.value.real()) << ',' << format_double(e.value.imag()) << ','
            << format_double(e.confidence) << ',' << (e.reliable ? 1 : 0) << '\n';
}

void write_text_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << content;
}

} // namespace evenspec
