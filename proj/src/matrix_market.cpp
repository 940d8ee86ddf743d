#include "omegacond/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace omegacond {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string next_data_line(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        if (line[first] == '%') continue;
        return line;
    }
    throw Error(ErrorCode::ParseError, "unexpected end of Matrix Market stream");
}

void format_17g(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

} // namespace

DenseMatrix read_matrix_market(std::istream& in) {
    std::string header;
    if (!std::getline(in, header))
        throw Error(ErrorCode::ParseError, "empty Matrix Market stream");
    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix")
        throw Error(ErrorCode::ParseError, "not a Matrix Market matrix header");
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (field != "real" && field != "integer" && field != "double")
        throw Error(ErrorCode::ParseError, "unsupported Matrix Market field: " + field);
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general")
        throw Error(ErrorCode::ParseError, "unsupported Matrix Market symmetry: " + symmetry);

    if (format == "array") {
        std::istringstream sizes(next_data_line(in));
        int rows = 0, cols = 0;
        if (!(sizes >> rows >> cols) || rows < 1 || cols < 1)
            throw Error(ErrorCode::ParseError, "bad array size line");
        DenseMatrix a(rows, cols);
        // array data is column-major; symmetric files carry the lower triangle
        for (int j = 0; j < cols; ++j) {
            for (int i = symmetric ? j : 0; i < rows; ++i) {
                std::istringstream value(next_data_line(in));
                double v = 0.0;
                if (!(value >> v))
                    throw Error(ErrorCode::ParseError, "bad array entry");
                a(i, j) = v;
                if (symmetric) a(j, i) = v;
            }
        }
        if (!all_finite({a.data(), static_cast<std::size_t>(rows) * cols}))
            throw Error(ErrorCode::ParseError, "matrix contains NaN or Inf");
        return a;
    }
    if (format == "coordinate") {
        std::istringstream sizes(next_data_line(in));
        int rows = 0, cols = 0;
        long nnz = 0;
        if (!(sizes >> rows >> cols >> nnz) || rows < 1 || cols < 1 || nnz < 0)
            throw Error(ErrorCode::ParseError, "bad coordinate size line");
        DenseMatrix a(rows, cols);
        for (long k = 0; k < nnz; ++k) {
            std::istringstream entry(next_data_line(in));
            int i = 0, j = 0;
            double v = 0.0;
            if (!(entry >> i >> j >> v) || i < 1 || j < 1 || i > rows || j > cols)
                throw Error(ErrorCode::ParseError, "bad coordinate entry " + std::to_string(k));
            a(i - 1, j - 1) = v;
            if (symmetric) a(j - 1, i - 1) = v;
        }
        if (!all_finite({a.data(), static_cast<std::size_t>(rows) * cols}))
            throw Error(ErrorCode::ParseError, "matrix contains NaN or Inf");
        return a;
    }
    throw Error(ErrorCode::ParseError, "unsupported Matrix Market format: " + format);
}

DenseMatrix read_matrix_market_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const DenseMatrix& a) {
    std::string buffer;
    buffer.reserve(static_cast<std::size_t>(a.rows()) * a.cols() * 26 + 64);
    buffer += "%%MatrixMarket matrix array real general\n";
    buffer += std::to_string(a.rows());
    buffer += ' ';
    buffer += std::to_string(a.cols());
    buffer += '\n';
    for (int j = 0; j < a.cols(); ++j) {
        for (int i = 0; i < a.rows(); ++i) {
            format_17g(buffer, a(i, j));
            buffer += '\n';
        }
    }
    out << buffer;
}

void write_matrix_market_file(const std::string& path, const DenseMatrix& a) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    write_matrix_market(out, a);
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

void write_matrix_market_coordinate(std::ostream& out, const DenseMatrix& a) {
    long nnz = 0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0) ++nnz;
    std::string buffer;
    buffer += "%%MatrixMarket matrix coordinate real general\n";
    buffer += std::to_string(a.rows());
    buffer += ' ';
    buffer += std::to_string(a.cols());
    buffer += ' ';
    buffer += std::to_string(nnz);
    buffer += '\n';
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) {
            if (a(i, j) == 0.0) continue;
            buffer += std::to_string(i + 1);
            buffer += ' ';
            buffer += std::to_string(j + 1);
            buffer += ' ';
            format_17g(buffer, a(i, j));
            buffer += '\n';
        }
    }
    out << buffer;
}

} // namespace omegacond
