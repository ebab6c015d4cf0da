#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace debinn {

// Row-major dense matrix, just enough for weight/gradient bookkeeping.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::size_t size() const { return data.size(); }
};

// splitmix64; used to derive independent child seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 0x51ed270b0a1fULL));
}

/// Runs fn(0..n-1) across up to `threads` workers (0 = hardware concurrency).
/// Iterations must be independent; results land in caller-owned slots, so the
/// outcome does not depend on scheduling.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

// Shortest decimal form that round-trips a double (17 significant digits).
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(trim(s), &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": not a number: '" + s + "'");
    }
    if (pos != trim(s).size())
        throw std::invalid_argument(what + ": trailing characters in number: '" + s + "'");
    return v;
}

inline long long parse_int(const std::string& s, const std::string& what) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(trim(s), &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": not an integer: '" + s + "'");
    }
    if (pos != trim(s).size())
        throw std::invalid_argument(what + ": trailing characters in integer: '" + s + "'");
    return v;
}

}  // namespace debinn
