#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cylq {

using cplx = std::complex<double>;

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};
struct OverflowError : Error {
    explicit OverflowError(const std::string& msg) : Error(msg) {}
};
struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};
struct WindowError : Error {
    explicit WindowError(const std::string& msg) : Error(msg) {}
};
struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};
struct FeasibilityError : Error {
    explicit FeasibilityError(const std::string& msg) : Error(msg) {}
};

// Shortest-width decimal with 17 significant digits, the CSV float format.
std::string format_float(double x);

// Writes to a temp file in the same directory, then renames over `path`.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Minimal CSV builder: header row is mandatory, floats use format_float.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(const std::vector<std::string>& cells);
    std::string cell(double x) const { return format_float(x); }
    std::string cell(long long x) const { return std::to_string(x); }
    std::string to_string() const;
    void write(const std::string& path) const;
    size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Thread cap: CYLQ_THREADS if set (>=1), else hardware concurrency.
int thread_budget();

// Chunked parallel map over [0, n); deterministic regardless of thread count
// as long as `fn(i)` only writes slot i of preallocated storage.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}
inline long long uniform_int(Rng& rng, long long lo, long long hi) {
    return std::uniform_int_distribution<long long>(lo, hi)(rng);
}

}  // namespace cylq
