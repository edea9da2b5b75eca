#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace itgan {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
    InvalidArgument = 1,
    Io = 2,
    Parse = 3,
    State = 4,
    Internal = 5,
};

// Every failure inside the library surfaces as an Error; the C API maps the
// code onto its status enum and keeps the message for itgan_last_error().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) fail(ErrorCode::InvalidArgument, msg);
}

// Seeded generator used everywhere randomness is needed.  The engine is
// std::mt19937_64; helpers wrap the std distributions we rely on.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<int>(mean)(engine_);
    }
    bool bernoulli(double p) { return uniform() < p; }
    std::uint64_t next() { return engine_(); }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// Deterministic child seed for a (seed, stream) pair (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Class labels of the multiclass task.  Binary per-scenario runs reuse the
// integer space with 0 = rest, 1 = scenario.
enum class Label : int { NonMalicious = 0, S1 = 1, S2 = 2, S3 = 3 };

inline constexpr int kNumClasses = 4;

std::string_view label_name(int label);
int parse_label(std::string_view name);

// Prints "warning: <msg>" on stderr unless warnings are silenced.
void warn(const std::string& msg);
void set_warnings_enabled(bool enabled);

}  // namespace itgan
