#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace bilrip {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

using Rng = std::mt19937_64;

/// Raised when operands live in different ambient dimensions.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an argument violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for numerical failures that are not caller errors (e.g. every
/// Monte Carlo sample was degenerate).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// path; `parallel` distributes the same per-index work over OpenMP threads
/// and must produce bit-identical results.
enum class Exec { serial, parallel };

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and up to two
/// counters, so trial `a` (sub-stream `b`) is reproducible regardless of the
/// order in which trials execute.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                           std::uint64_t b = 0) noexcept {
    return splitmix64(splitmix64(splitmix64(master) ^ a) + 0x632be59bd9b4e019ULL * (b + 1));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline constexpr double kAnalyticTol = 1e-9;
inline constexpr double kExactTol = 1e-12;

}  // namespace bilrip
