#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lrmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Broad failure classes. The CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorKind { Config, Data, Numerical };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }
[[noreturn]] inline void data_error(const std::string& what) { throw Error(ErrorKind::Data, what); }
[[noreturn]] inline void numerical_error(const std::string& what) { throw Error(ErrorKind::Numerical, what); }

/// Counter-based uniform stream: the value depends only on the key tuple, never on call order.
/// Built on the splitmix64 finalizer.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    [[nodiscard]] std::uint64_t bits(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                                     std::uint64_t d = 0) const noexcept {
        std::uint64_t h = mix(seed_ ^ 0x9e3779b97f4a7c15ULL);
        h = mix(h ^ a);
        h = mix(h ^ (b + 0x632be59bd9b4e019ULL));
        h = mix(h ^ (c + 0x85157af5ULL));
        h = mix(h ^ (d + 0x2545f4914f6cdd1dULL));
        return h;
    }

    /// Uniform on [0, 1).
    [[nodiscard]] double uniform(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                                 std::uint64_t d = 0) const noexcept {
        return static_cast<double>(bits(a, b, c, d) >> 11) * 0x1.0p-53;
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

private:
    static std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace lrmf
