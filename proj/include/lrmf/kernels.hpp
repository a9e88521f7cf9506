#pragma once

#include "lrmf/common.hpp"
#include "lrmf/ensemble.hpp"

#include <array>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lrmf {

/// Kernel library. The numeric values are the family indices used in reports and tie-breaking.
enum class KernelFamily : int {
    Linear = 1,
    Exponential = 2,
    SquaredExponential = 3,
    RationalQuadratic = 4,
    Matern32 = 5,
    Matern52 = 6,
    CompactRBF = 7,
};

inline constexpr std::array<KernelFamily, 7> kAllFamilies = {
    KernelFamily::Linear,   KernelFamily::Exponential, KernelFamily::SquaredExponential,
    KernelFamily::RationalQuadratic, KernelFamily::Matern32, KernelFamily::Matern52,
    KernelFamily::CompactRBF,
};

[[nodiscard]] int family_index(KernelFamily family) noexcept;
[[nodiscard]] std::size_t hyperparameter_count(KernelFamily family) noexcept;
[[nodiscard]] bool is_radial(KernelFamily family) noexcept;
[[nodiscard]] std::string_view family_name(KernelFamily family) noexcept;
/// Accepts the names produced by family_name(); throws a config error otherwise.
[[nodiscard]] KernelFamily parse_family(std::string_view name);

/// Switches between alternative readings of two library rows.
struct KernelOptions {
    /// Rational quadratic as ((1 + r^2) / (2 h1^2 h2))^-h2 instead of (1 + r^2 / (2 h1^2 h2))^-h2.
    bool rq_literal = false;
    /// Compact RBF as max(0, 1 - r/h1)^h2 instead of max(0, 1 - (r/h1)^h2 exp(-r^2 / (2 h1^2))).
    bool compact_wendland = false;

    friend bool operator==(const KernelOptions&, const KernelOptions&) = default;
};

struct KernelSpec {
    KernelFamily family = KernelFamily::Linear;
    std::vector<double> h;
    KernelOptions options;

    /// Throws a config error unless h has the family's length and every entry is positive and finite.
    void validate() const;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

struct MixtureComponent {
    KernelSpec spec;
    double weight = 0.0;

    friend bool operator==(const MixtureComponent&, const MixtureComponent&) = default;
};

/// Convex combination of library kernels, at most one per family.
struct MixtureKernel {
    std::vector<MixtureComponent> components;

    void validate() const;

    friend bool operator==(const MixtureKernel&, const MixtureKernel&) = default;
};

using Kernel = std::variant<KernelSpec, MixtureKernel>;

[[nodiscard]] std::string describe(const Kernel& kernel);

struct Gramian {
    Matrix entries;
    Kernel kernel;
    std::string source_id;
};

using ConstVectorRef = Eigen::Ref<const Vector>;

/// Value of the kernel profile at distance r (radial families only).
[[nodiscard]] double radial_profile(const KernelSpec& spec, double r);

[[nodiscard]] double kernel_eval(const KernelSpec& spec, const ConstVectorRef& u, const ConstVectorRef& v);
[[nodiscard]] double kernel_eval(const Kernel& kernel, const ConstVectorRef& u, const ConstVectorRef& v);

/// Pairwise kernel matrix between the columns of `columns`.
[[nodiscard]] Matrix gramian_matrix(const Kernel& kernel, const Matrix& columns);

[[nodiscard]] Gramian build_gramian(const Kernel& kernel, const SnapshotEnsemble& ensemble,
                                    std::string source_id = {});

/// Component l is K(query, columns.col(l)).
[[nodiscard]] Vector cross_kernel_vector(const Kernel& kernel, const Matrix& columns, const ConstVectorRef& query);

}  // namespace lrmf
