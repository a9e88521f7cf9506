#include "lrmf/kernels.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace lrmf {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kSqrt5 = 2.23606797749979;

double squared_distance(const ConstVectorRef& u, const ConstVectorRef& v) {
    double acc = 0.0;
    for (Index k = 0; k < u.size(); ++k) {
        const double d = u[k] - v[k];
        acc += d * d;
    }
    return acc;
}

double dot(const ConstVectorRef& u, const ConstVectorRef& v) {
    double acc = 0.0;
    for (Index k = 0; k < u.size(); ++k) acc += u[k] * v[k];
    return acc;
}

// Shared by kernel_eval and the Gramian builders so that Gramian entries and
// cross-kernel vectors agree bit for bit.
double eval_unchecked(const KernelSpec& spec, const ConstVectorRef& u, const ConstVectorRef& v) {
    if (spec.family == KernelFamily::Linear) return dot(u, v);
    return radial_profile(spec, std::sqrt(squared_distance(u, v)));
}

void check_inputs(const ConstVectorRef& u, const ConstVectorRef& v) {
    if (u.size() != v.size()) {
        data_error("kernel arguments have different lengths (" + std::to_string(u.size()) + " vs " +
                   std::to_string(v.size()) + ")");
    }
    if (!u.allFinite() || !v.allFinite()) data_error("kernel arguments contain non-finite values");
}

}  // namespace

int family_index(KernelFamily family) noexcept { return static_cast<int>(family); }

std::size_t hyperparameter_count(KernelFamily family) noexcept {
    switch (family) {
        case KernelFamily::Linear: return 0;
        case KernelFamily::RationalQuadratic:
        case KernelFamily::CompactRBF: return 2;
        default: return 1;
    }
}

bool is_radial(KernelFamily family) noexcept { return family != KernelFamily::Linear; }

std::string_view family_name(KernelFamily family) noexcept {
    switch (family) {
        case KernelFamily::Linear: return "linear";
        case KernelFamily::Exponential: return "exponential";
        case KernelFamily::SquaredExponential: return "squared-exponential";
        case KernelFamily::RationalQuadratic: return "rational-quadratic";
        case KernelFamily::Matern32: return "matern32";
        case KernelFamily::Matern52: return "matern52";
        case KernelFamily::CompactRBF: return "compact-rbf";
    }
    return "unknown";
}

KernelFamily parse_family(std::string_view name) {
    for (auto family : kAllFamilies) {
        if (family_name(family) == name) return family;
    }
    config_error("unknown kernel family '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
    if (h.size() != hyperparameter_count(family)) {
        config_error(std::string(family_name(family)) + " kernel expects " +
                     std::to_string(hyperparameter_count(family)) + " hyperparameters, got " +
                     std::to_string(h.size()));
    }
    for (double value : h) {
        if (!std::isfinite(value) || !(value > 0.0)) {
            config_error(std::string(family_name(family)) + " kernel hyperparameters must be positive and finite");
        }
    }
}

void MixtureKernel::validate() const {
    if (components.empty()) config_error("mixture kernel has no components");
    std::set<KernelFamily> seen;
    double total = 0.0;
    for (const auto& c : components) {
        c.spec.validate();
        if (!seen.insert(c.spec.family).second) config_error("mixture kernel repeats a family");
        if (!(c.weight >= 0.0 && c.weight <= 1.0)) config_error("mixture weight outside [0, 1]");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-10) config_error("mixture weights do not sum to one");
}

std::string describe(const Kernel& kernel) {
    std::ostringstream out;
    out.precision(6);
    auto put_spec = [&out](const KernelSpec& spec) {
        out << family_name(spec.family);
        if (!spec.h.empty()) {
            out << '(';
            for (std::size_t i = 0; i < spec.h.size(); ++i) out << (i ? ";" : "") << spec.h[i];
            out << ')';
        }
    };
    if (const auto* spec = std::get_if<KernelSpec>(&kernel)) {
        put_spec(*spec);
    } else {
        const auto& mix = std::get<MixtureKernel>(kernel);
        for (std::size_t i = 0; i < mix.components.size(); ++i) {
            if (i) out << " + ";
            out << mix.components[i].weight << '*';
            put_spec(mix.components[i].spec);
        }
    }
    return out.str();
}

double radial_profile(const KernelSpec& spec, double r) {
    const auto& h = spec.h;
    if (r == 0.0) {
        // Analytic r = 0 limits; only the literal rational quadratic differs from 1.
        if (spec.family == KernelFamily::RationalQuadratic && spec.options.rq_literal) {
            return std::pow(2.0 * h[0] * h[0] * h[1], h[1]);
        }
        return 1.0;
    }
    switch (spec.family) {
        case KernelFamily::Exponential: return std::exp(-r / h[0]);
        case KernelFamily::SquaredExponential: return std::exp(-r * r / (2.0 * h[0]));
        case KernelFamily::RationalQuadratic: {
            const double scale = 2.0 * h[0] * h[0] * h[1];
            if (spec.options.rq_literal) return std::pow((1.0 + r * r) / scale, -h[1]);
            return std::pow(1.0 + r * r / scale, -h[1]);
        }
        case KernelFamily::Matern32: {
            const double a = kSqrt3 * r / h[0];
            return (1.0 + a) * std::exp(-a);
        }
        case KernelFamily::Matern52: {
            const double a = kSqrt5 * r / h[0];
            return (1.0 + a + 5.0 * r * r / (3.0 * h[0] * h[0])) * std::exp(-a);
        }
        case KernelFamily::CompactRBF: {
            const double s = r / h[0];
            if (spec.options.compact_wendland) return std::pow(std::max(0.0, 1.0 - s), h[1]);
            const double decay = std::exp(-r * r / (2.0 * h[0] * h[0]));
            const double power = std::pow(s, h[1]);
            // inf * 0 can only arise when the product has already vanished.
            const double product = decay == 0.0 ? 0.0 : power * decay;
            return std::max(0.0, 1.0 - product);
        }
        case KernelFamily::Linear: break;
    }
    numerical_error("radial_profile called for the linear kernel");
}

double kernel_eval(const KernelSpec& spec, const ConstVectorRef& u, const ConstVectorRef& v) {
    spec.validate();
    check_inputs(u, v);
    const double value = eval_unchecked(spec, u, v);
    if (!std::isfinite(value)) numerical_error("kernel evaluation overflowed");
    return value;
}

double kernel_eval(const Kernel& kernel, const ConstVectorRef& u, const ConstVectorRef& v) {
    if (const auto* spec = std::get_if<KernelSpec>(&kernel)) return kernel_eval(*spec, u, v);
    const auto& mix = std::get<MixtureKernel>(kernel);
    mix.validate();
    check_inputs(u, v);
    double acc = 0.0;
    for (const auto& c : mix.components) acc += c.weight * eval_unchecked(c.spec, u, v);
    if (!std::isfinite(acc)) numerical_error("kernel evaluation overflowed");
    return acc;
}

namespace {

Matrix spec_gramian(const KernelSpec& spec, const Matrix& columns) {
    const Index n = columns.cols();
    Matrix g(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index l = 0; l <= j; ++l) {
            const double value = eval_unchecked(spec, columns.col(l), columns.col(j));
            g(l, j) = value;
            g(j, l) = value;
        }
    }
    return g;
}

}  // namespace

Matrix gramian_matrix(const Kernel& kernel, const Matrix& columns) {
    if (!columns.allFinite()) data_error("Gramian input contains non-finite values");
    Matrix g;
    if (const auto* spec = std::get_if<KernelSpec>(&kernel)) {
        spec->validate();
        g = spec_gramian(*spec, columns);
    } else {
        const auto& mix = std::get<MixtureKernel>(kernel);
        mix.validate();
        g = Matrix::Zero(columns.cols(), columns.cols());
        for (const auto& c : mix.components) g += c.weight * spec_gramian(c.spec, columns);
    }
    if (!g.allFinite()) numerical_error("Gramian contains non-finite entries");
    return g;
}

Gramian build_gramian(const Kernel& kernel, const SnapshotEnsemble& ensemble, std::string source_id) {
    if (ensemble.samples() == 0) data_error("cannot build a Gramian from an empty ensemble");
    return Gramian{gramian_matrix(kernel, ensemble.outputs), kernel, std::move(source_id)};
}

Vector cross_kernel_vector(const Kernel& kernel, const Matrix& columns, const ConstVectorRef& query) {
    if (columns.rows() != query.size()) {
        data_error("query has length " + std::to_string(query.size()) + " but columns have length " +
                   std::to_string(columns.rows()));
    }
    Vector out(columns.cols());
    for (Index l = 0; l < columns.cols(); ++l) out[l] = kernel_eval(kernel, query, columns.col(l));
    return out;
}

}  // namespace lrmf
