#include "lrmf/hyperopt.hpp"

#include "lrmf/numerics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>

namespace lrmf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_bounds(const std::vector<Bounds>& bounds) {
    for (const auto& b : bounds) {
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.hi > b.lo)) {
            config_error("search bounds must be finite with hi > lo");
        }
    }
}

double clamp_to(const Bounds& b, double x) { return std::min(std::max(x, b.lo), b.hi); }

double safe_call(const ObjectiveFn& f, std::span<const double> x) {
    const double value = f(x);
    return std::isnan(value) ? kInf : value;
}

}  // namespace

void ObjectiveConfig::validate() const {
    if (!std::isfinite(lambda) || lambda < 0.0) config_error("lambda must be finite and non-negative");
    if (bounds.size() != hyperparameter_count(family)) config_error("one search box per hyperparameter is required");
    for (const auto& b : bounds) {
        if (!(b.lo > 0.0) || !(b.hi > b.lo) || !std::isfinite(b.hi)) {
            config_error("hyperparameter boxes need 0 < lo < hi < inf");
        }
    }
    if (reference_gramian.rows() != reference_gramian.cols()) config_error("reference Gramian must be square");
}

void PsoConfig::validate() const {
    if (swarm_size < 2) config_error("swarm size must be at least 2");
    if (!(k1 > 0.0) || !(k2 > 0.0)) config_error("PSO coefficients k1 and k2 must be positive");
    if (!(v_max_fraction > 0.0 && v_max_fraction <= 1.0)) config_error("v_max_fraction must lie in (0, 1]");
    if (max_iters < 1) config_error("PSO max_iters must be at least 1");
    if (stall_iters < 1) config_error("PSO stall_iters must be at least 1");
    if (threads < 1) config_error("PSO thread count must be at least 1");
}

double gramian_objective(const Matrix& reference, const Matrix& candidate, double lambda) {
    if (!candidate.allFinite()) return kInf;
    const double distance = (reference - candidate).norm();
    if (lambda == 0.0) return distance;
    double srank = 0.0;
    try {
        srank = stable_rank(candidate);
    } catch (const Error&) {
        return kInf;
    }
    const double value = distance + lambda / std::sqrt(srank);
    return std::isfinite(value) ? value : kInf;
}

double objective(const ObjectiveConfig& cfg, std::span<const double> h, const SnapshotEnsemble& lf) {
    KernelSpec spec{cfg.family, std::vector<double>(h.begin(), h.end()), cfg.options};
    spec.validate();
    if (cfg.reference_gramian.rows() != lf.samples()) config_error("reference Gramian does not match the ensemble");
    Matrix g;
    try {
        g = gramian_matrix(spec, lf.outputs);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Numerical) return kInf;
        throw;
    }
    return gramian_objective(cfg.reference_gramian, g, cfg.lambda);
}

double median_pairwise_distance(const Matrix& columns) {
    std::vector<double> d;
    for (Index j = 0; j < columns.cols(); ++j) {
        for (Index l = 0; l < j; ++l) d.push_back((columns.col(j) - columns.col(l)).norm());
    }
    if (d.empty()) return 0.0;
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>((d.size() - 1) / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid;
}

std::vector<Bounds> default_bounds(KernelFamily family, const SnapshotEnsemble& lf) {
    double d = median_pairwise_distance(lf.outputs);
    if (!(d > 0.0)) d = 1.0;
    std::vector<Bounds> out;
    const std::size_t count = hyperparameter_count(family);
    for (std::size_t i = 0; i < count; ++i) {
        const bool exponent = i == 1;
        out.push_back(exponent ? Bounds{1e-2, 1e2} : Bounds{1e-3 * d, 1e3 * d});
    }
    return out;
}

ObjectiveConfig make_objective_config(KernelFamily family, const SnapshotEnsemble& lf, double lambda,
                                      KernelOptions options) {
    ObjectiveConfig cfg;
    cfg.lambda = lambda;
    cfg.family = family;
    cfg.options = options;
    cfg.reference_gramian = gramian_matrix(KernelSpec{KernelFamily::Linear, {}, {}}, lf.outputs);
    cfg.bounds = default_bounds(family, lf);
    return cfg;
}

PsoResult pso_minimize(const ObjectiveFn& f, const PsoConfig& cfg, const std::vector<Bounds>& bounds) {
    cfg.validate();
    check_bounds(bounds);
    if (bounds.empty()) config_error("PSO needs at least one design variable");

    const auto swarm = static_cast<std::size_t>(cfg.swarm_size);
    const std::size_t dim = bounds.size();
    const CounterRng rng(cfg.seed);
    enum Stream : std::uint64_t { kPosition = 1, kVelocity = 2, kRho = 3, kGamma = 4 };

    std::vector<double> vmax(dim);
    for (std::size_t d = 0; d < dim; ++d) vmax[d] = cfg.v_max_fraction * (bounds[d].hi - bounds[d].lo);

    std::vector<std::vector<double>> pos(swarm, std::vector<double>(dim));
    std::vector<std::vector<double>> vel(swarm, std::vector<double>(dim));
    for (std::size_t i = 0; i < swarm; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
            const auto& b = bounds[d];
            pos[i][d] = b.lo + (b.hi - b.lo) * rng.uniform(kPosition, i, d);
            vel[i][d] = vmax[d] * (2.0 * rng.uniform(kVelocity, i, d) - 1.0);
        }
    }

    std::vector<std::vector<double>> personal_best = pos;
    std::vector<double> personal_value(swarm, kInf);
    std::vector<double> group_best = pos[0];
    double group_value = kInf;

    PsoResult result;
    std::vector<double> fitness(swarm);
    int stall = 0;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        if (cfg.threads > 1) {
            std::vector<std::future<void>> jobs;
            const std::size_t chunk = (swarm + static_cast<std::size_t>(cfg.threads) - 1) /
                                      static_cast<std::size_t>(cfg.threads);
            for (std::size_t start = 0; start < swarm; start += chunk) {
                jobs.push_back(std::async(std::launch::async, [&, start] {
                    for (std::size_t i = start; i < std::min(swarm, start + chunk); ++i) fitness[i] = safe_call(f, pos[i]);
                }));
            }
            for (auto& j : jobs) j.get();
        } else {
            for (std::size_t i = 0; i < swarm; ++i) fitness[i] = safe_call(f, pos[i]);
        }
        result.evaluations += cfg.swarm_size;

        bool improved = false;
        for (std::size_t i = 0; i < swarm; ++i) {
            if (fitness[i] < personal_value[i]) {
                personal_value[i] = fitness[i];
                personal_best[i] = pos[i];
            }
            if (fitness[i] < group_value) {
                group_value = fitness[i];
                group_best = pos[i];
                improved = true;
            }
        }
        result.trace.push_back(group_value);
        stall = improved ? 0 : stall + 1;
        if (stall >= cfg.stall_iters) break;

        for (std::size_t i = 0; i < swarm; ++i) {
            const double rho = rng.uniform(kRho, i, static_cast<std::uint64_t>(iter));
            const double gamma = rng.uniform(kGamma, i, static_cast<std::uint64_t>(iter));
            for (std::size_t d = 0; d < dim; ++d) {
                double v = vel[i][d] + cfg.k1 * rho * (personal_best[i][d] - pos[i][d]) +
                           cfg.k2 * gamma * (group_best[d] - pos[i][d]);
                v = std::clamp(v, -vmax[d], vmax[d]);
                vel[i][d] = v;
                pos[i][d] = clamp_to(bounds[d], pos[i][d] + v);
            }
        }
    }

    result.best = group_best;
    result.value = group_value;
    return result;
}

LocalResult refine_local(const ObjectiveFn& f, std::vector<double> h0, const std::vector<Bounds>& bounds,
                         const RefineOptions& options) {
    check_bounds(bounds);
    if (h0.size() != bounds.size()) config_error("starting point and bounds differ in dimension");
    const std::size_t dim = h0.size();
    for (std::size_t d = 0; d < dim; ++d) h0[d] = clamp_to(bounds[d], h0[d]);

    LocalResult out;
    auto eval = [&](const std::vector<double>& x) {
        ++out.evaluations;
        return safe_call(f, x);
    };

    std::vector<double> x = h0;
    double fx = eval(x);

    auto gradient = [&](const std::vector<double>& at) {
        Vector g(static_cast<Index>(dim));
        std::vector<double> probe = at;
        for (std::size_t d = 0; d < dim; ++d) {
            const double step = 1e-6 * std::max(1.0, std::abs(at[d]));
            const double up = std::min(at[d] + step, bounds[d].hi);
            const double down = std::max(at[d] - step, bounds[d].lo);
            probe[d] = up;
            const double f_up = eval(probe);
            probe[d] = down;
            const double f_down = eval(probe);
            probe[d] = at[d];
            double gd = 0.0;
            if (std::isfinite(f_up) && std::isfinite(f_down)) {
                gd = (f_up - f_down) / (up - down);
            } else if (std::isfinite(f_up) && std::isfinite(fx) && up > at[d]) {
                gd = (f_up - fx) / (up - at[d]);
            } else if (std::isfinite(f_down) && std::isfinite(fx) && at[d] > down) {
                gd = (fx - f_down) / (at[d] - down);
            }
            g[static_cast<Index>(d)] = gd;
        }
        return g;
    };

    auto projected = [&](const std::vector<double>& at, const Vector& g) {
        Vector pg = g;
        for (std::size_t d = 0; d < dim; ++d) {
            const auto i = static_cast<Index>(d);
            if (at[d] <= bounds[d].lo && pg[i] > 0.0) pg[i] = 0.0;
            if (at[d] >= bounds[d].hi && pg[i] < 0.0) pg[i] = 0.0;
        }
        return pg;
    };

    Matrix inv_hessian = Matrix::Identity(static_cast<Index>(dim), static_cast<Index>(dim));
    Vector g = gradient(x);

    for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
        const Vector pg = projected(x, g);
        if (pg.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) break;

        Vector dir = -(inv_hessian * pg);
        for (std::size_t d = 0; d < dim; ++d) {
            const auto i = static_cast<Index>(d);
            if (pg[i] == 0.0) dir[i] = 0.0;
        }
        if (dir.dot(pg) >= 0.0 || !dir.allFinite()) {
            inv_hessian.setIdentity();
            dir = -pg;
        }

        double t = 1.0;
        bool accepted = false;
        bool tiny = false;
        std::vector<double> trial(dim);
        double f_trial = kInf;
        while (true) {
            double moved = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                trial[d] = clamp_to(bounds[d], x[d] + t * dir[static_cast<Index>(d)]);
                moved = std::max(moved, std::abs(trial[d] - x[d]));
            }
            if (moved <= options.step_tolerance) {
                tiny = true;
                break;
            }
            f_trial = eval(trial);
            double decrease = 0.0;
            for (std::size_t d = 0; d < dim; ++d) decrease += pg[static_cast<Index>(d)] * (trial[d] - x[d]);
            if (std::isfinite(f_trial) && (f_trial <= fx + 1e-4 * decrease || !std::isfinite(fx))) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (tiny || !accepted) break;

        Vector s(static_cast<Index>(dim));
        for (std::size_t d = 0; d < dim; ++d) s[static_cast<Index>(d)] = trial[d] - x[d];
        x = trial;
        fx = f_trial;
        const Vector g_next = gradient(x);
        const Vector y = g_next - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const Matrix ident = Matrix::Identity(s.size(), s.size());
            const double rho = 1.0 / sy;
            inv_hessian = (ident - rho * s * y.transpose()) * inv_hessian * (ident - rho * y * s.transpose()) +
                          rho * s * s.transpose();
        }
        g = g_next;
    }

    out.x = x;
    out.value = fx;
    return out;
}

OptimizedKernel optimize_hyperparams(KernelFamily family, const SnapshotEnsemble& lf, const ObjectiveConfig& cfg,
                                     const PsoConfig& pso) {
    if (cfg.family != family) config_error("objective configuration was built for a different family");
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    OptimizedKernel out;
    out.spec = KernelSpec{family, {}, cfg.options};

    if (hyperparameter_count(family) == 0) {
        out.objective_value = objective(cfg, {}, lf);
        return out;
    }

    std::vector<Bounds> log_bounds;
    for (const auto& b : cfg.bounds) log_bounds.push_back(Bounds{std::log(b.lo), std::log(b.hi)});

    auto to_h = [&cfg](std::span<const double> x) {
        std::vector<double> h(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            h[i] = std::clamp(std::exp(x[i]), cfg.bounds[i].lo, cfg.bounds[i].hi);
        }
        return h;
    };
    const ObjectiveFn in_log_space = [&](std::span<const double> x) { return objective(cfg, to_h(x), lf); };

    const PsoResult swarm = pso_minimize(in_log_space, pso, log_bounds);
    const LocalResult local = refine_local(in_log_space, swarm.best, log_bounds);

    out.spec.h = to_h(local.x);
    out.objective_value = objective(cfg, out.spec.h, lf);
    out.evaluations = swarm.evaluations + local.evaluations;
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

}  // namespace lrmf
