#include "lrmf/bench.hpp"

#include <cmath>

namespace lrmf {

namespace {

Index step_count(double horizon, double dt) {
    const double steps = std::round(horizon / dt);
    if (std::abs(steps * dt - horizon) > 1e-9 * horizon) config_error("horizon must be a whole number of time steps");
    return static_cast<Index>(steps);
}

void require_axes(const BenchmarkSpec& spec, std::size_t count) {
    if (spec.grid.size() != count) {
        config_error(spec.name + " benchmark needs " + std::to_string(count) + " parameter axes");
    }
}

}  // namespace

void BenchmarkSpec::validate() const {
    if (name != "oscillator" && name != "nbody") config_error("unknown benchmark '" + name + "'");
    if (grid.empty()) config_error("benchmark parameter grid is empty");
    for (const auto& axis : grid) {
        if (axis.count < 1) config_error("axis '" + axis.name + "' needs at least one point");
        if (!std::isfinite(axis.lo) || !std::isfinite(axis.hi) || axis.hi < axis.lo) {
            config_error("axis '" + axis.name + "' has an invalid range");
        }
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) config_error("horizon must be positive");
    if (!(lf.dt > 0.0) || !(hf.dt > 0.0)) config_error("time steps must be positive");
    if (name == "oscillator") {
        if (trajectory_points < 1) config_error("trajectory_points must be positive");
    } else {
        if (lf.bodies < 2 || hf.bodies < 2) config_error("n-body models need at least two bodies");
        if (!(gravity >= 0.0) || !(radius > 0.0)) config_error("gravity must be non-negative and radius positive");
    }
}

Index BenchmarkSpec::samples() const {
    Index n = 1;
    for (const auto& axis : grid) n *= axis.count;
    return n;
}

BenchmarkSpec default_oscillator_spec() {
    BenchmarkSpec spec;
    spec.name = "oscillator";
    spec.grid = {{"omega", 1.0, 5.0, 19}, {"gamma", 0.05, 0.5, 6}};
    spec.lf = {0.05, 0};
    spec.hf = {0.001, 0};
    spec.horizon = 10.0;
    spec.trajectory_points = 200;
    return spec;
}

BenchmarkSpec default_nbody_spec() {
    BenchmarkSpec spec;
    spec.name = "nbody";
    spec.grid = {{"mass", 50.0, 500.0, 6}, {"gamma", 0.0, 0.9, 5}};
    spec.lf = {0.01, 8};
    spec.hf = {0.01, 64};
    spec.horizon = 5.0;
    spec.gravity = 1e-3;
    spec.radius = 1.0;
    return spec;
}

BenchmarkSpec default_spec(const std::string& name) {
    if (name == "oscillator") return default_oscillator_spec();
    if (name == "nbody") return default_nbody_spec();
    config_error("unknown benchmark '" + name + "'");
}

Matrix grid_points(const std::vector<ParameterAxis>& grid) {
    Index total = 1;
    for (const auto& axis : grid) total *= axis.count;
    Matrix points(total, static_cast<Index>(grid.size()));
    for (Index row = 0; row < total; ++row) {
        Index rest = row;
        for (Index a = static_cast<Index>(grid.size()) - 1; a >= 0; --a) {
            const auto& axis = grid[static_cast<std::size_t>(a)];
            const Index k = rest % axis.count;
            rest /= axis.count;
            points(row, a) = axis.count == 1 ? axis.lo
                                             : axis.lo + (axis.hi - axis.lo) * static_cast<double>(k) / (axis.count - 1);
        }
    }
    return points;
}

double oscillator_energy(double omega, double x, double v) { return 0.5 * (v * v + omega * omega * x * x); }

OscillatorTrace integrate_oscillator(double omega, double gamma, double dt, double horizon, Integrator method) {
    const Index steps = step_count(horizon, dt);
    OscillatorTrace trace;
    trace.t.reserve(static_cast<std::size_t>(steps) + 1);
    trace.x.reserve(static_cast<std::size_t>(steps) + 1);
    trace.v.reserve(static_cast<std::size_t>(steps) + 1);
    double x = 1.0;
    double v = 0.0;
    auto accel = [omega, gamma](double xx, double vv) { return -omega * omega * xx - gamma * vv; };
    trace.t.push_back(0.0);
    trace.x.push_back(x);
    trace.v.push_back(v);
    for (Index k = 1; k <= steps; ++k) {
        if (method == Integrator::ForwardEuler) {
            const double a = accel(x, v);
            x += dt * v;
            v += dt * a;
        } else {
            const double k1x = v, k1v = accel(x, v);
            const double k2x = v + 0.5 * dt * k1v, k2v = accel(x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
            const double k3x = v + 0.5 * dt * k2v, k3v = accel(x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
            const double k4x = v + dt * k3v, k4v = accel(x + dt * k3x, v + dt * k3v);
            x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        trace.t.push_back(static_cast<double>(k) * dt);
        trace.x.push_back(x);
        trace.v.push_back(v);
    }
    return trace;
}

namespace {

struct OscillatorQoi {
    double energy = 0.0;
    double amplitude = 0.0;
};

OscillatorQoi oscillator_qoi(const OscillatorTrace& trace, double omega) {
    double sum = 0.0;
    for (std::size_t k = 0; k < trace.x.size(); ++k) sum += oscillator_energy(omega, trace.x[k], trace.v[k]);
    const double xf = trace.x.back();
    const double vf = trace.v.back() / omega;
    return {sum / static_cast<double>(trace.x.size()), std::sqrt(xf * xf + vf * vf)};
}

}  // namespace

BenchmarkData gen_oscillator(const BenchmarkSpec& spec) {
    spec.validate();
    if (spec.name != "oscillator") config_error("gen_oscillator needs an oscillator spec");
    require_axes(spec, 2);

    const Matrix params = grid_points(spec.grid);
    const Index n = params.rows();
    const Index lf_steps = step_count(spec.horizon, spec.lf.dt);
    const Index hf_steps = step_count(spec.horizon, spec.hf.dt);
    const Index m_traj = spec.trajectory_points;

    BenchmarkData out;
    out.lf.outputs.resize(2, n);
    out.lf.params = params;
    out.lf.cost = Vector::Constant(n, static_cast<double>(lf_steps));
    out.lf.labels = {"energy", "amplitude"};

    out.hf.outputs.resize(m_traj + 2, n);
    out.hf.params = params;
    out.hf.cost = Vector::Constant(n, static_cast<double>(hf_steps));
    out.hf.labels.assign(static_cast<std::size_t>(m_traj), "x");
    out.hf.labels.push_back("energy");
    out.hf.labels.push_back("amplitude");

    for (Index j = 0; j < n; ++j) {
        const double omega = params(j, 0);
        const double gamma = params(j, 1);
        if (!(omega > 0.0)) config_error("oscillator frequency must be positive");

        const auto lf = integrate_oscillator(omega, gamma, spec.lf.dt, spec.horizon, Integrator::ForwardEuler);
        const auto lq = oscillator_qoi(lf, omega);
        if (!std::isfinite(lq.energy) || !std::isfinite(lq.amplitude)) {
            numerical_error("low-fidelity oscillator diverged at sample " + std::to_string(j));
        }
        out.lf.outputs(0, j) = lq.energy;
        out.lf.outputs(1, j) = lq.amplitude;

        const auto hf = integrate_oscillator(omega, gamma, spec.hf.dt, spec.horizon, Integrator::RungeKutta4);
        for (Index k = 1; k <= m_traj; ++k) {
            const auto step = static_cast<std::size_t>(std::llround(static_cast<double>(k * hf_steps) / m_traj));
            out.hf.outputs(k - 1, j) = hf.x[step];
        }
        const auto hq = oscillator_qoi(hf, omega);
        out.hf.outputs(m_traj, j) = hq.energy;
        out.hf.outputs(m_traj + 1, j) = hq.amplitude;
    }
    out.lf.validate();
    out.hf.validate();
    return out;
}

Matrix nbody_accelerations(const NBodyState& s, double gravity, double softening) {
    const Index n = s.x.cols();
    Matrix a = Matrix::Zero(3, n);
    if (gravity == 0.0) return a;
    const double eps2 = softening * softening;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const Eigen::Vector3d d = s.x.col(j) - s.x.col(i);
            const double r2 = d.squaredNorm() + eps2;
            const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
            a.col(i) += gravity * s.masses[j] * inv_r3 * d;
            a.col(j) -= gravity * s.masses[i] * inv_r3 * d;
        }
    }
    return a;
}

double nbody_energy(const NBodyState& s, double gravity, double softening) {
    const Index n = s.x.cols();
    double kinetic = 0.0;
    for (Index i = 0; i < n; ++i) kinetic += 0.5 * s.masses[i] * s.v.col(i).squaredNorm();
    double potential = 0.0;
    if (gravity != 0.0) {
        const double eps2 = softening * softening;
        for (Index i = 0; i < n; ++i) {
            for (Index j = i + 1; j < n; ++j) {
                potential -= gravity * s.masses[i] * s.masses[j] / std::sqrt((s.x.col(j) - s.x.col(i)).squaredNorm() + eps2);
            }
        }
    }
    return kinetic + potential;
}

Vector nbody_center_of_mass(const NBodyState& s) { return s.x * s.masses / s.masses.sum(); }

NBodyState simulate_nbody(NBodyState state, const NBodySettings& settings) {
    if (!(settings.dt > 0.0) || settings.steps < 0) config_error("n-body step settings are invalid");
    Matrix a = nbody_accelerations(state, settings.gravity, settings.softening);
    for (int k = 0; k < settings.steps; ++k) {
        state.v += 0.5 * settings.dt * a;
        state.x += settings.dt * state.v;
        a = nbody_accelerations(state, settings.gravity, settings.softening);
        state.v += 0.5 * settings.dt * a;
    }
    return state;
}

NBodyState initial_cluster(int bodies, double total_mass, double gamma, double gravity, double radius,
                           std::uint64_t seed) {
    const CounterRng rng(seed);
    NBodyState s;
    s.x.resize(3, bodies);
    s.v = Matrix::Zero(3, bodies);
    s.masses = Vector::Constant(bodies, total_mass / bodies);
    for (int i = 0; i < bodies; ++i) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            Eigen::Vector3d p;
            for (int c = 0; c < 3; ++c) {
                p[c] = 2.0 * rng.uniform(static_cast<std::uint64_t>(bodies), static_cast<std::uint64_t>(i), attempt,
                                         static_cast<std::uint64_t>(c)) - 1.0;
            }
            if (p.squaredNorm() <= 1.0) {
                s.x.col(i) = radius * p;
                break;
            }
        }
    }
    s.x.colwise() -= nbody_center_of_mass(s);

    const double spin = gamma * std::sqrt(gravity * total_mass / (radius * radius * radius));
    for (int i = 0; i < bodies; ++i) {
        s.v(0, i) = -spin * s.x(1, i);
        s.v(1, i) = spin * s.x(0, i);
    }
    const Vector drift = s.v * s.masses / s.masses.sum();
    s.v.colwise() -= drift;
    return s;
}

BenchmarkData gen_nbody(const BenchmarkSpec& spec) {
    spec.validate();
    if (spec.name != "nbody") config_error("gen_nbody needs an nbody spec");
    require_axes(spec, 2);

    const Matrix params = grid_points(spec.grid);
    const Index n = params.rows();

    auto run = [&](const FidelitySettings& fidelity) {
        const int steps = static_cast<int>(step_count(spec.horizon, fidelity.dt));
        const NBodySettings settings{spec.gravity, 0.05 * spec.radius, fidelity.dt, steps};
        SnapshotEnsemble ens;
        ens.outputs.resize(3, n);
        ens.params = params;
        ens.cost = Vector::Constant(n, static_cast<double>(fidelity.bodies) * fidelity.bodies * steps);
        ens.labels = {"energy", "distance", "speed"};
        for (Index j = 0; j < n; ++j) {
            const double mass = params(j, 0);
            if (!(mass > 0.0)) config_error("n-body total mass must be positive");
            const auto start = initial_cluster(fidelity.bodies, mass, params(j, 1), spec.gravity, spec.radius, spec.seed);
            const auto end = simulate_nbody(start, settings);
            ens.outputs(0, j) = nbody_energy(end, settings.gravity, settings.softening);
            ens.outputs(1, j) = end.x.colwise().norm().mean();
            ens.outputs(2, j) = end.v.colwise().norm().mean();
        }
        ens.validate();
        return ens;
    };

    return {run(spec.lf), run(spec.hf)};
}

BenchmarkData generate(const BenchmarkSpec& spec) {
    if (spec.name == "oscillator") return gen_oscillator(spec);
    if (spec.name == "nbody") return gen_nbody(spec);
    config_error("unknown benchmark '" + spec.name + "'");
}

}  // namespace lrmf
