#pragma once

#include "lrmf/common.hpp"
#include "lrmf/ensemble.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lrmf {

/// Evenly spaced axis; count == 1 uses lo.
struct ParameterAxis {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    int count = 1;
};

/// Fidelity knob: time step for the oscillator, body count (and step) for the n-body model.
struct FidelitySettings {
    double dt = 0.01;
    int bodies = 0;
};

struct BenchmarkSpec {
    std::string name;  ///< "oscillator" or "nbody"
    std::vector<ParameterAxis> grid;
    FidelitySettings lf;
    FidelitySettings hf;
    double horizon = 10.0;
    int trajectory_points = 200;  ///< oscillator HF trajectory samples
    double gravity = 1e-3;        ///< n-body G; 0 turns forces off
    double radius = 1.0;          ///< n-body initial cluster radius
    std::uint64_t seed = 0;

    void validate() const;
    [[nodiscard]] Index samples() const;
};

[[nodiscard]] BenchmarkSpec default_oscillator_spec();
[[nodiscard]] BenchmarkSpec default_nbody_spec();
/// Defaults for a benchmark name; throws a config error for unknown names.
[[nodiscard]] BenchmarkSpec default_spec(const std::string& name);

/// Grid points, N x q, with the last axis varying fastest.
[[nodiscard]] Matrix grid_points(const std::vector<ParameterAxis>& grid);

struct BenchmarkData {
    SnapshotEnsemble lf;
    SnapshotEnsemble hf;
};

// Damped oscillator x'' = -omega^2 x - gamma x', x(0) = 1, x'(0) = 0.

enum class Integrator { ForwardEuler, RungeKutta4 };

struct OscillatorTrace {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> v;
};

[[nodiscard]] OscillatorTrace integrate_oscillator(double omega, double gamma, double dt, double horizon,
                                                   Integrator method);

/// 0.5 (v^2 + omega^2 x^2).
[[nodiscard]] double oscillator_energy(double omega, double x, double v);

/// LF rows: energy, amplitude. HF rows: trajectory x (labeled "x"), energy, amplitude. Outputs are raw.
[[nodiscard]] BenchmarkData gen_oscillator(const BenchmarkSpec& spec);

// Softened self-gravitating cluster.

struct NBodyState {
    Matrix x;       ///< 3 x bodies
    Matrix v;       ///< 3 x bodies
    Vector masses;
};

struct NBodySettings {
    double gravity = 1e-3;
    double softening = 0.05;
    double dt = 0.01;
    int steps = 0;
};

[[nodiscard]] Matrix nbody_accelerations(const NBodyState& s, double gravity, double softening);
[[nodiscard]] double nbody_energy(const NBodyState& s, double gravity, double softening);
[[nodiscard]] Vector nbody_center_of_mass(const NBodyState& s);

/// Kick-drift-kick leapfrog.
[[nodiscard]] NBodyState simulate_nbody(NBodyState state, const NBodySettings& settings);

/// Uniform sphere of radius R with centre of mass and momentum removed, spinning at gamma * sqrt(G M / R^3) about z.
[[nodiscard]] NBodyState initial_cluster(int bodies, double total_mass, double gamma, double gravity, double radius,
                                         std::uint64_t seed);

/// Rows: total energy, mean distance from the origin, mean speed (identical for both fidelities).
[[nodiscard]] BenchmarkData gen_nbody(const BenchmarkSpec& spec);

[[nodiscard]] BenchmarkData generate(const BenchmarkSpec& spec);

}  // namespace lrmf
