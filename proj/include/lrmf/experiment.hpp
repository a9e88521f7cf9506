#pragma once

#include "lrmf/archive.hpp"
#include "lrmf/bench.hpp"
#include "lrmf/common.hpp"
#include "lrmf/ensemble.hpp"
#include "lrmf/hyperopt.hpp"
#include "lrmf/kernels.hpp"
#include "lrmf/selection.hpp"
#include "lrmf/surrogate.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lrmf {

enum class RunMode { LinearBaseline, Additive, Adaptive };

[[nodiscard]] std::string_view mode_name(RunMode mode) noexcept;
[[nodiscard]] RunMode parse_mode(std::string_view name);

/// Matrix files in the CSV layout written by `gen`. Relative paths resolve against the config file.
struct FileSource {
    std::filesystem::path lf_outputs;  ///< m x N
    std::filesystem::path hf_outputs;  ///< M x N; NaN columns count as missing
    std::filesystem::path params;      ///< N x q, optional
    std::filesystem::path lf_costs;    ///< 1 x N, optional
    std::filesystem::path hf_costs;    ///< 1 x N, optional
    std::vector<std::string> lf_labels;
    std::vector<std::string> hf_labels;
    bool header = false;
};

struct DataSource {
    std::optional<BenchmarkSpec> benchmark;
    std::optional<FileSource> files;
};

inline const std::vector<double> kDefaultLambdaGrid = {1e-3, 1e-2, 1e-1, 1.0, 10.0};

struct ExperimentConfig {
    DataSource data;
    std::vector<KernelFamily> kernels{kAllFamilies.begin(), kAllFamilies.end()};
    double lambda = 0.1;
    double rcond = 1e-12;
    double drop_tolerance = 1e-12;
    PsoConfig pso;
    std::vector<RunMode> modes{RunMode::LinearBaseline, RunMode::Additive, RunMode::Adaptive};
    std::vector<Index> budgets;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "results";
    bool normalize = true;
    /// Cost charged per objective evaluation; unset means 0.01 x mean low-fidelity sample cost.
    std::optional<double> objective_eval_cost;
    /// Cost of one HF run for the ledger; unset means the mean cost of the fetched samples.
    std::optional<double> one_hf_cost;
    KernelOptions kernel_options;
    std::vector<double> lambda_grid = kDefaultLambdaGrid;

    /// Checks everything that does not depend on the data.
    void validate() const;
    /// Checks the budgets against the sample count.
    void validate_budgets(Index samples) const;
};

/// Parses a config document; unknown keys are rejected.
[[nodiscard]] ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {});
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

[[nodiscard]] BenchmarkSpec benchmark_from_json(const json& j);
[[nodiscard]] json benchmark_to_json(const BenchmarkSpec& spec);

struct ExperimentData {
    std::shared_ptr<const SnapshotEnsemble> lf;  ///< normalized when requested
    SnapshotEnsemble hf;                         ///< normalized when requested
    std::vector<bool> hf_available;
};

[[nodiscard]] ExperimentData load_data(const ExperimentConfig& config);
/// Applies the config's normalization to raw ensembles.
[[nodiscard]] ExperimentData prepare_data(const SnapshotEnsemble& lf_raw, const SnapshotEnsemble& hf_raw,
                                          bool normalize);

enum class AccessPhase { Selection, Build, Evaluation };

struct HfAccess {
    AccessPhase phase = AccessPhase::Build;
    Index sample = -1;  ///< -1 for a whole-ensemble read
};

struct ResultRow {
    RunMode mode = RunMode::LinearBaseline;
    Index n = 0;
    CostLedger ledger;
    ErrorReport error;
    std::string kernel;
    Surrogate surrogate;
    std::vector<HfAccess> accesses;
    Index provider_calls = 0;
    /// Ratio of largest to smallest kept eigenvalue of the sliced Gramian.
    double condition = 0.0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;  ///< modes in config order, budgets ascending within a mode
    std::vector<OptimizedKernel> optimized;
    std::optional<AdditiveSelection> additive;
    std::vector<SelectionReport> adaptive;
    double objective_eval_cost = 0.0;
    std::vector<std::string> qoi_names;
};

struct RunOptions {
    bool parallel = false;
    bool write_outputs = true;
};

[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentData& data,
                                              const RunOptions& options = {});
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

[[nodiscard]] std::string results_csv(const ExperimentResult& result);
[[nodiscard]] json selection_json(const ExperimentResult& result);
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

struct LambdaReport {
    std::vector<double> grid;
    std::vector<double> scores;  ///< mean held-out median error over the tuned cells
    double best = 0.0;
};

/// Reruns the experiment for every lambda and returns the one with the smallest score (first on ties).
[[nodiscard]] LambdaReport tune_lambda(const ExperimentConfig& config, const ExperimentData& data,
                                       const std::vector<double>& grid, const RunOptions& options = {});
[[nodiscard]] std::string lambda_report_csv(const LambdaReport& report);

}  // namespace lrmf
