// Command-line front end: run, gen, tune-lambda, eval.

#include "lrmf/archive.hpp"
#include "lrmf/bench.hpp"
#include "lrmf/csv.hpp"
#include "lrmf/experiment.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace lrmf;

namespace {

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Data: return 3;
        case ErrorKind::Numerical: return 4;
    }
    return 4;
}

ExperimentConfig configure(const std::string& path, const std::optional<std::string>& out,
                           const std::optional<std::uint64_t>& seed) {
    ExperimentConfig config = load_config(path);
    if (out) config.output_dir = *out;
    if (seed) config.seed = *seed;
    return config;
}

void print_summary(const ExperimentResult& result, const fs::path& dir) {
    for (const auto& row : result.rows) {
        std::cout << mode_name(row.mode) << " n=" << row.n << " effective_hf=" << row.ledger.effective_hf
                  << " error=" << format_double(row.error.aggregate) << " kernel=" << row.kernel << '\n';
    }
    std::cout << "wrote " << (dir / "results.csv").string() << '\n';
}

void cmd_gen(const std::optional<std::string>& benchmark, const std::optional<std::string>& spec_path,
             const std::string& out, const std::optional<std::uint64_t>& seed) {
    BenchmarkSpec spec;
    if (spec_path) {
        json j;
        try {
            j = json::parse(read_text_file(*spec_path));
        } catch (const json::exception& e) {
            config_error("cannot parse " + *spec_path + ": " + e.what());
        }
        spec = benchmark_from_json(j);
    } else {
        spec = default_spec(benchmark.value_or("oscillator"));
    }
    if (seed) spec.seed = *seed;
    const BenchmarkData data = generate(spec);

    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) data_error("cannot create " + dir.string() + ": " + ec.message());
    write_matrix_csv(dir / "lf_outputs.csv", data.lf.outputs);
    write_matrix_csv(dir / "hf_outputs.csv", data.hf.outputs);
    write_matrix_csv(dir / "params.csv", data.lf.params);
    write_matrix_csv(dir / "lf_costs.csv", data.lf.cost.transpose());
    write_matrix_csv(dir / "hf_costs.csv", data.hf.cost.transpose());

    json files{{"lf_outputs", "lf_outputs.csv"}, {"hf_outputs", "hf_outputs.csv"}, {"params", "params.csv"},
               {"lf_costs", "lf_costs.csv"},     {"hf_costs", "hf_costs.csv"},     {"lf_labels", data.lf.labels},
               {"hf_labels", data.hf.labels}};
    write_text_file(dir / "data.json", json{{"files", files}}.dump(2) + "\n");
    write_text_file(dir / "benchmark.json", benchmark_to_json(spec).dump(2) + "\n");
    std::cout << spec.name << ": " << data.lf.samples() << " samples, LF dim " << data.lf.dim() << ", HF dim "
              << data.hf.dim() << " -> " << dir.string() << '\n';
}

void cmd_eval(const std::string& archive, const std::string& lf_path, bool header, bool stored) {
    const Surrogate s = load_surrogate(archive);
    const Matrix lf = read_matrix_csv(lf_path, header);
    if (lf.rows() != s.lf_pivot_columns.rows()) {
        data_error("LF columns have " + std::to_string(lf.rows()) + " rows, the surrogate expects " +
                   std::to_string(s.lf_pivot_columns.rows()));
    }
    Matrix out(s.hf_snapshots.rows(), lf.cols());
    for (Index j = 0; j < lf.cols(); ++j) out.col(j) = stored ? evaluate(s, lf.col(j)) : evaluate_raw(s, lf.col(j));
    std::cout << matrix_to_csv(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank bi-fidelity surrogates with optimized kernels"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    bool parallel = false;

    auto* run = app.add_subcommand("run", "Optimize kernels, build surrogates for every mode and budget, write results");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "Output directory (overrides output_dir)");
    run->add_option("--seed", seed, "Seed (overrides the config)");
    run->add_flag("--parallel", parallel, "Run (mode, budget) cells concurrently");

    std::optional<std::string> benchmark;
    std::optional<std::string> spec_path;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "Generate a benchmark ensemble as CSV files");
    auto* bench_opt = gen->add_option("--benchmark", benchmark, "oscillator or nbody (default settings)");
    gen->add_option("--config", spec_path, "Benchmark spec (JSON)")->check(CLI::ExistingFile)->excludes(bench_opt);
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--seed", seed, "Benchmark seed");

    std::vector<double> grid;
    auto* tune = app.add_subcommand("tune-lambda", "Grid search over the stable-rank weight");
    tune->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    tune->add_option("--grid", grid, "Lambda values (default: config lambda_grid)")->delimiter(',');
    tune->add_option("--out", out, "Output directory (overrides output_dir)");
    tune->add_option("--seed", seed, "Seed (overrides the config)");
    tune->add_flag("--parallel", parallel, "Run cells concurrently");

    std::string archive;
    std::string lf_path;
    bool header = false;
    bool stored = false;
    auto* eval = app.add_subcommand("eval", "Predict HF outputs from LF columns with a saved surrogate");
    eval->add_option("--archive", archive, "Surrogate archive (JSON)")->required()->check(CLI::ExistingFile);
    eval->add_option("--lf", lf_path, "LF columns, one sample per column (CSV)")->required()->check(CLI::ExistingFile);
    eval->add_flag("--header", header, "Skip one leading row of the CSV");
    eval->add_flag("--normalized", stored, "Input and output are in the surrogate's normalized units");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            const ExperimentConfig config = configure(config_path, out, seed);
            const auto result = run_experiment(config, RunOptions{parallel, true});
            print_summary(result, config.output_dir);
        } else if (*gen) {
            cmd_gen(benchmark, spec_path, gen_out, seed);
        } else if (*tune) {
            const ExperimentConfig config = configure(config_path, out, seed);
            const auto data = load_data(config);
            const auto report = tune_lambda(config, data, grid.empty() ? config.lambda_grid : grid, RunOptions{parallel, false});
            std::error_code ec;
            fs::create_directories(config.output_dir, ec);
            if (ec) data_error("cannot create " + config.output_dir.string() + ": " + ec.message());
            write_text_file(config.output_dir / "lambda_report.csv", lambda_report_csv(report));
            std::cout << lambda_report_csv(report) << "best lambda " << format_double(report.best) << '\n';
        } else if (*eval) {
            cmd_eval(archive, lf_path, header, stored);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
