#include "lrmf/experiment.hpp"

#include "lrmf/csv.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <set>

namespace lrmf {

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) config_error(where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            config_error("unknown key '" + key + "' in " + where);
        }
    }
}

template <class T>
T get_as(const json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        config_error("invalid value for '" + std::string(key) + "' in " + where);
    }
}

template <class T>
void read_opt(const json& j, const char* key, T& target, const std::string& where) {
    if (j.contains(key)) target = get_as<T>(j, key, where);
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

PsoConfig pso_from_json(const json& j, PsoConfig pso) {
    const std::string where = "pso";
    check_keys(j, {"swarm_size", "k1", "k2", "v_max_fraction", "max_iters", "stall_iters", "threads"}, where);
    read_opt(j, "swarm_size", pso.swarm_size, where);
    read_opt(j, "k1", pso.k1, where);
    read_opt(j, "k2", pso.k2, where);
    read_opt(j, "v_max_fraction", pso.v_max_fraction, where);
    read_opt(j, "max_iters", pso.max_iters, where);
    read_opt(j, "stall_iters", pso.stall_iters, where);
    read_opt(j, "threads", pso.threads, where);
    return pso;
}

FileSource files_from_json(const json& j, const std::filesystem::path& base) {
    const std::string where = "data.files";
    check_keys(j, {"lf_outputs", "hf_outputs", "params", "lf_costs", "hf_costs", "lf_labels", "hf_labels", "header"},
               where);
    FileSource f;
    f.lf_outputs = resolve(get_as<std::string>(j, "lf_outputs", where), base);
    f.hf_outputs = resolve(get_as<std::string>(j, "hf_outputs", where), base);
    if (j.contains("params")) f.params = resolve(get_as<std::string>(j, "params", where), base);
    if (j.contains("lf_costs")) f.lf_costs = resolve(get_as<std::string>(j, "lf_costs", where), base);
    if (j.contains("hf_costs")) f.hf_costs = resolve(get_as<std::string>(j, "hf_costs", where), base);
    read_opt(j, "lf_labels", f.lf_labels, where);
    read_opt(j, "hf_labels", f.hf_labels, where);
    read_opt(j, "header", f.header, where);
    return f;
}

double mean_or(const Vector& v, double fallback) { return v.size() == 0 ? fallback : v.mean(); }

Vector costs_from_file(const std::filesystem::path& path, bool header, Index n) {
    if (path.empty()) return Vector::Ones(n);
    const Matrix m = read_matrix_csv(path, header);
    if (m.size() != n) data_error(path.string() + " must hold one cost per sample");
    return Eigen::Map<const Vector>(m.data(), n);
}

}  // namespace

std::string_view mode_name(RunMode mode) noexcept {
    switch (mode) {
        case RunMode::LinearBaseline: return "linear-baseline";
        case RunMode::Additive: return "additive";
        case RunMode::Adaptive: return "adaptive";
    }
    return "?";
}

RunMode parse_mode(std::string_view name) {
    if (name == "linear-baseline") return RunMode::LinearBaseline;
    if (name == "additive") return RunMode::Additive;
    if (name == "adaptive") return RunMode::Adaptive;
    config_error("unknown selection mode '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
    if (data.benchmark && data.files) config_error("data must name either a benchmark or a set of files, not both");
    if (data.benchmark) data.benchmark->validate();
    if (kernels.empty()) config_error("kernel library is empty");
    if (std::set<KernelFamily>(kernels.begin(), kernels.end()).size() != kernels.size()) {
        config_error("kernel library lists a family twice");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) config_error("lambda must be finite and non-negative");
    if (!(rcond >= 0.0) || !(drop_tolerance >= 0.0)) config_error("rcond and drop_tolerance must be non-negative");
    pso.validate();
    if (modes.empty()) config_error("at least one selection mode is required");
    if (std::set<RunMode>(modes.begin(), modes.end()).size() != modes.size()) config_error("a mode is listed twice");
    if (budgets.empty()) config_error("at least one budget is required");
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        if (budgets[i] < 1) config_error("budgets must be positive");
        if (i > 0 && budgets[i] <= budgets[i - 1]) config_error("budgets must be sorted ascending without repeats");
    }
    if (objective_eval_cost && !(*objective_eval_cost >= 0.0)) config_error("objective_eval_cost must be non-negative");
    if (one_hf_cost && !(*one_hf_cost > 0.0)) config_error("one_hf_cost must be positive");
    for (double l : lambda_grid) {
        if (!(l >= 0.0) || !std::isfinite(l)) config_error("lambda grid values must be finite and non-negative");
    }
}

void ExperimentConfig::validate_budgets(Index samples) const {
    for (Index n : budgets) {
        if (n >= samples) {
            config_error("budget " + std::to_string(n) + " is not below the sample count " + std::to_string(samples));
        }
    }
}

BenchmarkSpec benchmark_from_json(const json& j) {
    if (j.is_string()) return default_spec(j.get<std::string>());
    const std::string where = "benchmark";
    check_keys(j, {"name", "grid", "lf", "hf", "horizon", "trajectory_points", "gravity", "radius", "seed"}, where);
    BenchmarkSpec spec = default_spec(get_as<std::string>(j, "name", where));
    if (j.contains("grid")) {
        const auto& grid = j.at("grid");
        if (!grid.is_array()) config_error("benchmark grid must be an array");
        if (grid.size() != spec.grid.size()) config_error("benchmark grid has the wrong number of axes");
        for (std::size_t a = 0; a < grid.size(); ++a) {
            const std::string axis_where = "benchmark grid axis " + std::to_string(a);
            check_keys(grid[a], {"name", "lo", "hi", "count"}, axis_where);
            auto& axis = spec.grid[a];
            read_opt(grid[a], "name", axis.name, axis_where);
            read_opt(grid[a], "lo", axis.lo, axis_where);
            read_opt(grid[a], "hi", axis.hi, axis_where);
            read_opt(grid[a], "count", axis.count, axis_where);
        }
    }
    for (auto [key, target] : {std::pair{"lf", &spec.lf}, std::pair{"hf", &spec.hf}}) {
        if (!j.contains(key)) continue;
        const std::string fid_where = std::string("benchmark ") + key;
        check_keys(j.at(key), {"dt", "bodies"}, fid_where);
        read_opt(j.at(key), "dt", target->dt, fid_where);
        read_opt(j.at(key), "bodies", target->bodies, fid_where);
    }
    read_opt(j, "horizon", spec.horizon, where);
    read_opt(j, "trajectory_points", spec.trajectory_points, where);
    read_opt(j, "gravity", spec.gravity, where);
    read_opt(j, "radius", spec.radius, where);
    read_opt(j, "seed", spec.seed, where);
    spec.validate();
    return spec;
}

json benchmark_to_json(const BenchmarkSpec& spec) {
    json grid = json::array();
    for (const auto& axis : spec.grid) {
        grid.push_back({{"name", axis.name}, {"lo", axis.lo}, {"hi", axis.hi}, {"count", axis.count}});
    }
    json j{{"name", spec.name},
           {"grid", grid},
           {"lf", {{"dt", spec.lf.dt}, {"bodies", spec.lf.bodies}}},
           {"hf", {{"dt", spec.hf.dt}, {"bodies", spec.hf.bodies}}},
           {"horizon", spec.horizon}};
    if (spec.name == "oscillator") {
        j["trajectory_points"] = spec.trajectory_points;
    } else {
        j["gravity"] = spec.gravity;
        j["radius"] = spec.radius;
    }
    j["seed"] = spec.seed;
    return j;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
    const std::string where = "config";
    check_keys(j, {"data", "kernels", "lambda", "rcond", "drop_tolerance", "pso", "modes", "budgets", "seed",
                   "output_dir", "normalize", "objective_eval_cost", "one_hf_cost", "rq_literal", "compact_wendland",
                   "lambda_grid"},
               where);
    ExperimentConfig c;
    read_opt(j, "seed", c.seed, where);

    if (!j.contains("data")) config_error("config needs a data section");
    const auto& data = j.at("data");
    check_keys(data, {"benchmark", "files"}, "data");
    if (data.contains("benchmark")) {
        const auto& b = data.at("benchmark");
        c.data.benchmark = benchmark_from_json(b);
        if (!b.is_object() || !b.contains("seed")) c.data.benchmark->seed = c.seed;
    }
    if (data.contains("files")) c.data.files = files_from_json(data.at("files"), base_dir);

    if (j.contains("kernels")) {
        c.kernels.clear();
        for (const auto& name : get_as<std::vector<std::string>>(j, "kernels", where)) c.kernels.push_back(parse_family(name));
    }
    read_opt(j, "lambda", c.lambda, where);
    read_opt(j, "rcond", c.rcond, where);
    read_opt(j, "drop_tolerance", c.drop_tolerance, where);
    if (j.contains("pso")) c.pso = pso_from_json(j.at("pso"), c.pso);
    if (j.contains("modes")) {
        c.modes.clear();
        for (const auto& name : get_as<std::vector<std::string>>(j, "modes", where)) c.modes.push_back(parse_mode(name));
    }
    if (!j.contains("budgets")) config_error("config needs a budgets list");
    c.budgets = get_as<std::vector<Index>>(j, "budgets", where);
    if (j.contains("output_dir")) c.output_dir = resolve(get_as<std::string>(j, "output_dir", where), base_dir);
    read_opt(j, "normalize", c.normalize, where);
    if (j.contains("objective_eval_cost") && !j.at("objective_eval_cost").is_null()) {
        c.objective_eval_cost = get_as<double>(j, "objective_eval_cost", where);
    }
    if (j.contains("one_hf_cost") && !j.at("one_hf_cost").is_null()) {
        c.one_hf_cost = get_as<double>(j, "one_hf_cost", where);
    }
    read_opt(j, "rq_literal", c.kernel_options.rq_literal, where);
    read_opt(j, "compact_wendland", c.kernel_options.compact_wendland, where);
    read_opt(j, "lambda_grid", c.lambda_grid, where);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        config_error("cannot parse " + path.string() + ": " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

ExperimentData prepare_data(const SnapshotEnsemble& lf_raw, const SnapshotEnsemble& hf_raw, bool normalize) {
    lf_raw.validate();
    if (hf_raw.samples() != lf_raw.samples()) {
        data_error("HF data has " + std::to_string(hf_raw.samples()) + " columns but LF data has " +
                   std::to_string(lf_raw.samples()));
    }
    ExperimentData out;
    out.hf_available.resize(static_cast<std::size_t>(hf_raw.samples()));
    SnapshotEnsemble hf = hf_raw;
    for (Index j = 0; j < hf.samples(); ++j) {
        const bool ok = hf.outputs.col(j).allFinite();
        out.hf_available[static_cast<std::size_t>(j)] = ok;
        if (!ok) hf.outputs.col(j).setZero();
    }
    if (normalize) {
        out.lf = std::make_shared<const SnapshotEnsemble>(normalize_ensemble(lf_raw, groups_from_labels(lf_raw)).ensemble);
        hf = normalize_ensemble(hf, groups_from_labels(hf)).ensemble;
    } else {
        out.lf = std::make_shared<const SnapshotEnsemble>(lf_raw);
    }
    for (Index j = 0; j < hf.samples(); ++j) {
        if (!out.hf_available[static_cast<std::size_t>(j)]) hf.outputs.col(j).setConstant(std::nan(""));
    }
    out.hf = std::move(hf);
    return out;
}

ExperimentData load_data(const ExperimentConfig& config) {
    if (config.data.benchmark) {
        const BenchmarkData generated = generate(*config.data.benchmark);
        return prepare_data(generated.lf, generated.hf, config.normalize);
    }
    if (!config.data.files) config_error("config has no data source");
    const FileSource& f = *config.data.files;
    SnapshotEnsemble lf;
    SnapshotEnsemble hf;
    lf.outputs = read_matrix_csv(f.lf_outputs, f.header);
    hf.outputs = read_matrix_csv(f.hf_outputs, f.header);
    const Index n = lf.samples();
    if (n == 0) data_error(f.lf_outputs.string() + " holds no samples");
    if (!f.params.empty()) {
        lf.params = read_matrix_csv(f.params, f.header);
        hf.params = lf.params;
    }
    lf.cost = costs_from_file(f.lf_costs, f.header, n);
    hf.cost = costs_from_file(f.hf_costs, f.header, n);
    lf.labels = f.lf_labels;
    hf.labels = f.hf_labels;
    if (hf.outputs.cols() < n) {
        Matrix padded = Matrix::Constant(hf.outputs.rows(), n, std::nan(""));
        padded.leftCols(hf.outputs.cols()) = hf.outputs;
        hf.outputs = std::move(padded);
    }
    lf.validate();
    return prepare_data(lf, hf, config.normalize);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentData& data, const RunOptions& options) {
    config.validate();
    if (!data.lf) config_error("experiment has no LF data");
    const SnapshotEnsemble& lf = *data.lf;
    config.validate_budgets(lf.samples());

    ExperimentResult result;
    result.objective_eval_cost =
        config.objective_eval_cost.value_or(0.01 * mean_or(lf.cost, 1.0));
    for (const auto& g : groups_from_labels(data.hf)) result.qoi_names.push_back(g.name);

    const CounterRng seeds(config.seed);
    const bool needs_library = std::any_of(config.modes.begin(), config.modes.end(),
                                           [](RunMode m) { return m != RunMode::LinearBaseline; });

    // Kernel optimization: once per family, reused by every budget.
    if (needs_library) {
        auto optimize_one = [&](KernelFamily family) {
            PsoConfig pso = config.pso;
            pso.seed = seeds.bits(1, static_cast<std::uint64_t>(family_index(family)));
            const ObjectiveConfig cfg = make_objective_config(family, lf, config.lambda, config.kernel_options);
            return optimize_hyperparams(family, lf, cfg, pso);
        };
        if (options.parallel) {
            std::vector<std::future<OptimizedKernel>> jobs;
            for (auto family : config.kernels) jobs.push_back(std::async(std::launch::async, optimize_one, family));
            for (auto& job : jobs) result.optimized.push_back(job.get());
        } else {
            for (auto family : config.kernels) result.optimized.push_back(optimize_one(family));
        }
    }
    int library_evaluations = 0;
    for (const auto& k : result.optimized) library_evaluations += k.evaluations;

    if (std::find(config.modes.begin(), config.modes.end(), RunMode::Additive) != config.modes.end()) {
        PsoConfig pso = config.pso;
        pso.seed = seeds.bits(2);
        result.additive = additive_select(result.optimized, lf, config.lambda, pso);
    }
    const bool has_adaptive =
        std::find(config.modes.begin(), config.modes.end(), RunMode::Adaptive) != config.modes.end();
    if (has_adaptive) result.adaptive.resize(config.budgets.size());

    struct Cell {
        RunMode mode;
        std::size_t budget_slot;
    };
    std::vector<Cell> cells;
    for (auto mode : config.modes) {
        for (std::size_t b = 0; b < config.budgets.size(); ++b) cells.push_back({mode, b});
    }
    result.rows.resize(cells.size());

    auto run_cell = [&](std::size_t slot) {
        const Cell cell = cells[slot];
        const Index n = config.budgets[cell.budget_slot];
        ResultRow& row = result.rows[slot];
        row.mode = cell.mode;
        row.n = n;

        bool selection_done = false;
        auto provider = [&](Index sample) -> HfSample {
            ++row.provider_calls;
            row.accesses.push_back({selection_done ? AccessPhase::Build : AccessPhase::Selection, sample});
            if (sample < 0 || sample >= data.hf.samples() || !data.hf_available[static_cast<std::size_t>(sample)]) {
                data_error("HF data missing for sample index " + std::to_string(sample));
            }
            return {data.hf.outputs.col(sample), data.hf.cost.size() ? data.hf.cost[sample] : 1.0};
        };

        Kernel kernel;
        int evaluations = 0;
        switch (cell.mode) {
            case RunMode::LinearBaseline:
                kernel = KernelSpec{KernelFamily::Linear, {}, config.kernel_options};
                break;
            case RunMode::Additive:
                kernel = result.additive->kernel;
                evaluations = library_evaluations + result.additive->report.evaluations;
                break;
            case RunMode::Adaptive: {
                SelectionReport report =
                    adaptive_select(result.optimized, lf, n, AdaptiveOptions{config.rcond, config.drop_tolerance});
                const auto it = std::find_if(result.optimized.begin(), result.optimized.end(),
                                             [&](const OptimizedKernel& k) { return k.spec.family == report.chosen; });
                if (!report.chosen || it == result.optimized.end()) numerical_error("adaptive selection found no usable kernel");
                kernel = it->spec;
                evaluations = library_evaluations;
                result.adaptive[cell.budget_slot] = std::move(report);
                break;
            }
        }
        selection_done = true;

        BuildOptions build;
        build.rcond = config.rcond;
        build.drop_tolerance = config.drop_tolerance;
        build.kernel_opt_cost = evaluations * result.objective_eval_cost;
        build.one_hf_cost = config.one_hf_cost.value_or(0.0);
        BuildResult built = build_surrogate(data.lf, kernel, n, provider, build);

        row.surrogate = std::move(built.surrogate);
        row.surrogate.hf_row_scale = data.hf.row_scale;
        row.surrogate.hf_labels = data.hf.labels;
        row.ledger = built.ledger;
        row.kernel = describe(kernel);
        row.condition = row.surrogate.solver->condition();
        row.accesses.push_back({AccessPhase::Evaluation, -1});
        row.error = median_relative_error(row.surrogate, data.hf, lf);
    };

    if (options.parallel) {
        std::vector<std::future<void>> jobs;
        for (std::size_t slot = 0; slot < cells.size(); ++slot) jobs.push_back(std::async(std::launch::async, run_cell, slot));
        for (auto& job : jobs) job.get();
    } else {
        for (std::size_t slot = 0; slot < cells.size(); ++slot) run_cell(slot);
    }

    if (options.write_outputs) write_outputs(result, config.output_dir);
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    return run_experiment(config, load_data(config), options);
}

std::string results_csv(const ExperimentResult& result) {
    std::string out = "mode,n,hf_samples_used,kernel_opt_cost,one_hf_cost,effective_hf,median_rel_error";
    for (const auto& q : result.qoi_names) out += ",err_" + q;
    out += ",kernel\n";
    for (const auto& row : result.rows) {
        out += std::string(mode_name(row.mode)) + ',' + std::to_string(row.n) + ',' +
               std::to_string(row.ledger.hf_samples_used) + ',' + format_double(row.ledger.kernel_opt_cost) + ',' +
               format_double(row.ledger.one_hf_cost) + ',' + std::to_string(row.ledger.effective_hf) + ',' +
               format_double(row.error.aggregate);
        for (const auto& q : result.qoi_names) {
            const auto it = std::find_if(row.error.per_qoi.begin(), row.error.per_qoi.end(),
                                         [&](const auto& e) { return e.first == q; });
            out += ',' + format_double(it == row.error.per_qoi.end() ? std::nan("") : it->second);
        }
        out += ",\"" + row.kernel + "\"\n";
    }
    return out;
}

json selection_json(const ExperimentResult& result) {
    json j;
    j["objective_eval_cost"] = result.objective_eval_cost;
    json optimized = json::array();
    for (const auto& k : result.optimized) {
        optimized.push_back({{"family", family_name(k.spec.family)},
                             {"h", k.spec.h},
                             {"objective_value", k.objective_value},
                             {"evaluations", k.evaluations}});
    }
    j["optimized"] = optimized;
    if (result.additive) j["additive"] = report_to_json(result.additive->report);
    json adaptive = json::array();
    for (const auto& r : result.adaptive) adaptive.push_back(report_to_json(r));
    j["adaptive"] = adaptive;
    json cells = json::array();
    for (const auto& row : result.rows) {
        cells.push_back({{"mode", mode_name(row.mode)},
                         {"n", row.n},
                         {"kernel", kernel_to_json(row.surrogate.kernel)},
                         {"pivots", row.surrogate.pivots},
                         {"hf_samples_used", row.ledger.hf_samples_used},
                         {"kernel_opt_cost", row.ledger.kernel_opt_cost},
                         {"one_hf_cost", row.ledger.one_hf_cost},
                         {"effective_hf", row.ledger.effective_hf}});
    }
    j["cells"] = cells;
    return j;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "surrogates", ec);
    if (ec) data_error("cannot create " + dir.string() + ": " + ec.message());
    write_text_file(dir / "results.csv", results_csv(result));
    write_text_file(dir / "selection.json", selection_json(result).dump(2) + "\n");
    for (const auto& row : result.rows) {
        save_surrogate(row.surrogate, dir / "surrogates" / (std::string(mode_name(row.mode)) + "_n" + std::to_string(row.n) + ".json"));
    }
}

LambdaReport tune_lambda(const ExperimentConfig& config, const ExperimentData& data, const std::vector<double>& grid,
                         const RunOptions& options) {
    if (grid.empty()) config_error("lambda grid is empty");
    LambdaReport report;
    report.grid = grid;
    RunOptions quiet = options;
    quiet.write_outputs = false;
    for (double lambda : grid) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) config_error("lambda grid values must be finite and non-negative");
        ExperimentConfig c = config;
        c.lambda = lambda;
        const ExperimentResult r = run_experiment(c, data, quiet);
        const bool any_tuned = std::any_of(r.rows.begin(), r.rows.end(),
                                           [](const ResultRow& row) { return row.mode != RunMode::LinearBaseline; });
        double sum = 0.0;
        int count = 0;
        for (const auto& row : r.rows) {
            if (any_tuned && row.mode == RunMode::LinearBaseline) continue;
            if (!std::isfinite(row.error.aggregate)) continue;
            sum += row.error.aggregate;
            ++count;
        }
        report.scores.push_back(count ? sum / count : std::numeric_limits<double>::infinity());
    }
    const auto best = std::min_element(report.scores.begin(), report.scores.end());
    report.best = report.grid[static_cast<std::size_t>(best - report.scores.begin())];
    return report;
}

std::string lambda_report_csv(const LambdaReport& report) {
    std::string out = "lambda,score\n";
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        out += format_double(report.grid[i]) + ',' + format_double(report.scores[i]) + '\n';
    }
    return out;
}

}  // namespace lrmf
