#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mcd/config.hpp"
#include "mcd/csv.hpp"
#include "mcd/estimator.hpp"
#include "mcd/metrics.hpp"
#include "mcd/models.hpp"

//! Seeded benchmark harness: train/test splits, a shared evaluation grid
//! over the model's marginal span, KL benchmarks on synthetic density
//! models, NLL benchmarks on CSV datasets, construction/ratio ablation
//! grids, and deterministic table emission.
//!
//! Every cell derives its own random substream from (seed, cell index), so
//! serial and parallel execution produce bit-identical tables.

namespace mcd {

//! Disjoint train/test index sets, uniformly shuffled.
struct SplitIndices
{
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
};

//! Splits n_max rows into train/test by the capped-80% rule:
//! n = min(300, ⌊0.8·n_max⌋), n_test = min(300, n_max − n).
//! @throw std::invalid_argument when n_max < 2.
inline SplitIndices split_paper(Eigen::Index n_max, std::uint64_t seed)
{
    if (n_max < 2)
        throw std::invalid_argument(
            "split_paper: need at least 2 rows to split");
    const Eigen::Index n_train =
        std::min<Eigen::Index>(300, (n_max * 8) / 10);
    const Eigen::Index n_test = std::min<Eigen::Index>(300, n_max - n_train);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_max));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto rng = make_engine(seed);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i);
        std::swap(order[i], order[pick(rng)]);
    }

    SplitIndices split;
    split.train.assign(order.begin(), order.begin() + n_train);
    split.test.assign(order.begin() + n_train,
                      order.begin() + n_train + n_test);
    return split;
}

//! Linear-interpolated empirical quantile of a sorted sample.
inline double sorted_quantile(const std::vector<double>& sorted, double q)
{
    if (sorted.empty())
        throw std::invalid_argument("sorted_quantile: empty sample");
    if (!(q >= 0.0) || !(q <= 1.0))
        throw std::invalid_argument("sorted_quantile: q must lie in [0, 1]");
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

//! Shared evaluation grid for a density model: uniformly spaced points
//! spanning the [0.0005, 0.9995] quantiles of the model's marginal target
//! law, estimated from a pilot sample.
inline Eigen::VectorXd pilot_grid(const DensityModel& model,
                                  Eigen::Index grid_points,
                                  Eigen::Index pilot_draws, std::uint64_t seed)
{
    if (grid_points < 2)
        throw std::invalid_argument("pilot_grid: need at least 2 grid points");
    if (pilot_draws < 2)
        throw std::invalid_argument("pilot_grid: need at least 2 pilot draws");
    auto rng = make_engine(seed);
    const SupervisedDataset pilot = model.sample(pilot_draws, rng);
    std::vector<double> y(pilot.Y.data(), pilot.Y.data() + pilot.Y.size());
    std::sort(y.begin(), y.end());
    const double lo = sorted_quantile(y, 0.0005);
    const double hi = sorted_quantile(y, 0.9995);
    if (!(hi > lo))
        throw std::runtime_error(
            "pilot_grid: the pilot sample has no spread");
    return Eigen::VectorXd::LinSpaced(grid_points, lo, hi);
}

//! Estimator variants the benchmarks know how to train.
enum class BenchMethod { mcd_mlp, mcd_logistic };

inline const char* to_string(BenchMethod m)
{
    switch (m) {
    case BenchMethod::mcd_mlp: return "mcd_mlp";
    case BenchMethod::mcd_logistic: return "mcd_logistic";
    }
    throw std::logic_error("to_string: unhandled bench method");
}

inline BenchMethod bench_method_from_string(const std::string& name)
{
    if (name == "mcd_mlp")
        return BenchMethod::mcd_mlp;
    if (name == "mcd_logistic")
        return BenchMethod::mcd_logistic;
    throw std::invalid_argument("bench_method_from_string: unknown method '"
                                + name
                                + "'; expected mcd_mlp or mcd_logistic");
}

//! Name of the marginal-only reference estimator that accompanies every
//! cell: it predicts the marginal target density and ignores x.
inline const char* baseline_method_name() { return "marginal_kde"; }

//! One benchmark cell: an estimator variant plus the construction knobs.
struct BenchCell
{
    BenchMethod method = BenchMethod::mcd_mlp;
    Construction construction = Construction::id;
    double r = 0.5;          //!< matched-pair ratio
    Eigen::Index m = 1;      //!< target draws per observation (multi-target)
    Eigen::Index n_x = 0;    //!< unpaired feature-only rows
    Eigen::Index n_y = 0;    //!< unpaired target-only rows
};

//! How the reported KL value is normalized.
enum class KlNormalization {
    protocol_default, //!< raw sum at (n_test = 100, grid = 10,000); divided
                      //!< by n_test at any other scale
    raw_sum,          //!< always the literal unweighted double sum
    per_test_point,   //!< always divided by n_test
};

//! Settings of one density-model benchmark run.
struct DensityBenchConfig
{
    std::string model = "basic_linear";
    Eigen::Index p = 10;
    Eigen::Index n_train = 100;
    Eigen::Index n_test = 100;
    Eigen::Index grid_points = 10000;
    Eigen::Index pilot_draws = 100000;
    int runs = 1; //!< independent replications of every cell
    int jobs = 1; //!< worker threads (results are identical for any value)
    bool rescale = false; //!< renormalize predicted pdfs on the grid
    bool timings = false; //!< record wall times (off keeps outputs stable)
    KlNormalization kl_normalization = KlNormalization::protocol_default;
    double epsilon = 1e-6;
    MlpHyperparams mlp;
    LogisticHyperparams logistic;
    std::vector<BenchCell> cells = {BenchCell{}};
    std::uint64_t seed = 0;

    void validate() const
    {
        if (n_train < 2)
            throw std::invalid_argument(
                "DensityBenchConfig: n_train must be at least 2");
        if (n_test < 1)
            throw std::invalid_argument(
                "DensityBenchConfig: n_test must be at least 1");
        if (grid_points < 2)
            throw std::invalid_argument(
                "DensityBenchConfig: grid_points must be at least 2");
        if (pilot_draws < 2)
            throw std::invalid_argument(
                "DensityBenchConfig: pilot_draws must be at least 2");
        if (runs < 1 || jobs < 1)
            throw std::invalid_argument(
                "DensityBenchConfig: runs and jobs must be at least 1");
        if (cells.empty())
            throw std::invalid_argument(
                "DensityBenchConfig: no benchmark cells configured");
        for (const auto& cell : cells) {
            Ratio probe(cell.r); // validates the open-interval bound
            (void)probe;
            if (cell.m < 1)
                throw std::invalid_argument(
                    "DensityBenchConfig: m must be at least 1");
            if (cell.m > 1 && cell.construction != Construction::id_multitarget)
                throw std::invalid_argument(
                    "DensityBenchConfig: m > 1 requires the id_multitarget "
                    "construction");
            if (cell.n_x < 0 || cell.n_y < 0)
                throw std::invalid_argument(
                    "DensityBenchConfig: n_x and n_y cannot be negative");
        }
    }

    bool divide_kl_by_n_test() const
    {
        switch (kl_normalization) {
        case KlNormalization::raw_sum: return false;
        case KlNormalization::per_test_point: return true;
        case KlNormalization::protocol_default:
            return !(n_test == 100 && grid_points == 10000);
        }
        throw std::logic_error("divide_kl_by_n_test: unhandled normalization");
    }
};

namespace detail {

//! Runs fn(0..count-1), spreading indices over `jobs` workers.  Results
//! must be written to per-index slots; the first exception is rethrown.
template <typename Fn>
inline void run_indexed(std::size_t count, int jobs, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(
        static_cast<std::size_t>(std::max(jobs, 1)), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_lock;
    std::exception_ptr error;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> hold(error_lock);
                if (!error)
                    error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

inline McdConfig cell_mcd_config(const BenchCell& cell, double epsilon,
                                 const MlpHyperparams& mlp,
                                 const LogisticHyperparams& logistic,
                                 std::uint64_t seed)
{
    McdConfig mc;
    mc.r = Ratio(cell.r);
    mc.construction = cell.construction;
    mc.epsilon = epsilon;
    mc.seed = seed;
    mc.discriminator.kind = cell.method == BenchMethod::mcd_mlp
        ? DiscriminatorKind::mlp
        : DiscriminatorKind::logistic_elasticnet;
    mc.discriminator.mlp = mlp;
    mc.discriminator.logistic = logistic;
    return mc;
}

//! Trains the cell's estimator on fresh draws from the model.
inline McdEstimator train_density_cell(const DensityModel& model,
                                       const BenchCell& cell,
                                       const DensityBenchConfig& cfg,
                                       std::uint64_t cell_seed)
{
    auto rng = make_engine(derive_seed(cell_seed, 0));
    const McdConfig mc =
        cell_mcd_config(cell, cfg.epsilon, cfg.mlp, cfg.logistic,
                        derive_seed(cell_seed, 1));
    if (cell.construction == Construction::id_multitarget) {
        const MultiTargetDataset data =
            model.sample_multi(cfg.n_train, cell.m, rng);
        return train(data, mc);
    }
    const SupervisedDataset data = model.sample(cfg.n_train, rng);
    if (cell.construction == Construction::iid_additional
        || cell.construction == Construction::id_additional) {
        Eigen::MatrixXd extra_x, extra_y;
        if (cell.n_x > 0)
            extra_x = model.sample(cell.n_x, rng).X;
        if (cell.n_y > 0)
            extra_y = model.sample(cell.n_y, rng).Y;
        return train(data, MarginalDatasets(std::move(extra_x), std::move(extra_y)),
                     mc);
    }
    return train(data, mc);
}

} // namespace detail

//! Runs one density-model benchmark cell: trains the estimator on a fresh
//! draw, evaluates true and predicted pdfs for n_test feature rows on the
//! shared grid, and returns the estimator's KL row followed by the
//! marginal-only baseline's KL row.
inline std::vector<EvaluationReport>
run_density_cell(const DensityModel& model, const Eigen::VectorXd& grid,
                 const BenchCell& cell, const DensityBenchConfig& cfg,
                 std::uint64_t cell_seed)
{
    const auto started = std::chrono::steady_clock::now();

    const McdEstimator est =
        detail::train_density_cell(model, cell, cfg, cell_seed);

    auto rng_test = make_engine(derive_seed(cell_seed, 2));
    const SupervisedDataset test = model.sample(cfg.n_test, rng_test);

    const Eigen::VectorXd marginal_values = est.marginal().pdf_grid(grid);
    const Eigen::VectorXd baseline_row =
        cfg.rescale ? rescale(marginal_values, grid) : marginal_values;

    Eigen::MatrixXd truth(cfg.n_test, grid.size());
    Eigen::MatrixXd predicted(cfg.n_test, grid.size());
    Eigen::MatrixXd baseline(cfg.n_test, grid.size());
    for (Eigen::Index i = 0; i < cfg.n_test; ++i) {
        const Eigen::RowVectorXd x = test.X.row(i);
        truth.row(i) = model.true_conditional_pdf(x, grid).transpose();
        Eigen::VectorXd row = est.predict_pdf_on_grid(x, grid, marginal_values);
        if (cfg.rescale)
            row = rescale(row, grid);
        predicted.row(i) = row.transpose();
        baseline.row(i) = baseline_row.transpose();
    }

    double kl_est = empirical_kl(truth, predicted);
    double kl_base = empirical_kl(truth, baseline);
    if (cfg.divide_kl_by_n_test()) {
        kl_est /= static_cast<double>(cfg.n_test);
        kl_base /= static_cast<double>(cfg.n_test);
    }

    const double elapsed = cfg.timings
        ? std::chrono::duration<double>(std::chrono::steady_clock::now()
                                        - started)
              .count()
        : 0.0;

    EvaluationReport method_row;
    method_row.method = to_string(cell.method);
    method_row.model = cfg.model;
    method_row.metric = "KL";
    method_row.value = kl_est;
    method_row.n_test = cfg.n_test;
    method_row.grid_size = grid.size();
    method_row.contrast_n = est.contrast_size();
    method_row.ratio = cell.r;
    method_row.seed = cell_seed;
    method_row.wall_time_seconds = elapsed;

    EvaluationReport baseline_report = method_row;
    baseline_report.method = baseline_method_name();
    baseline_report.value = kl_base;
    baseline_report.contrast_n = est.marginal().sample_count();

    return {std::move(method_row), std::move(baseline_report)};
}

//! Runs every configured cell `runs` times against one frozen model and
//! one shared grid.  Cell (c, run j) uses the substream
//! derive_seed(derive_seed(seed, 3), c·runs + j); the model's own
//! coefficients and the pilot grid use separate substreams, so every row
//! is reproducible from the master seed alone.
inline std::vector<EvaluationReport>
run_density_bench(const DensityBenchConfig& cfg)
{
    cfg.validate();
    const auto model = make_model(cfg.model, cfg.p, derive_seed(cfg.seed, 1));
    const Eigen::VectorXd grid = pilot_grid(
        *model, cfg.grid_points, cfg.pilot_draws, derive_seed(cfg.seed, 2));
    const std::uint64_t cells_root = derive_seed(cfg.seed, 3);

    const std::size_t tasks =
        cfg.cells.size() * static_cast<std::size_t>(cfg.runs);
    std::vector<std::vector<EvaluationReport>> slots(tasks);
    detail::run_indexed(tasks, cfg.jobs, [&](std::size_t t) {
        const auto& cell = cfg.cells[t / static_cast<std::size_t>(cfg.runs)];
        slots[t] = run_density_cell(*model, grid, cell, cfg,
                                    derive_seed(cells_root, t));
    });

    std::vector<EvaluationReport> reports;
    reports.reserve(2 * tasks);
    for (auto& slot : slots)
        for (auto& row : slot)
            reports.push_back(std::move(row));
    return reports;
}

//! Settings of one CSV-dataset benchmark run (NLL at held-out pairs).
struct RealBenchConfig
{
    std::string csv_path;
    std::string target_column;
    std::string dataset_name; //!< label in reports (file name by default)
    int runs = 1;
    int jobs = 1;
    bool timings = false;
    double epsilon = 1e-6;
    MlpHyperparams mlp;
    LogisticHyperparams logistic;
    std::vector<BenchCell> cells = {BenchCell{}};
    std::uint64_t seed = 0;

    void validate() const
    {
        if (csv_path.empty())
            throw std::invalid_argument("RealBenchConfig: no CSV path");
        if (target_column.empty())
            throw std::invalid_argument("RealBenchConfig: no target column");
        if (runs < 1 || jobs < 1)
            throw std::invalid_argument(
                "RealBenchConfig: runs and jobs must be at least 1");
        if (cells.empty())
            throw std::invalid_argument(
                "RealBenchConfig: no benchmark cells configured");
        for (const auto& cell : cells) {
            Ratio probe(cell.r);
            (void)probe;
            if (cell.construction == Construction::id_multitarget)
                throw std::invalid_argument(
                    "RealBenchConfig: CSV rows carry one target per "
                    "observation; the multi-target construction does not "
                    "apply");
            if (cell.n_x > 0 || cell.n_y > 0)
                throw std::invalid_argument(
                    "RealBenchConfig: CSV benchmarks have no unpaired "
                    "marginal rows");
        }
    }
};

//! Runs one CSV benchmark cell: splits the standardized rows, trains the
//! cell's estimator on the train part, and evaluates NLL at the held-out
//! (x, y) pairs for the estimator and the marginal-only baseline.
inline std::vector<EvaluationReport>
run_real_cell(const SupervisedDataset& all, const std::string& dataset_name,
              const BenchCell& cell, const RealBenchConfig& cfg,
              std::uint64_t cell_seed)
{
    const auto started = std::chrono::steady_clock::now();

    const SplitIndices split = split_paper(all.n(), derive_seed(cell_seed, 0));
    const auto take = [&all](const std::vector<Eigen::Index>& idx) {
        Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), all.p());
        Eigen::MatrixXd y(static_cast<Eigen::Index>(idx.size()), all.k());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            x.row(static_cast<Eigen::Index>(i)) = all.X.row(idx[i]);
            y.row(static_cast<Eigen::Index>(i)) = all.Y.row(idx[i]);
        }
        return SupervisedDataset(std::move(x), std::move(y));
    };
    const SupervisedDataset train_part = take(split.train);
    const SupervisedDataset test_part = take(split.test);

    const McdConfig mc =
        detail::cell_mcd_config(cell, cfg.epsilon, cfg.mlp, cfg.logistic,
                                derive_seed(cell_seed, 1));
    const McdEstimator est = train(train_part, mc);

    const Eigen::Index n_test = test_part.n();
    Eigen::VectorXd at_truth(n_test);
    Eigen::VectorXd at_truth_baseline(n_test);
    for (Eigen::Index i = 0; i < n_test; ++i) {
        const double y = test_part.Y(i, 0);
        at_truth(i) = est.predict_pointwise(test_part.X.row(i), y);
        at_truth_baseline(i) = est.marginal().pdf(y);
    }

    const double elapsed = cfg.timings
        ? std::chrono::duration<double>(std::chrono::steady_clock::now()
                                        - started)
              .count()
        : 0.0;

    EvaluationReport method_row;
    method_row.method = to_string(cell.method);
    method_row.model = dataset_name;
    method_row.metric = "NLL";
    method_row.value = empirical_nll(at_truth);
    method_row.n_test = n_test;
    method_row.grid_size = 0;
    method_row.contrast_n = est.contrast_size();
    method_row.ratio = cell.r;
    method_row.seed = cell_seed;
    method_row.wall_time_seconds = elapsed;

    EvaluationReport baseline_report = method_row;
    baseline_report.method = baseline_method_name();
    baseline_report.value = empirical_nll(at_truth_baseline);
    baseline_report.contrast_n = est.marginal().sample_count();

    return {std::move(method_row), std::move(baseline_report)};
}

//! Ingests the CSV once, then runs every cell `runs` times with per-cell
//! substreams, exactly like the density bench.
inline std::vector<EvaluationReport> run_real_bench(const RealBenchConfig& cfg)
{
    cfg.validate();
    const IngestResult ingested =
        ingest_csv(cfg.csv_path, cfg.target_column);
    std::string name = cfg.dataset_name;
    if (name.empty()) {
        const auto slash = cfg.csv_path.find_last_of("/\\");
        name = slash == std::string::npos ? cfg.csv_path
                                          : cfg.csv_path.substr(slash + 1);
    }
    const std::uint64_t cells_root = derive_seed(cfg.seed, 3);

    const std::size_t tasks =
        cfg.cells.size() * static_cast<std::size_t>(cfg.runs);
    std::vector<std::vector<EvaluationReport>> slots(tasks);
    detail::run_indexed(tasks, cfg.jobs, [&](std::size_t t) {
        const auto& cell = cfg.cells[t / static_cast<std::size_t>(cfg.runs)];
        slots[t] = run_real_cell(ingested.data, name, cell, cfg,
                                 derive_seed(cells_root, t));
    });

    std::vector<EvaluationReport> reports;
    reports.reserve(2 * tasks);
    for (auto& slot : slots)
        for (auto& row : slot)
            reports.push_back(std::move(row));
    return reports;
}

//! Ablation grid: constructions × ratios (× m values for the multi-target
//! construction), with optional unpaired-row counts for the
//! additional-data constructions.
struct AblationConfig
{
    DensityBenchConfig base; //!< model/protocol settings; cells are ignored
    std::vector<BenchMethod> methods = {BenchMethod::mcd_mlp};
    std::vector<Construction> constructions = {Construction::id};
    std::vector<double> ratios = {0.5};
    std::vector<Eigen::Index> m_values; //!< required for id_multitarget
    Eigen::Index n_x = 0; //!< unpaired feature rows (additional cells)
    Eigen::Index n_y = 0; //!< unpaired target rows (additional cells)
};

//! Expands the ablation grid into benchmark cells, in declaration order
//! (method-major, then construction, ratio, m).
//! @throw std::invalid_argument on an empty axis or an incompatible cell,
//!        e.g. the multi-target construction with no m values.
inline std::vector<BenchCell> ablation_cells(const AblationConfig& cfg)
{
    if (cfg.methods.empty())
        throw std::invalid_argument("ablation: no methods configured");
    if (cfg.constructions.empty())
        throw std::invalid_argument("ablation: no constructions configured");
    if (cfg.ratios.empty())
        throw std::invalid_argument("ablation: no ratios configured");
    std::vector<BenchCell> cells;
    for (const auto method : cfg.methods) {
        for (const auto construction : cfg.constructions) {
            const bool multitarget =
                construction == Construction::id_multitarget;
            if (multitarget && cfg.m_values.empty())
                throw std::invalid_argument(
                    "ablation: the multi-target construction requires "
                    "m_values");
            const bool additional =
                construction == Construction::iid_additional
                || construction == Construction::id_additional;
            for (const double r : cfg.ratios) {
                BenchCell cell;
                cell.method = method;
                cell.construction = construction;
                cell.r = r;
                cell.n_x = additional ? cfg.n_x : 0;
                cell.n_y = additional ? cfg.n_y : 0;
                if (multitarget) {
                    for (const Eigen::Index m : cfg.m_values) {
                        cell.m = m;
                        cells.push_back(cell);
                    }
                } else {
                    cell.m = 1;
                    cells.push_back(cell);
                }
            }
        }
    }
    return cells;
}

//! Runs the expanded ablation grid through the density bench.
inline std::vector<EvaluationReport> run_ablation(const AblationConfig& cfg)
{
    DensityBenchConfig bench = cfg.base;
    bench.cells = ablation_cells(cfg);
    return run_density_bench(bench);
}

//! Output format of emit_tables.
enum class TableFormat { csv, markdown };

inline TableFormat table_format_from_string(const std::string& name)
{
    if (name == "csv")
        return TableFormat::csv;
    if (name == "markdown" || name == "md")
        return TableFormat::markdown;
    throw std::invalid_argument("table_format_from_string: unknown format '"
                                + name + "'; expected csv or markdown");
}

namespace detail {

inline std::string format_human(double v)
{
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6g", v);
    return buffer;
}

} // namespace detail

//! Writes benchmark rows to a file with the fixed column order
//! (method, model, metric, value, N, r, seed, wall_time).  CSV floats
//! carry 17 significant digits so the file re-parses to identical values;
//! markdown is the human-readable mirror of the same table.
//! @throw std::invalid_argument on empty reports.
//! @throw std::runtime_error when the path cannot be written.
inline void emit_tables(const std::vector<EvaluationReport>& reports,
                        const std::string& path, TableFormat format)
{
    if (reports.empty())
        throw std::invalid_argument("emit_tables: no report rows to write");
    const std::vector<std::string> header = {"method", "model", "metric",
                                             "value",  "N",     "r",
                                             "seed",   "wall_time"};
    if (format == TableFormat::csv) {
        std::vector<std::vector<std::string>> rows;
        rows.reserve(reports.size());
        for (const auto& rep : reports)
            rows.push_back({rep.method, rep.model, rep.metric,
                            format_double(rep.value),
                            std::to_string(rep.contrast_n),
                            format_double(rep.ratio),
                            std::to_string(rep.seed),
                            format_double(rep.wall_time_seconds)});
        write_csv(path, header, rows);
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("emit_tables: cannot write '" + path + "'");
    out << "|";
    for (const auto& h : header)
        out << ' ' << h << " |";
    out << "\n|";
    for (std::size_t c = 0; c < header.size(); ++c)
        out << " --- |";
    out << '\n';
    for (const auto& rep : reports) {
        out << "| " << rep.method << " | " << rep.model << " | " << rep.metric
            << " | " << detail::format_human(rep.value) << " | "
            << rep.contrast_n << " | " << detail::format_human(rep.ratio)
            << " | " << rep.seed << " | "
            << detail::format_human(rep.wall_time_seconds) << " |\n";
    }
    if (!out)
        throw std::runtime_error("emit_tables: failed writing '" + path + "'");
}

//! Parses the shared protocol keys of a config section into a density
//! bench configuration (cells are filled by the caller).
inline DensityBenchConfig
density_protocol_from_config(const ConfigFile& file, const std::string& section)
{
    DensityBenchConfig cfg;
    cfg.model = file.get_string(section, "model", cfg.model);
    cfg.p = file.get_int(section, "p", cfg.p);
    cfg.n_train = file.get_int(section, "n_train", cfg.n_train);
    cfg.n_test = file.get_int(section, "n_test", cfg.n_test);
    cfg.grid_points = file.get_int(section, "grid_points", cfg.grid_points);
    cfg.pilot_draws = file.get_int(section, "pilot_draws", cfg.pilot_draws);
    cfg.runs = static_cast<int>(file.get_int(section, "runs", cfg.runs));
    cfg.jobs = static_cast<int>(file.get_int(section, "jobs", cfg.jobs));
    cfg.rescale = file.get_bool(section, "rescale", cfg.rescale);
    cfg.timings = file.get_bool(section, "timings", cfg.timings);
    cfg.epsilon = file.get_double(section, "epsilon", cfg.epsilon);
    cfg.seed = static_cast<std::uint64_t>(
        file.get_int(section, "seed", static_cast<long long>(cfg.seed)));
    const std::string normalization =
        file.get_string(section, "kl_normalization", "auto");
    if (normalization == "auto")
        cfg.kl_normalization = KlNormalization::protocol_default;
    else if (normalization == "raw")
        cfg.kl_normalization = KlNormalization::raw_sum;
    else if (normalization == "per_test")
        cfg.kl_normalization = KlNormalization::per_test_point;
    else
        throw std::runtime_error(
            "config: kl_normalization must be auto, raw or per_test, got '"
            + normalization + "'");
    cfg.mlp.hidden1 = file.get_int(section, "hidden1", cfg.mlp.hidden1);
    cfg.mlp.hidden2 = file.get_int(section, "hidden2", cfg.mlp.hidden2);
    cfg.mlp.learning_rate =
        file.get_double(section, "learning_rate", cfg.mlp.learning_rate);
    cfg.mlp.epochs =
        static_cast<int>(file.get_int(section, "epochs", cfg.mlp.epochs));
    cfg.mlp.batch = file.get_int(section, "batch", cfg.mlp.batch);
    cfg.logistic.l1 = file.get_double(section, "l1", cfg.logistic.l1);
    cfg.logistic.l2 = file.get_double(section, "l2", cfg.logistic.l2);
    cfg.logistic.max_iters = static_cast<int>(
        file.get_int(section, "max_iters", cfg.logistic.max_iters));
    cfg.logistic.grad_tol =
        file.get_double(section, "grad_tol", cfg.logistic.grad_tol);
    return cfg;
}

namespace detail {

inline std::vector<BenchMethod>
methods_from_config(const ConfigFile& file, const std::string& section)
{
    std::vector<BenchMethod> methods;
    for (const auto& name : file.get_string_list(section, "methods"))
        methods.push_back(bench_method_from_string(name));
    if (methods.empty())
        methods.push_back(bench_method_from_string(
            file.get_string(section, "method", "mcd_mlp")));
    return methods;
}

} // namespace detail

//! Builds the bench-density configuration from a config file: protocol
//! keys plus one cell per requested method, all sharing the `construction`,
//! `ratio`, `m`, `n_x`, `n_y` keys.
inline DensityBenchConfig
density_bench_from_config(const ConfigFile& file,
                          const std::string& section = "bench-density")
{
    DensityBenchConfig cfg = density_protocol_from_config(file, section);
    BenchCell cell;
    cell.construction = construction_from_string(
        file.get_string(section, "construction", "id"));
    cell.r = file.get_double(section, "ratio", cell.r);
    cell.m = file.get_int(section, "m", cell.m);
    cell.n_x = file.get_int(section, "n_x", cell.n_x);
    cell.n_y = file.get_int(section, "n_y", cell.n_y);
    cfg.cells.clear();
    for (const auto method : detail::methods_from_config(file, section)) {
        cell.method = method;
        cfg.cells.push_back(cell);
    }
    return cfg;
}

//! Builds the bench-real configuration from a config file.
inline RealBenchConfig
real_bench_from_config(const ConfigFile& file,
                       const std::string& section = "bench-real")
{
    RealBenchConfig cfg;
    cfg.csv_path = file.require_string(section, "data");
    cfg.target_column = file.require_string(section, "target");
    cfg.dataset_name = file.get_string(section, "dataset_name", "");
    cfg.runs = static_cast<int>(file.get_int(section, "runs", cfg.runs));
    cfg.jobs = static_cast<int>(file.get_int(section, "jobs", cfg.jobs));
    cfg.timings = file.get_bool(section, "timings", cfg.timings);
    cfg.epsilon = file.get_double(section, "epsilon", cfg.epsilon);
    cfg.seed = static_cast<std::uint64_t>(
        file.get_int(section, "seed", static_cast<long long>(cfg.seed)));
    cfg.mlp.hidden1 = file.get_int(section, "hidden1", cfg.mlp.hidden1);
    cfg.mlp.hidden2 = file.get_int(section, "hidden2", cfg.mlp.hidden2);
    cfg.mlp.learning_rate =
        file.get_double(section, "learning_rate", cfg.mlp.learning_rate);
    cfg.mlp.epochs =
        static_cast<int>(file.get_int(section, "epochs", cfg.mlp.epochs));
    cfg.mlp.batch = file.get_int(section, "batch", cfg.mlp.batch);
    cfg.logistic.l1 = file.get_double(section, "l1", cfg.logistic.l1);
    cfg.logistic.l2 = file.get_double(section, "l2", cfg.logistic.l2);
    cfg.logistic.max_iters = static_cast<int>(
        file.get_int(section, "max_iters", cfg.logistic.max_iters));
    cfg.logistic.grad_tol =
        file.get_double(section, "grad_tol", cfg.logistic.grad_tol);
    BenchCell cell;
    cell.construction = construction_from_string(
        file.get_string(section, "construction", "id"));
    cell.r = file.get_double(section, "ratio", cell.r);
    cfg.cells.clear();
    for (const auto method : detail::methods_from_config(file, section)) {
        cell.method = method;
        cfg.cells.push_back(cell);
    }
    return cfg;
}

//! Builds the ablation configuration from a config file: the protocol keys
//! plus the grid axes `constructions`, `ratios`, `m_values`, `n_x`, `n_y`.
inline AblationConfig
ablation_from_config(const ConfigFile& file,
                     const std::string& section = "ablation")
{
    AblationConfig cfg;
    cfg.base = density_protocol_from_config(file, section);
    cfg.methods = detail::methods_from_config(file, section);
    cfg.constructions.clear();
    for (const auto& name : file.get_string_list(section, "constructions"))
        cfg.constructions.push_back(construction_from_string(name));
    if (cfg.constructions.empty())
        cfg.constructions.push_back(construction_from_string(
            file.get_string(section, "construction", "id")));
    cfg.ratios = file.get_double_list(section, "ratios");
    if (cfg.ratios.empty())
        cfg.ratios.push_back(file.get_double(section, "ratio", 0.5));
    for (const double m : file.get_double_list(section, "m_values"))
        cfg.m_values.push_back(static_cast<Eigen::Index>(m));
    cfg.n_x = file.get_int(section, "n_x", 0);
    cfg.n_y = file.get_int(section, "n_y", 0);
    return cfg;
}

} // namespace mcd
