//! Command-line front end: dataset simulation, estimator training and
//! prediction, density-model and CSV benchmarks, and ablation grids.
//! Modes read their settings from a flat key=value config file (one
//! `[section]` per mode) with command-line flags overriding, and the
//! MCD_SEED environment variable overriding every other seed source.

#include <CLI11.hpp>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mcd/bench.hpp"
#include "mcd/config.hpp"
#include "mcd/csv.hpp"
#include "mcd/estimator.hpp"
#include "mcd/models.hpp"
#include "mcd/serialize.hpp"

namespace {

std::optional<std::uint64_t> env_seed()
{
    const char* raw = std::getenv("MCD_SEED");
    if (!raw || !*raw)
        return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (*end != '\0' || errno == ERANGE)
        throw std::runtime_error(
            "MCD_SEED must be an unsigned integer, got '" + std::string(raw)
            + "'");
    return static_cast<std::uint64_t>(v);
}

mcd::ConfigFile load_config(const std::string& path)
{
    if (path.empty())
        return mcd::ConfigFile{};
    return mcd::ConfigFile::parse_file(path);
}

std::vector<double> parse_number_list(const std::string& text)
{
    std::vector<double> values;
    std::string::size_type start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string::npos)
            comma = text.size();
        const std::string item = text.substr(start, comma - start);
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || end != item.c_str() + item.size()
            || errno == ERANGE)
            throw std::runtime_error("expected a comma-separated number list, "
                                     "got '" + text + "'");
        values.push_back(v);
        start = comma + 1;
    }
    return values;
}

//! Mode settings shared by the three benchmark subcommands.
struct BenchFlags
{
    std::string config_path;
    std::string out;
    std::string format = "csv";
    std::int64_t seed = 0;
    std::int64_t grid_points = 0;
    std::int64_t jobs = 0;
    bool rescale = false;
    bool timings = false;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* grid_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;

    void attach(CLI::App& sub, bool with_grid)
    {
        sub.add_option("--config", config_path, "key=value config file");
        sub.add_option("--out", out, "output table path")->required();
        sub.add_option("--format", format, "table format: csv or markdown")
            ->check(CLI::IsMember({"csv", "markdown", "md"}));
        seed_opt = sub.add_option("--seed", seed, "master seed (u64)");
        jobs_opt = sub.add_option("--jobs", jobs, "worker threads");
        sub.add_flag("--timings", timings,
                     "record wall times (off keeps outputs byte-stable)");
        if (with_grid) {
            grid_opt =
                sub.add_option("--grid-points", grid_points, "grid length");
            sub.add_flag("--rescale", rescale,
                         "renormalize predicted pdfs on the grid");
        }
    }

    void apply(mcd::DensityBenchConfig& cfg) const
    {
        if (seed_opt && seed_opt->count() > 0)
            cfg.seed = static_cast<std::uint64_t>(seed);
        if (grid_opt && grid_opt->count() > 0)
            cfg.grid_points = grid_points;
        if (jobs_opt && jobs_opt->count() > 0)
            cfg.jobs = static_cast<int>(jobs);
        if (rescale)
            cfg.rescale = true;
        if (timings)
            cfg.timings = true;
        if (const auto forced = env_seed())
            cfg.seed = *forced;
    }

    void apply(mcd::RealBenchConfig& cfg) const
    {
        if (seed_opt && seed_opt->count() > 0)
            cfg.seed = static_cast<std::uint64_t>(seed);
        if (jobs_opt && jobs_opt->count() > 0)
            cfg.jobs = static_cast<int>(jobs);
        if (timings)
            cfg.timings = true;
        if (const auto forced = env_seed())
            cfg.seed = *forced;
    }

    void emit(const std::vector<mcd::EvaluationReport>& reports) const
    {
        mcd::emit_tables(reports, out, mcd::table_format_from_string(format));
        std::cout << "wrote " << reports.size() << " rows to " << out << "\n";
    }
};

int run_simulate(const std::string& model_name, std::int64_t p, std::int64_t n,
                 std::int64_t m, std::uint64_t seed, const std::string& out)
{
    const auto model =
        mcd::make_model(model_name, p, mcd::derive_seed(seed, 1));
    auto rng = mcd::make_engine(mcd::derive_seed(seed, 0));

    std::vector<std::string> header;
    for (std::int64_t j = 1; j <= p; ++j)
        header.push_back("x_" + std::to_string(j));
    std::vector<std::vector<std::string>> rows;
    if (m <= 1) {
        header.push_back("y");
        const mcd::SupervisedDataset data = model->sample(n, rng);
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            std::vector<std::string> row;
            for (Eigen::Index c = 0; c < data.p(); ++c)
                row.push_back(mcd::format_double(data.X(i, c)));
            row.push_back(mcd::format_double(data.Y(i, 0)));
            rows.push_back(std::move(row));
        }
    } else {
        for (std::int64_t j = 1; j <= m; ++j)
            header.push_back("y_" + std::to_string(j));
        const mcd::MultiTargetDataset data = model->sample_multi(n, m, rng);
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            std::vector<std::string> row;
            for (Eigen::Index c = 0; c < data.X.cols(); ++c)
                row.push_back(mcd::format_double(data.X(i, c)));
            for (Eigen::Index c = 0; c < data.m(); ++c)
                row.push_back(mcd::format_double(data.Y(i, c)));
            rows.push_back(std::move(row));
        }
    }
    mcd::write_csv(out, header, rows);
    std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
    return 0;
}

mcd::McdConfig train_config(const mcd::ConfigFile& file,
                            const std::string& section)
{
    mcd::McdConfig cfg;
    cfg.construction = mcd::construction_from_string(
        file.get_string(section, "construction", "id"));
    cfg.r = mcd::Ratio(file.get_double(section, "ratio", 0.5));
    cfg.epsilon = file.get_double(section, "epsilon", cfg.epsilon);
    cfg.seed = static_cast<std::uint64_t>(file.get_int(section, "seed", 0));
    const std::string method =
        file.get_string(section, "method", "mcd_mlp");
    cfg.discriminator.kind = mcd::bench_method_from_string(method)
            == mcd::BenchMethod::mcd_logistic
        ? mcd::DiscriminatorKind::logistic_elasticnet
        : mcd::DiscriminatorKind::mlp;
    cfg.discriminator.mlp.hidden1 =
        file.get_int(section, "hidden1", cfg.discriminator.mlp.hidden1);
    cfg.discriminator.mlp.hidden2 =
        file.get_int(section, "hidden2", cfg.discriminator.mlp.hidden2);
    cfg.discriminator.mlp.learning_rate = file.get_double(
        section, "learning_rate", cfg.discriminator.mlp.learning_rate);
    cfg.discriminator.mlp.epochs = static_cast<int>(
        file.get_int(section, "epochs", cfg.discriminator.mlp.epochs));
    cfg.discriminator.mlp.batch =
        file.get_int(section, "batch", cfg.discriminator.mlp.batch);
    cfg.discriminator.logistic.l1 =
        file.get_double(section, "l1", cfg.discriminator.logistic.l1);
    cfg.discriminator.logistic.l2 =
        file.get_double(section, "l2", cfg.discriminator.logistic.l2);
    cfg.discriminator.logistic.max_iters = static_cast<int>(file.get_int(
        section, "max_iters", cfg.discriminator.logistic.max_iters));
    cfg.discriminator.logistic.grad_tol = file.get_double(
        section, "grad_tol", cfg.discriminator.logistic.grad_tol);
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Conditional density estimation by marginal contrastive "
                 "discrimination"};
    app.require_subcommand(1);

    // --- simulate ---
    auto* simulate = app.add_subcommand(
        "simulate", "Draw a dataset from a synthetic density model");
    std::string sim_model = "basic_linear";
    std::int64_t sim_p = 10, sim_n = 200, sim_m = 1;
    std::int64_t sim_seed = 0;
    std::string sim_out;
    simulate->add_option("--model", sim_model, "density model name");
    simulate->add_option("--p", sim_p, "feature dimension");
    simulate->add_option("--n", sim_n, "observations to draw");
    simulate->add_option("--m", sim_m, "target draws per observation");
    simulate->add_option("--seed", sim_seed, "master seed (u64)");
    simulate->add_option("--out", sim_out, "output CSV path")->required();

    // --- train ---
    auto* train_cmd = app.add_subcommand(
        "train", "Train an estimator on a CSV dataset and save it as JSON");
    std::string train_data, train_target = "y", train_out;
    std::string train_config_path;
    std::int64_t train_seed = 0;
    std::string train_construction, train_method;
    double train_ratio = -1.0;
    train_cmd->add_option("--data", train_data, "input CSV path")->required();
    train_cmd->add_option("--target", train_target,
                          "target column name or zero-based index");
    train_cmd->add_option("--out", train_out, "output model JSON path")
        ->required();
    train_cmd->add_option("--config", train_config_path,
                          "key=value config file ([train] section)");
    auto* train_seed_opt =
        train_cmd->add_option("--seed", train_seed, "master seed (u64)");
    train_cmd->add_option("--construction", train_construction,
                          "contrast construction name");
    train_cmd->add_option("--ratio", train_ratio,
                          "matched-pair ratio r in (0, 1)");
    train_cmd->add_option("--method", train_method,
                          "mcd_mlp or mcd_logistic");

    // --- predict ---
    auto* predict = app.add_subcommand(
        "predict", "Evaluate a saved estimator's conditional density");
    std::string pred_model_file, pred_x_text, pred_out;
    double pred_y = 0.0;
    std::int64_t pred_grid_points = 512;
    bool pred_rescale = false;
    predict->add_option("--model-file", pred_model_file,
                        "saved estimator JSON")
        ->required();
    predict->add_option("--x", pred_x_text,
                        "feature row, comma-separated (raw units when the "
                        "model was trained through `train`)")
        ->required();
    auto* pred_y_opt = predict->add_option(
        "--y", pred_y, "single target value; prints one density");
    predict->add_option("--out", pred_out,
                        "output CSV path (stdout when omitted)");
    predict->add_option("--grid-points", pred_grid_points,
                        "grid length for the density curve");
    predict->add_flag("--rescale", pred_rescale,
                      "renormalize the density curve on the grid");

    // --- benchmarks ---
    auto* bench_density = app.add_subcommand(
        "bench-density", "KL benchmark on a synthetic density model");
    BenchFlags density_flags;
    density_flags.attach(*bench_density, /*with_grid=*/true);

    auto* bench_real = app.add_subcommand(
        "bench-real", "NLL benchmark on a CSV dataset");
    BenchFlags real_flags;
    real_flags.attach(*bench_real, /*with_grid=*/false);

    auto* ablation = app.add_subcommand(
        "ablation", "Construction/ratio ablation grid on a density model");
    BenchFlags ablation_flags;
    ablation_flags.attach(*ablation, /*with_grid=*/true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            std::uint64_t seed = static_cast<std::uint64_t>(sim_seed);
            if (const auto forced = env_seed())
                seed = *forced;
            return run_simulate(sim_model, sim_p, sim_n, sim_m, seed, sim_out);
        }

        if (train_cmd->parsed()) {
            const mcd::ConfigFile file = load_config(train_config_path);
            mcd::McdConfig cfg = train_config(file, "train");
            if (train_seed_opt->count() > 0)
                cfg.seed = static_cast<std::uint64_t>(train_seed);
            if (!train_construction.empty())
                cfg.construction =
                    mcd::construction_from_string(train_construction);
            if (train_ratio >= 0.0)
                cfg.r = mcd::Ratio(train_ratio);
            if (!train_method.empty())
                cfg.discriminator.kind =
                    mcd::bench_method_from_string(train_method)
                        == mcd::BenchMethod::mcd_logistic
                    ? mcd::DiscriminatorKind::logistic_elasticnet
                    : mcd::DiscriminatorKind::mlp;
            if (const auto forced = env_seed())
                cfg.seed = *forced;

            const mcd::IngestResult ingested =
                mcd::ingest_csv(train_data, train_target);
            const mcd::McdEstimator est = mcd::train(ingested.data, cfg);

            nlohmann::json j = mcd::estimator_to_json(est);
            j["ingest"] = {
                {"mean", mcd::detail::rowvector_to_json(ingested.record.mean)},
                {"scale",
                 mcd::detail::rowvector_to_json(ingested.record.scale)},
                {"feature_names", ingested.feature_names},
                {"target_name", ingested.target_name},
            };
            std::ofstream out_file(train_out);
            if (!out_file)
                throw std::runtime_error("train: cannot write '" + train_out
                                         + "'");
            out_file << j.dump(2) << '\n';
            std::cout << "trained on " << ingested.data.n() << " rows"
                      << ", contrast size " << est.contrast_size()
                      << ", plug-in ratio " << est.ratio() << ", saved to "
                      << train_out << "\n";
            return 0;
        }

        if (predict->parsed()) {
            std::ifstream in(pred_model_file);
            if (!in)
                throw std::runtime_error("predict: cannot open '"
                                         + pred_model_file + "'");
            nlohmann::json j;
            in >> j;
            const mcd::McdEstimator est = mcd::estimator_from_json(j);

            const std::vector<double> x_values =
                parse_number_list(pred_x_text);
            if (static_cast<Eigen::Index>(x_values.size())
                != est.feature_dim())
                throw std::runtime_error(
                    "predict: --x has " + std::to_string(x_values.size())
                    + " values but the model expects "
                    + std::to_string(est.feature_dim()));
            Eigen::RowVectorXd x(est.feature_dim());
            for (Eigen::Index i = 0; i < x.size(); ++i)
                x(i) = x_values[static_cast<std::size_t>(i)];

            // Models trained through `train` carry the ingest record; map
            // raw-unit inputs into the standardized space and densities
            // back out (divide by the target's scale).
            double y_mean = 0.0, y_scale = 1.0;
            if (j.contains("ingest")) {
                const Eigen::RowVectorXd mean =
                    mcd::detail::rowvector_from_json(j["ingest"]["mean"]);
                const Eigen::RowVectorXd scale =
                    mcd::detail::rowvector_from_json(j["ingest"]["scale"]);
                if (mean.size() != est.feature_dim() + 1)
                    throw std::runtime_error(
                        "predict: ingest record width does not match the "
                        "model");
                for (Eigen::Index i = 0; i < x.size(); ++i)
                    x(i) = (x(i) - mean(i)) / scale(i);
                y_mean = mean(mean.size() - 1);
                y_scale = scale(scale.size() - 1);
            }

            if (pred_y_opt->count() > 0) {
                const double y_std = (pred_y - y_mean) / y_scale;
                const double density =
                    est.predict_pointwise(x, y_std) / y_scale;
                std::cout << mcd::format_double(density) << "\n";
                return 0;
            }

            const Eigen::VectorXd grid = est.default_grid(pred_grid_points);
            Eigen::VectorXd pdf = est.predict_pdf_on_grid(x, grid);
            if (pred_rescale)
                pdf = mcd::rescale(pdf, grid);
            std::vector<std::vector<std::string>> rows;
            for (Eigen::Index i = 0; i < grid.size(); ++i)
                rows.push_back(
                    {mcd::format_double(grid(i) * y_scale + y_mean),
                     mcd::format_double(pdf(i) / y_scale)});
            if (pred_out.empty()) {
                std::cout << "y,density\n";
                for (const auto& row : rows)
                    std::cout << row[0] << ',' << row[1] << "\n";
            } else {
                mcd::write_csv(pred_out, {"y", "density"}, rows);
                std::cout << "wrote " << rows.size() << " rows to "
                          << pred_out << "\n";
            }
            return 0;
        }

        if (bench_density->parsed()) {
            const mcd::ConfigFile file =
                load_config(density_flags.config_path);
            mcd::DensityBenchConfig cfg =
                mcd::density_bench_from_config(file);
            density_flags.apply(cfg);
            density_flags.emit(mcd::run_density_bench(cfg));
            return 0;
        }

        if (bench_real->parsed()) {
            const mcd::ConfigFile file = load_config(real_flags.config_path);
            mcd::RealBenchConfig cfg = mcd::real_bench_from_config(file);
            real_flags.apply(cfg);
            real_flags.emit(mcd::run_real_bench(cfg));
            return 0;
        }

        if (ablation->parsed()) {
            const mcd::ConfigFile file =
                load_config(ablation_flags.config_path);
            mcd::AblationConfig cfg = mcd::ablation_from_config(file);
            ablation_flags.apply(cfg.base);
            ablation_flags.emit(mcd::run_ablation(cfg));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    std::cerr << "error: no subcommand selected\n";
    return 1;
}
