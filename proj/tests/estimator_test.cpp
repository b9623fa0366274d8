#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "mcd/estimator.hpp"
#include "mcd/models.hpp"
#include "mcd/random.hpp"

using namespace mcd;

namespace {

//! Discriminator returning a fixed probability regardless of the input;
//! lets the plug-in arithmetic be tested in isolation.
class StubDiscriminator : public Discriminator
{
public:
    StubDiscriminator(Eigen::Index width, double value)
        : Discriminator(DiscriminatorKind::mlp, width, identity(width))
        , value_(value)
    {
    }

    static Standardization identity(Eigen::Index width)
    {
        Standardization s;
        s.mean = Eigen::RowVectorXd::Zero(width);
        s.scale = Eigen::RowVectorXd::Ones(width);
        return s;
    }

protected:
    Eigen::VectorXd
    predict_standardized(const Eigen::MatrixXd& w_std) const override
    {
        return Eigen::VectorXd::Constant(w_std.rows(), value_);
    }

private:
    double value_;
};

McdEstimator stub_estimator(double q_value, double r, double epsilon = 1e-6)
{
    Eigen::VectorXd samples(5);
    samples << -1.2, -0.3, 0.1, 0.8, 1.9;
    return McdEstimator(MarginalDensityModel(samples),
                        std::make_shared<StubDiscriminator>(3, q_value),
                        Ratio(r), epsilon);
}

SupervisedDataset gaussian_pairs(Eigen::Index n, double rho,
                                 std::uint64_t seed)
{
    const BivariateGaussOracle oracle(rho);
    auto rng = make_engine(seed);
    return oracle.sample(n, rng);
}

} // namespace

TEST_CASE("config validation pins epsilon inside (0, 1/2)", "[estimator]")
{
    McdConfig cfg;
    REQUIRE_NOTHROW(cfg.validate());
    cfg.epsilon = 0.0;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.epsilon = 0.5;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.epsilon = 0.499;
    REQUIRE_NOTHROW(cfg.validate());
    cfg.discriminator.mlp.learning_rate = -1.0;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("construction names round-trip", "[estimator]")
{
    for (auto c : {Construction::iid, Construction::id,
                   Construction::iid_additional, Construction::id_additional,
                   Construction::id_multitarget})
        REQUIRE(construction_from_string(to_string(c)) == c);
    REQUIRE_THROWS_WITH(construction_from_string("idd"),
                        Catch::Matchers::ContainsSubstring("id_multitarget"));
}

TEST_CASE("stubbed ratio prediction returns the marginal density",
          "[estimator]")
{
    // With q identically r the contrast carries no information and the
    // plug-in collapses to the marginal.
    const double r = 0.3;
    const auto est = stub_estimator(r, r);
    Eigen::RowVectorXd x(2);
    x << 0.4, -1.0;
    for (double y : {-0.9, 0.0, 1.4})
        REQUIRE_THAT(est.predict_pointwise(x, y),
                     Catch::Matchers::WithinRel(est.marginal().pdf(y), 1e-12));
}

TEST_CASE("saturated discriminator stays finite through the threshold",
          "[estimator]")
{
    const double r = 0.25;
    const double eps = 1e-6;
    const auto est = stub_estimator(1.0, r, eps);
    Eigen::RowVectorXd x(2);
    x << 0.0, 0.0;
    const double y = 0.2;
    const double expected = est.marginal().pdf(y) * ((1.0 - eps) / eps)
        * ((1.0 - r) / r);
    const double got = est.predict_pointwise(x, y);
    REQUIRE(std::isfinite(got));
    // 1 - (1 - eps) re-quantizes eps near 1e-6, so the comparison is loose
    // at the order of that rounding (~3e-11 relative), not 1e-12.
    REQUIRE_THAT(got, Catch::Matchers::WithinRel(expected, 1e-9));

    // q = 0 is the other adversarial extreme: density exactly 0.
    const auto zero = stub_estimator(0.0, r, eps);
    REQUIRE(zero.predict_pointwise(x, y) == 0.0);
}

TEST_CASE("threshold only binds above 1 - epsilon", "[estimator]")
{
    const double r = 0.4;
    const double q = 0.9; // far below 1 - epsilon
    const auto est = stub_estimator(q, r);
    Eigen::RowVectorXd x(2);
    x << 1.0, 2.0;
    const double y = -0.5;
    const double untouched =
        est.marginal().pdf(y) * (q / (1.0 - q)) * ((1.0 - r) / r);
    REQUIRE(est.predict_pointwise(x, y) == untouched); // bitwise equal
}

TEST_CASE("grid prediction matches the pointwise path and validates input",
          "[estimator]")
{
    const auto est = stub_estimator(0.7, 0.2);
    Eigen::RowVectorXd x(2);
    x << 0.3, 0.9;
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(10000, -3.0, 3.0);
    const Eigen::VectorXd pdf = est.predict_pdf_on_grid(x, grid);
    REQUIRE(pdf.size() == 10000);
    for (Eigen::Index i : {0L, 123L, 5000L, 9999L})
        REQUIRE_THAT(pdf(i),
                     Catch::Matchers::WithinRel(
                         est.predict_pointwise(x, grid(i)), 1e-12));

    // Precomputed marginal values give the identical result.
    const Eigen::VectorXd marg = est.marginal().pdf_grid(grid);
    REQUIRE(est.predict_pdf_on_grid(x, grid, marg) == pdf);

    Eigen::VectorXd unsorted(3);
    unsorted << 0.0, 2.0, 1.0;
    REQUIRE_THROWS_WITH(est.predict_pdf_on_grid(x, unsorted),
                        Catch::Matchers::ContainsSubstring("increasing"));
    Eigen::VectorXd one(1);
    one << 0.0;
    REQUIRE_THROWS_AS(est.predict_pdf_on_grid(x, one), std::invalid_argument);
    REQUIRE_THROWS_AS(est.predict_pdf_on_grid(x, grid, marg.head(10)),
                      std::invalid_argument);
}

TEST_CASE("predictions on random stub estimators are finite and nonnegative",
          "[estimator]")
{
    auto rng = make_engine(909);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::VectorXd samples(8);
        for (Eigen::Index i = 0; i < samples.size(); ++i)
            samples(i) = 3.0 * gauss(rng);
        // Hit the extremes q = 0 and q = 1 regularly.
        const double q = trial % 10 == 0 ? 1.0
            : trial % 10 == 1            ? 0.0
                                         : unif(rng);
        const double r = 0.05 + 0.9 * unif(rng);
        McdEstimator est(MarginalDensityModel(samples),
                         std::make_shared<StubDiscriminator>(2, q), Ratio(r),
                         1e-6);
        Eigen::RowVectorXd x(1);
        x << gauss(rng);
        Eigen::VectorXd grid(16);
        double at = -4.0 + unif(rng);
        for (Eigen::Index i = 0; i < 16; ++i) {
            grid(i) = at;
            at += 0.01 + unif(rng);
        }
        const Eigen::VectorXd pdf = est.predict_pdf_on_grid(x, grid);
        for (Eigen::Index i = 0; i < pdf.size(); ++i) {
            REQUIRE(std::isfinite(pdf(i)));
            REQUIRE(pdf(i) >= 0.0);
        }
    }
}

TEST_CASE("rescale normalizes by the trapezoidal integral", "[estimator]")
{
    // Uniform values over a span of length L become 1/L.
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(11, 2.0, 7.0);
    const Eigen::VectorXd flat = Eigen::VectorXd::Constant(11, 3.7);
    const Eigen::VectorXd scaled = rescale(flat, grid);
    for (Eigen::Index i = 0; i < scaled.size(); ++i)
        REQUIRE_THAT(scaled(i), Catch::Matchers::WithinRel(1.0 / 5.0, 1e-12));

    // A triangle of height 2 over [0, 2] has area 2.
    Eigen::VectorXd tri_grid(3);
    tri_grid << 0.0, 1.0, 2.0;
    Eigen::VectorXd tri(3);
    tri << 0.0, 2.0, 0.0;
    const Eigen::VectorXd tri_scaled = rescale(tri, tri_grid);
    REQUIRE(tri_scaled(0) == 0.0);
    REQUIRE_THAT(tri_scaled(1), Catch::Matchers::WithinRel(1.0, 1e-15));
    REQUIRE(tri_scaled(2) == 0.0);

    // An already-normalized standard normal changes by less than 1e-4.
    const Eigen::VectorXd wide = Eigen::VectorXd::LinSpaced(10000, -5.0, 5.0);
    Eigen::VectorXd normal(10000);
    for (Eigen::Index i = 0; i < 10000; ++i)
        normal(i) = std::exp(-0.5 * wide(i) * wide(i))
            / std::sqrt(2.0 * M_PI);
    const Eigen::VectorXd renorm = rescale(normal, wide);
    REQUIRE_THAT(renorm(5000) / normal(5000),
                 Catch::Matchers::WithinAbs(1.0, 1e-4));

    // Idempotence and exact trapezoidal mass after rescaling.
    auto rng = make_engine(12);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd values(200);
    for (Eigen::Index i = 0; i < 200; ++i)
        values(i) = unif(rng);
    const Eigen::VectorXd g200 = Eigen::VectorXd::LinSpaced(200, -1.0, 4.0);
    const Eigen::VectorXd once = rescale(values, g200);
    const Eigen::VectorXd twice = rescale(once, g200);
    for (Eigen::Index i = 0; i < 200; ++i)
        REQUIRE_THAT(twice(i), Catch::Matchers::WithinRel(once(i), 1e-12));
    double mass = 0.0;
    for (Eigen::Index i = 0; i + 1 < 200; ++i)
        mass += 0.5 * (once(i) + once(i + 1)) * (g200(i + 1) - g200(i));
    REQUIRE_THAT(mass, Catch::Matchers::WithinAbs(1.0, 1e-12));

    // Degenerate all-zero input names the failure.
    REQUIRE_THROWS_WITH(rescale(Eigen::VectorXd::Zero(3), tri_grid),
                        Catch::Matchers::ContainsSubstring("degenerate"));
    REQUIRE_THROWS_AS(rescale(tri, g200), std::invalid_argument);
}

TEST_CASE("default grid spans the marginal's central quantile range",
          "[estimator]")
{
    auto rng = make_engine(5);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd samples(4000);
    // Symmetric sample: +/- pairs about zero.
    for (Eigen::Index i = 0; i < 2000; ++i) {
        samples(2 * i) = gauss(rng);
        samples(2 * i + 1) = -samples(2 * i);
    }
    McdEstimator est(MarginalDensityModel(samples),
                     std::make_shared<StubDiscriminator>(2, 0.5), Ratio(0.5),
                     1e-6);

    const Eigen::VectorXd two = est.default_grid(2);
    REQUIRE(two.size() == 2);
    REQUIRE(two(0) == est.marginal().quantile(0.001));
    REQUIRE(two(1) == est.marginal().quantile(0.999));

    const Eigen::VectorXd grid = est.default_grid(501);
    const double step = grid(1) - grid(0);
    for (Eigen::Index i = 0; i + 1 < grid.size(); ++i)
        REQUIRE_THAT(grid(i + 1) - grid(i),
                     Catch::Matchers::WithinRel(step, 1e-12));
    // Symmetric samples give a grid symmetric about zero (up to the
    // quantile bisection tolerance).
    REQUIRE_THAT(grid(0) + grid(grid.size() - 1),
                 Catch::Matchers::WithinAbs(0.0, 1e-6));

    REQUIRE_THROWS_AS(est.default_grid(1), std::invalid_argument);
}

TEST_CASE("training picks the announced contrast sizes", "[estimator]")
{
    const auto data = gaussian_pairs(100, 0.8, 1);

    // Index-grid construction at r = 0.05 keeps all 100 matched rows and
    // realizes a contrast set of 100/0.05 = 2000.
    McdConfig cfg;
    cfg.r = Ratio(0.05);
    cfg.construction = Construction::id;
    cfg.discriminator.mlp.epochs = 1;
    cfg.seed = 7;
    const auto est = train(data, cfg);
    REQUIRE(est.contrast_size() == 2000);
    REQUIRE(est.contrast_joint() == 100);
    // Plug-in ratio is the realized one for index-grid constructions.
    REQUIRE(est.ratio() == 100.0 / 2000.0);

    // Feature-substitution construction with n_x = 100 extra feature rows
    // and no extra targets: contrast size n_x = 100.
    auto rng = make_engine(2);
    const BivariateGaussOracle oracle(0.8);
    const auto pool = oracle.sample(100, rng);
    const MarginalDatasets extra(pool.X, Eigen::MatrixXd());
    McdConfig cfg3;
    cfg3.r = Ratio(0.5);
    cfg3.construction = Construction::iid_additional;
    cfg3.discriminator.mlp.epochs = 1;
    cfg3.seed = 8;
    const auto est3 = train(data, extra, cfg3);
    REQUIRE(est3.contrast_size() == 100);
    // Bernoulli-family constructions keep the nominal plug-in ratio.
    REQUIRE(est3.ratio() == 0.5);

    // Multi-target construction: n = 100, m = 2, r = 0.5 doubles the
    // matched grid to 200 and adds 200 mismatched rows.
    auto rng_m = make_engine(3);
    const auto multi = oracle.sample_multi(100, 2, rng_m);
    McdConfig cfg_m;
    cfg_m.r = Ratio(0.5);
    cfg_m.construction = Construction::id_multitarget;
    cfg_m.discriminator.mlp.epochs = 1;
    cfg_m.seed = 9;
    const auto est_m = train(multi, cfg_m);
    REQUIRE(est_m.contrast_size() == 400);
    REQUIRE(est_m.contrast_joint() == 200);

    // The marginal KDE sees every target value: n + n_y rows for the
    // additional construction, n * m for the multi-target one.
    REQUIRE(est.marginal().sample_count() == 100);
    const MarginalDatasets extra_y(Eigen::MatrixXd(),
                                   pool.Y.topRows(37));
    const auto est_y = train(data, extra_y, cfg);
    REQUIRE(est_y.marginal().sample_count() == 137);
    REQUIRE(est_m.marginal().sample_count() == 200);
}

TEST_CASE("incompatible construction and data pairings are rejected",
          "[estimator]")
{
    const auto data = gaussian_pairs(50, 0.5, 4);
    McdConfig cfg;
    cfg.construction = Construction::iid_additional;
    REQUIRE_THROWS_WITH(train(data, cfg),
                        Catch::Matchers::ContainsSubstring("MarginalDatasets"));
    cfg.construction = Construction::id_multitarget;
    REQUIRE_THROWS_WITH(train(data, cfg),
                        Catch::Matchers::ContainsSubstring("multi-target"));

    const BivariateGaussOracle oracle(0.5);
    auto rng = make_engine(6);
    const auto multi = oracle.sample_multi(20, 3, rng);
    cfg.construction = Construction::id;
    REQUIRE_THROWS_AS(train(multi, cfg), std::invalid_argument);

    // Vector-valued targets cannot feed the scalar marginal KDE.
    const SupervisedDataset wide(Eigen::MatrixXd::Random(10, 2),
                                 Eigen::MatrixXd::Random(10, 2));
    cfg.construction = Construction::iid;
    REQUIRE_THROWS_WITH(train(wide, cfg),
                        Catch::Matchers::ContainsSubstring("scalar target"));
}

TEST_CASE("identical data, config and seed give bit-identical predictions",
          "[estimator]")
{
    const auto data = gaussian_pairs(80, 0.8, 11);
    McdConfig cfg;
    cfg.r = Ratio(0.3);
    cfg.construction = Construction::id;
    cfg.discriminator.mlp.epochs = 5;
    cfg.seed = 2024;
    const auto a = train(data, cfg);
    const auto b = train(data, cfg);
    Eigen::RowVectorXd x(1);
    x << 0.7;
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(257, -3.0, 3.0);
    const Eigen::VectorXd pa = a.predict_pdf_on_grid(x, grid);
    const Eigen::VectorXd pb = b.predict_pdf_on_grid(x, grid);
    REQUIRE(pa == pb); // bitwise

    cfg.seed = 2025;
    const auto c = train(data, cfg);
    REQUIRE(c.predict_pdf_on_grid(x, grid) != pa);
}

TEST_CASE("trained estimator tracks the oracle conditional density",
          "[estimator]")
{
    // Bivariate Gaussian with rho = 0.8; the index-grid construction at
    // r = 0.05 turns 2,000 pairs into a 40,000-row contrast set.
    const double rho = 0.8;
    const auto data = gaussian_pairs(2000, rho, 31);
    McdConfig cfg;
    cfg.r = Ratio(0.05);
    cfg.construction = Construction::id;
    cfg.seed = 17;
    const auto est = train(data, cfg);
    REQUIRE(est.contrast_size() == 40000);

    const BivariateGaussOracle oracle(rho);
    auto rng = make_engine(77);
    std::normal_distribution<double> gauss;
    double rel_err_sum = 0.0;
    int within_quarter = 0;
    int checked = 0;
    while (checked < 100) {
        Eigen::RowVectorXd x(1);
        x << gauss(rng);
        const double y = rho * x(0)
            + std::sqrt(1.0 - rho * rho) * gauss(rng);
        const double truth = oracle.conditional_pdf(x, y);
        if (truth <= 0.05)
            continue; // stay where the density is informative
        ++checked;
        const double got = est.predict_pointwise(x, y);
        const double rel = std::abs(got - truth) / truth;
        rel_err_sum += rel;
        if (rel <= 0.25)
            ++within_quarter;
    }
    // Aggregate accuracy over the 100 in-bulk points: mean relative error
    // within 25%, and the bulk of individual points inside that band too
    // (rarely-sampled feature values keep a worst-case bound out of reach
    // for any estimator trained on n = 2000 draws).
    INFO("mean relative error " << rel_err_sum / 100.0 << ", points within "
                                << "25%: " << within_quarter);
    REQUIRE(rel_err_sum / 100.0 <= 0.25);
    REQUIRE(within_quarter >= 75);
}
