#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "mcd/construction.hpp"
#include "mcd/discriminator.hpp"
#include "mcd/random.hpp"

using namespace mcd;

namespace {

//! Contrast dataset whose labels are independent of the rows: W is iid
//! noise, the first `joint` labels are 1, interleaved so nothing depends
//! on a contiguous block.
ContrastDataset noise_contrast(Eigen::Index n, Eigen::Index width,
                               double ratio, std::uint64_t seed)
{
    auto rng = make_engine(seed);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd w(n, width);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < width; ++j)
            w(i, j) = gauss(rng);
    const auto joint = static_cast<Eigen::Index>(
        std::lround(ratio * static_cast<double>(n)));
    std::vector<std::uint8_t> z(static_cast<std::size_t>(n), 0);
    // Spread the ones evenly through the index range.
    for (Eigen::Index i = 0; i < joint; ++i)
        z[static_cast<std::size_t>((i * n) / joint)] = 1;
    Eigen::Index ones = 0;
    for (auto zi : z)
        ones += zi;
    return ContrastDataset(std::move(w), std::move(z), ones, n - ones);
}

//! Two well-separated 1-D clusters: class 1 near +1.5, class 0 near -1.5.
ContrastDataset separable_contrast(Eigen::Index per_class, std::uint64_t seed)
{
    auto rng = make_engine(seed);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    const Eigen::Index n = 2 * per_class;
    Eigen::MatrixXd w(n, 1);
    std::vector<std::uint8_t> z(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool one = (i % 2 == 0);
        w(i, 0) = (one ? 1.5 : -1.5) + unif(rng);
        z[static_cast<std::size_t>(i)] = one ? 1 : 0;
    }
    return ContrastDataset(std::move(w), std::move(z), per_class, per_class);
}

double train_accuracy(const Discriminator& d, const ContrastDataset& data)
{
    const Eigen::VectorXd q = d.predict_proba_batch(data.W);
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        const int label = q(i) > 0.5 ? 1 : 0;
        if (label == static_cast<int>(data.z[static_cast<std::size_t>(i)]))
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

//! Largest relative deviation between the analytic gradient and a central
//! finite difference, measured as a norm ratio.
template <typename Loss>
double gradient_check(Loss&& loss, const Eigen::VectorXd& theta)
{
    Eigen::VectorXd g;
    loss(theta, g);
    Eigen::VectorXd g_fd(theta.size());
    Eigen::VectorXd scratch;
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd tp = theta;
        Eigen::VectorXd tm = theta;
        tp(i) += h;
        tm(i) -= h;
        g_fd(i) = (loss(tp, scratch) - loss(tm, scratch)) / (2.0 * h);
    }
    return (g_fd - g).norm() / std::max(1.0, g.norm());
}

} // namespace

TEST_CASE("spec validation rejects unusable settings", "[discriminator]")
{
    DiscriminatorSpec ok;
    REQUIRE_NOTHROW(ok.validate());

    DiscriminatorSpec s = ok;
    s.mlp.learning_rate = 0.0;
    REQUIRE_THROWS_AS(s.validate(), std::invalid_argument);

    s = ok;
    s.mlp.epochs = -1;
    REQUIRE_THROWS_AS(s.validate(), std::invalid_argument);

    s = ok;
    s.mlp.epochs = 0; // a zero-epoch network is legal: it predicts one half
    REQUIRE_NOTHROW(s.validate());

    s = ok;
    s.mlp.batch = 0;
    REQUIRE_THROWS_AS(s.validate(), std::invalid_argument);

    s = ok;
    s.logistic.l1 = -1e-9;
    REQUIRE_THROWS_AS(s.validate(), std::invalid_argument);

    s = ok;
    s.logistic.max_iters = 0;
    REQUIRE_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("standardization centers and scales, constant columns untouched",
          "[discriminator]")
{
    Eigen::MatrixXd w(4, 3);
    // Column 0: mean 2.5, population sd sqrt(1.25).  Column 1 constant.
    w << 1.0, 7.0, -1.0, //
        2.0, 7.0, 0.0,   //
        3.0, 7.0, 1.0,   //
        4.0, 7.0, 2.0;
    const auto s = Standardization::fit(w);
    REQUIRE_THAT(s.mean(0), Catch::Matchers::WithinAbs(2.5, 1e-15));
    REQUIRE_THAT(s.mean(1), Catch::Matchers::WithinAbs(7.0, 1e-15));
    REQUIRE_THAT(s.scale(0),
                 Catch::Matchers::WithinAbs(std::sqrt(1.25), 1e-15));
    REQUIRE(s.scale(1) == 1.0); // constant column keeps scale one
    const Eigen::MatrixXd t = s.apply(w);
    REQUIRE_THAT(t.col(0).mean(), Catch::Matchers::WithinAbs(0.0, 1e-15));
    for (Eigen::Index i = 0; i < 4; ++i)
        REQUIRE(t(i, 1) == 0.0);
    REQUIRE_THAT(t.col(2).array().square().mean(),
                 Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("logistic prediction reproduces the sigmoid by hand",
          "[discriminator]")
{
    Standardization ident;
    ident.mean = Eigen::RowVectorXd::Zero(2);
    ident.scale = Eigen::RowVectorXd::Ones(2);
    Eigen::VectorXd weights(2);
    weights << 1.0, -2.0;
    const LogisticElasticNet model(weights, 0.5, ident, DiscriminatorSpec{});

    Eigen::RowVectorXd w(2);
    w << 0.3, 0.2;
    // s = 0.3*1 + 0.2*(-2) + 0.5 = 0.4; sigma(0.4) = 1/(1+e^-0.4).
    const double expected = 1.0 / (1.0 + std::exp(-0.4));
    REQUIRE_THAT(model.predict_proba(w),
                 Catch::Matchers::WithinAbs(expected, 1e-15));
    REQUIRE_THAT(model.predict_proba(w),
                 Catch::Matchers::WithinAbs(0.598687660112452, 1e-12));
}

TEST_CASE("zero-epoch network predicts exactly one half everywhere",
          "[discriminator]")
{
    DiscriminatorSpec spec;
    spec.kind = DiscriminatorKind::mlp;
    spec.mlp.epochs = 0;
    spec.seed = 11;
    const auto data = noise_contrast(64, 3, 0.25, 7);
    const auto model = fit(spec, data);
    auto rng = make_engine(99);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < 50; ++i) {
        Eigen::RowVectorXd w(3);
        for (int j = 0; j < 3; ++j)
            w(j) = 10.0 * gauss(rng);
        REQUIRE(model->predict_proba(w) == 0.5); // bitwise: output layer is zero
    }
}

TEST_CASE("predictions stay inside [0, 1] and match batch evaluation",
          "[discriminator]")
{
    const auto data = noise_contrast(200, 2, 0.4, 3);
    DiscriminatorSpec spec;
    spec.mlp.epochs = 5;
    spec.seed = 4;
    const auto mlp = fit(spec, data);
    spec.kind = DiscriminatorKind::logistic_elasticnet;
    const auto logit = fit(spec, data);

    auto rng = make_engine(17);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd queries(1000, 2);
    for (Eigen::Index i = 0; i < queries.rows(); ++i)
        for (Eigen::Index j = 0; j < 2; ++j)
            queries(i, j) = 20.0 * gauss(rng);
    for (const auto& model : {mlp, logit}) {
        const Eigen::VectorXd q = model->predict_proba_batch(queries);
        for (Eigen::Index i = 0; i < q.size(); ++i) {
            REQUIRE(q(i) >= 0.0);
            REQUIRE(q(i) <= 1.0);
            // Single-row path agrees with the batch path (up to kernel
            // summation order inside the matrix product).
            if (i % 100 == 0)
                REQUIRE_THAT(model->predict_proba(queries.row(i)),
                             Catch::Matchers::WithinRel(q(i), 1e-12));
        }
    }
}

TEST_CASE("width mismatch and degenerate labels are rejected",
          "[discriminator]")
{
    const auto data = noise_contrast(50, 3, 0.5, 5);
    DiscriminatorSpec spec;
    spec.mlp.epochs = 1;
    const auto model = fit(spec, data);
    REQUIRE_THROWS_AS(model->predict_proba_batch(Eigen::MatrixXd::Zero(2, 4)),
                      std::invalid_argument);

    Eigen::MatrixXd w = Eigen::MatrixXd::Random(6, 2);
    std::vector<std::uint8_t> ones(6, 1);
    const ContrastDataset all_ones(w, ones, 6, 0);
    REQUIRE_THROWS_WITH(fit(spec, all_ones),
                        Catch::Matchers::ContainsSubstring("degenerate"));
    std::vector<std::uint8_t> zeros(6, 0);
    const ContrastDataset all_zeros(w, zeros, 0, 6);
    REQUIRE_THROWS_WITH(fit(spec, all_zeros),
                        Catch::Matchers::ContainsSubstring("degenerate"));
}

TEST_CASE("both discriminators separate an easy two-cluster problem",
          "[discriminator]")
{
    const auto data = separable_contrast(100, 21);

    DiscriminatorSpec spec;
    spec.kind = DiscriminatorKind::logistic_elasticnet;
    spec.seed = 1;
    const auto logit = fit(spec, data);
    REQUIRE(train_accuracy(*logit, data) >= 0.99);

    spec.kind = DiscriminatorKind::mlp;
    spec.mlp.epochs = 50;
    const auto mlp = fit(spec, data);
    REQUIRE(train_accuracy(*mlp, data) >= 0.99);
}

TEST_CASE("with labels independent of the rows the mean prediction is the "
          "label ratio",
          "[discriminator]")
{
    const double ratio = 0.3;
    const auto data = noise_contrast(500, 2, ratio, 31);

    DiscriminatorSpec spec;
    spec.kind = DiscriminatorKind::logistic_elasticnet;
    const auto logit = fit(spec, data);
    const double logit_mean =
        logit->predict_proba_batch(data.W).mean();
    REQUIRE_THAT(logit_mean, Catch::Matchers::WithinAbs(ratio, 0.05));

    spec.kind = DiscriminatorKind::mlp;
    spec.seed = 8;
    const auto mlp = fit(spec, data);
    const double mlp_mean = mlp->predict_proba_batch(data.W).mean();
    REQUIRE_THAT(mlp_mean, Catch::Matchers::WithinAbs(ratio, 0.05));
}

TEST_CASE("training is deterministic in the seed", "[discriminator]")
{
    const auto data = noise_contrast(120, 2, 0.5, 13);
    DiscriminatorSpec spec;
    spec.mlp.epochs = 3;
    spec.seed = 42;
    const auto a = fit(spec, data);
    const auto b = fit(spec, data);
    const auto& pa = dynamic_cast<const MlpClassifier&>(*a).params();
    const auto& pb = dynamic_cast<const MlpClassifier&>(*b).params();
    REQUIRE(pa == pb); // bitwise identical

    spec.seed = 43;
    const auto c = fit(spec, data);
    const auto& pc = dynamic_cast<const MlpClassifier&>(*c).params();
    REQUIRE(pa != pc);
}

TEST_CASE("logistic gradient matches central finite differences",
          "[discriminator]")
{
    auto rng = make_engine(2024);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 12;
        const Eigen::Index d = 4;
        Eigen::MatrixXd w(n, d);
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < d; ++j)
                w(i, j) = gauss(rng);
            z(i) = (i % 3 == 0) ? 1.0 : 0.0;
        }
        Eigen::VectorXd theta(d + 1);
        for (Eigen::Index j = 0; j <= d; ++j)
            theta(j) = 0.7 * gauss(rng); // almost surely away from the L1 kink
        const double err = gradient_check(
            [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
                return logistic_loss_grad(t, w, z, 1e-4, 1e-4, g);
            },
            theta);
        REQUIRE(err < 1e-4);
    }
}

TEST_CASE("network gradient matches central finite differences",
          "[discriminator]")
{
    auto rng = make_engine(77);
    std::normal_distribution<double> gauss;
    MlpShape shape;
    shape.input = 3;
    shape.hidden1 = 5;
    shape.hidden2 = 4;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 9;
        Eigen::MatrixXd w(n, shape.input);
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < shape.input; ++j)
                w(i, j) = gauss(rng);
            z(i) = (i % 2 == 0) ? 1.0 : 0.0;
        }
        Eigen::VectorXd params(shape.size());
        for (Eigen::Index j = 0; j < params.size(); ++j)
            params(j) = 0.5 * gauss(rng);
        const double err = gradient_check(
            [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
                return mlp_loss_grad(shape, t, w, z, g);
            },
            params);
        REQUIRE(err < 1e-4);
    }
}

TEST_CASE("network recovers the analytic contrast of a correlated Gaussian "
          "pair",
          "[discriminator]")
{
    // (X, Y) bivariate standard normal with correlation rho; the contrast
    // at mixing ratio one half is q = p_xy / (p_xy + p_x * p_y), known in
    // closed form.
    const double rho = 0.8;
    const Eigen::Index n_source = 8000;
    auto rng = make_engine(5150);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd x(n_source, 1);
    Eigen::MatrixXd y(n_source, 1);
    for (Eigen::Index i = 0; i < n_source; ++i) {
        const double u = gauss(rng);
        x(i, 0) = u;
        y(i, 0) = rho * u + std::sqrt(1.0 - rho * rho) * gauss(rng);
    }
    const SupervisedDataset source(x, y);
    auto build_rng = make_engine(404);
    const auto contrast = build_iid(source, Ratio(0.5), build_rng);
    REQUIRE(contrast.size() == 4000);

    DiscriminatorSpec spec;
    spec.kind = DiscriminatorKind::mlp;
    spec.mlp.epochs = 80;
    spec.seed = 99;
    const auto model = fit(spec, contrast);

    const auto normal_pdf = [](double v) {
        return std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI);
    };
    const auto joint_pdf = [&](double xv, double yv) {
        const double det = 1.0 - rho * rho;
        const double quad =
            (xv * xv - 2.0 * rho * xv * yv + yv * yv) / det;
        return std::exp(-0.5 * quad) / (2.0 * M_PI * std::sqrt(det));
    };

    double abs_err_sum = 0.0;
    int count = 0;
    for (double xv = -1.5; xv <= 1.5 + 1e-12; xv += 0.5) {
        for (double yv = -1.5; yv <= 1.5 + 1e-12; yv += 0.5) {
            const double pxy = joint_pdf(xv, yv);
            const double px_py = normal_pdf(xv) * normal_pdf(yv);
            const double q_true = pxy / (pxy + px_py);
            Eigen::RowVectorXd w(2);
            w << xv, yv;
            abs_err_sum += std::abs(model->predict_proba(w) - q_true);
            ++count;
        }
    }
    const double mae = abs_err_sum / count;
    INFO("mean absolute contrast error " << mae);
    REQUIRE(mae <= 0.1);

    // Sanity anchor: at the origin with rho = 0.8 the analytic contrast is
    // 1 / (1 + sqrt(1 - rho^2)) = 0.625.
    const double q_origin =
        joint_pdf(0.0, 0.0) / (joint_pdf(0.0, 0.0) + normal_pdf(0.0) * normal_pdf(0.0));
    REQUIRE_THAT(q_origin, Catch::Matchers::WithinAbs(0.625, 1e-12));
}
