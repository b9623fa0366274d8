#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mcd/kde.hpp"

using Catch::Approx;
using mcd::MarginalDensityModel;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values)
        out(i++) = v;
    return out;
}

} // namespace

TEST_CASE("kde bandwidth rule and degenerate fallback", "[kde]")
{
    const auto m = MarginalDensityModel(vec({0.0, 1.0, 2.0, 3.0, 4.0}));
    const double sd = std::sqrt(2.5); // sample sd of 0..4
    CHECK(m.bandwidth() == Approx(1.06 * sd * std::pow(5.0, -0.2)).epsilon(1e-14));

    // Constant sample: positive fallback bandwidth scaled by the value.
    CHECK(MarginalDensityModel(vec({0.0})).bandwidth() == Approx(1e-3));
    CHECK(MarginalDensityModel(vec({7.0, 7.0})).bandwidth() == Approx(7e-3));

    CHECK_THROWS_AS(MarginalDensityModel(Eigen::VectorXd(0)),
                    std::invalid_argument);
}

TEST_CASE("kde pdf pinned values", "[kde]")
{
    // Single kernel at its centre: 1/(h·sqrt(2π)).
    const auto single = MarginalDensityModel(vec({0.0}));
    const double h = single.bandwidth();
    CHECK(single.pdf(0.0) == Approx(1.0 / (h * std::sqrt(2.0 * M_PI))).epsilon(1e-12));

    // Symmetric samples give a symmetric density.
    const auto sym = MarginalDensityModel(vec({-1.0, 1.0}));
    for (double t : {0.1, 0.5, 1.3, 2.7})
        CHECK(sym.pdf(t) == Approx(sym.pdf(-t)).epsilon(1e-13));

    // Two kernels at 0 and 2 with h = 1 evaluated midway: 2·φ(1)/2.
    // The fitted bandwidth is not 1, so evaluate the mixture by hand via a
    // model whose bandwidth is forced through the fallback-free formula:
    // instead, check against the closed form with the fitted h.
    const auto two = MarginalDensityModel(vec({0.0, 2.0}));
    const double h2 = two.bandwidth();
    const double expected =
        (std::exp(-0.5 / (h2 * h2)) / std::sqrt(2.0 * M_PI)) / h2;
    CHECK(two.pdf(1.0) == Approx(expected).epsilon(1e-12));
    // And the reference value for h = 1 exactly: 2·φ(1)/2 = 0.24197.
    const double phi1 = std::exp(-0.5) / std::sqrt(2.0 * M_PI);
    CHECK(phi1 == Approx(0.24197).margin(5e-6));

    // Far tail decays below 1e-12.
    CHECK(two.pdf(2.0 + 50.0 * h2) < 1e-12);
    // Own-kernel contribution bounds the density at any sample point.
    const auto m = MarginalDensityModel(vec({0.3, 1.2, 5.0, -2.0}));
    const double floor = (std::exp(0.0) / std::sqrt(2.0 * M_PI))
        / (4.0 * m.bandwidth());
    for (double s : {0.3, 1.2, 5.0, -2.0})
        CHECK(m.pdf(s) >= floor);
}

TEST_CASE("kde recovers the standard normal density at 0", "[kde]")
{
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd y(10000);
    for (Eigen::Index i = 0; i < y.size(); ++i)
        y(i) = gauss(rng);
    const auto m = MarginalDensityModel(y);
    CHECK(m.pdf(0.0) == Approx(0.39894).margin(0.05));
}

TEST_CASE("kde quantile pinned values and monotonicity", "[kde]")
{
    // Symmetric two-point sample: the median sits at 0.
    const auto sym = MarginalDensityModel(vec({-1.0, 1.0}));
    CHECK(sym.quantile(0.5) == Approx(0.0).margin(1e-8));

    // Single kernel behaves as one normal: quantile(0.975) = 1.95996·h.
    const auto single = MarginalDensityModel(vec({0.0}));
    CHECK(single.quantile(0.975) / single.bandwidth()
          == Approx(1.95996).margin(1e-4));

    const auto m = MarginalDensityModel(vec({0.0, 0.3, 1.0, 2.5, 2.6, 4.0}));
    double prev = -1e300;
    for (double p : {0.001, 0.01, 0.1, 0.5, 0.9, 0.99, 0.999}) {
        const double q = m.quantile(p);
        CHECK(q > prev);
        prev = q;
    }
    CHECK_THROWS_AS(m.quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(m.quantile(1.0), std::invalid_argument);
    CHECK_THROWS_AS(m.quantile(-0.5), std::invalid_argument);
}

TEST_CASE("kde cdf inverts quantile and pdf integrates to one", "[kde]")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(1.0, 2.0);
    Eigen::VectorXd y(60);
    for (Eigen::Index i = 0; i < y.size(); ++i)
        y(i) = gauss(rng);
    const auto m = MarginalDensityModel(y);

    for (double p : {0.001, 0.1, 0.5, 0.9, 0.999})
        CHECK(m.cdf(m.quantile(p)) == Approx(p).margin(1e-8));

    // Trapezoidal mass between the 1e-4 and 1−1e-4 quantiles on a dense grid.
    const double lo = m.quantile(1e-4);
    const double hi = m.quantile(1.0 - 1e-4);
    const Eigen::Index pts = 100000;
    const double step = (hi - lo) / static_cast<double>(pts - 1);
    double integral = 0.0;
    double prev = m.pdf(lo);
    for (Eigen::Index i = 1; i < pts; ++i) {
        const double cur = m.pdf(lo + step * static_cast<double>(i));
        integral += 0.5 * (prev + cur) * step;
        prev = cur;
    }
    CHECK(integral == Approx(1.0).margin(1e-3));
}
