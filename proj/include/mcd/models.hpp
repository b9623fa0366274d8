#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcd/contrast.hpp"
#include "mcd/data.hpp"
#include "mcd/random.hpp"

//! Synthetic conditional-density generators with exact ground-truth pdfs.
//! Each model samples supervised pairs (features are standard normal) and
//! evaluates its true conditional density in closed form, so estimator
//! output can be scored against an exact reference.  Models are immutable
//! after creation: any frozen coefficients are drawn once from the
//! construction seed, and samplers take an explicit engine per call.

namespace mcd {

namespace detail {

inline double standard_normal_pdf(double t)
{
    static const double inv_sqrt_2pi = 0.39894228040143268;
    return inv_sqrt_2pi * std::exp(-0.5 * t * t);
}

} // namespace detail

//! A joint law over (X, Y) with known conditional density of Y given X.
//! Features are drawn from N(0, I_p); concrete models define how the scalar
//! target is drawn and what its exact conditional pdf is.
class DensityModel
{
public:
    virtual ~DensityModel() = default;

    const std::string& name() const { return name_; }
    Eigen::Index feature_dim() const { return p_; }

    //! Exact conditional density of Y at `y` given features `x`.
    virtual double conditional_pdf(const Eigen::RowVectorXd& x,
                                   double y) const = 0;

    //! Exact conditional density evaluated over a whole grid.
    //! @param x feature row of width feature_dim().
    //! @param grid target values (any order, any length ≥ 1).
    Eigen::VectorXd true_conditional_pdf(const Eigen::RowVectorXd& x,
                                         const Eigen::VectorXd& grid) const
    {
        check_feature_width(x);
        if (grid.size() < 1)
            throw std::invalid_argument(
                "DensityModel: need at least one grid point");
        Eigen::VectorXd out(grid.size());
        for (Eigen::Index i = 0; i < grid.size(); ++i)
            out(i) = conditional_pdf(x, grid(i));
        return out;
    }

    //! Draws n iid pairs (X_i, Y_i).
    SupervisedDataset sample(Eigen::Index n, std::mt19937_64& rng) const
    {
        if (n < 1)
            throw std::invalid_argument("DensityModel: need n >= 1 draws");
        Eigen::MatrixXd x(n, p_);
        Eigen::MatrixXd y(n, 1);
        std::normal_distribution<double> gauss;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < p_; ++j)
                x(i, j) = gauss(rng);
            y(i, 0) = draw_target(x.row(i), rng);
        }
        return SupervisedDataset(std::move(x), std::move(y));
    }

    //! Draws n feature rows, each with m conditionally independent target
    //! draws (all m share the same X_i).
    MultiTargetDataset sample_multi(Eigen::Index n, Eigen::Index m,
                                    std::mt19937_64& rng) const
    {
        if (n < 1 || m < 1)
            throw std::invalid_argument(
                "DensityModel: need n >= 1 rows and m >= 1 target draws");
        Eigen::MatrixXd x(n, p_);
        Eigen::MatrixXd y(n, m);
        std::normal_distribution<double> gauss;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < p_; ++j)
                x(i, j) = gauss(rng);
            for (Eigen::Index l = 0; l < m; ++l)
                y(i, l) = draw_target(x.row(i), rng);
        }
        return MultiTargetDataset(std::move(x), std::move(y));
    }

protected:
    DensityModel(std::string name, Eigen::Index p)
        : name_(std::move(name))
        , p_(p)
    {
        if (p_ < 1)
            throw std::invalid_argument("DensityModel: need feature_dim >= 1");
    }

    //! One target draw given a feature row.
    virtual double draw_target(const Eigen::RowVectorXd& x,
                               std::mt19937_64& rng) const = 0;

    void check_feature_width(const Eigen::RowVectorXd& x) const
    {
        if (x.size() != p_) {
            std::ostringstream msg;
            msg << "DensityModel '" << name_ << "': feature width " << x.size()
                << " does not match feature_dim " << p_;
            throw std::invalid_argument(msg.str());
        }
    }

private:
    std::string name_;
    Eigen::Index p_;
};

namespace detail {

//! Coefficients β_j ~ U(0,1) frozen at model creation.
inline Eigen::VectorXd frozen_uniform_coeffs(Eigen::Index p, std::uint64_t seed)
{
    auto rng = make_engine(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd beta(p);
    for (Eigen::Index j = 0; j < p; ++j)
        beta(j) = unif(rng);
    return beta;
}

} // namespace detail

//! Linear-Gaussian model: Y = Xᵀβ + σ·ε with β_j ~ U(0,1) frozen at
//! creation and ε standard normal.  Conditional law: N(xᵀβ, σ²).
class BasicLinearModel : public DensityModel
{
public:
    BasicLinearModel(Eigen::Index p, double sigma, std::uint64_t seed)
        : DensityModel("basic_linear", p)
        , beta_(detail::frozen_uniform_coeffs(p, seed))
        , sigma_(sigma)
    {
        if (!(sigma > 0.0))
            throw std::invalid_argument("basic_linear: sigma must be positive");
    }

    const Eigen::VectorXd& coefficients() const { return beta_; }

    double conditional_pdf(const Eigen::RowVectorXd& x, double y) const override
    {
        check_feature_width(x);
        const double mean = x.dot(beta_);
        return detail::standard_normal_pdf((y - mean) / sigma_) / sigma_;
    }

protected:
    double draw_target(const Eigen::RowVectorXd& x,
                       std::mt19937_64& rng) const override
    {
        std::normal_distribution<double> gauss;
        return x.dot(beta_) + sigma_ * gauss(rng);
    }

private:
    Eigen::VectorXd beta_;
    double sigma_;
};

//! Linear model with asymmetric (half-normal) noise: Y = Xᵀβ + σ·|ε|.
//! The conditional density is zero below xᵀβ and twice the normal density
//! above it, so its support boundary moves with x.
class AsymmetricLinearModel : public DensityModel
{
public:
    AsymmetricLinearModel(Eigen::Index p, double sigma, std::uint64_t seed)
        : DensityModel("asymmetric_linear", p)
        , beta_(detail::frozen_uniform_coeffs(p, seed))
        , sigma_(sigma)
    {
        if (!(sigma > 0.0))
            throw std::invalid_argument(
                "asymmetric_linear: sigma must be positive");
    }

    const Eigen::VectorXd& coefficients() const { return beta_; }

    double conditional_pdf(const Eigen::RowVectorXd& x, double y) const override
    {
        check_feature_width(x);
        const double mean = x.dot(beta_);
        if (y < mean)
            return 0.0;
        return 2.0 * detail::standard_normal_pdf((y - mean) / sigma_) / sigma_;
    }

protected:
    double draw_target(const Eigen::RowVectorXd& x,
                       std::mt19937_64& rng) const override
    {
        std::normal_distribution<double> gauss;
        return x.dot(beta_) + sigma_ * std::abs(gauss(rng));
    }

private:
    Eigen::VectorXd beta_;
    double sigma_;
};

//! Gaussian location model driven by the scaled feature sum:
//! Y = a + b·(Σ_j x_j)/√p + σ·ε.  Both the conditional N(a + b·s, σ²) and
//! the marginal N(a, b² + σ²) are available in closed form.
class LinearGaussModel : public DensityModel
{
public:
    LinearGaussModel(Eigen::Index p, double a, double b, double sigma)
        : DensityModel("linear_gauss", p)
        , a_(a)
        , b_(b)
        , sigma_(sigma)
    {
        if (!(sigma > 0.0))
            throw std::invalid_argument("linear_gauss: sigma must be positive");
    }

    double conditional_pdf(const Eigen::RowVectorXd& x, double y) const override
    {
        check_feature_width(x);
        const double mean = a_ + b_ * scaled_sum(x);
        return detail::standard_normal_pdf((y - mean) / sigma_) / sigma_;
    }

    //! Exact marginal density of Y (the feature sum is standard normal, so
    //! Y ~ N(a, b² + σ²)).
    double marginal_pdf(double y) const
    {
        const double sd = std::sqrt(b_ * b_ + sigma_ * sigma_);
        return detail::standard_normal_pdf((y - a_) / sd) / sd;
    }

protected:
    double draw_target(const Eigen::RowVectorXd& x,
                       std::mt19937_64& rng) const override
    {
        std::normal_distribution<double> gauss;
        return a_ + b_ * scaled_sum(x) + sigma_ * gauss(rng);
    }

private:
    double scaled_sum(const Eigen::RowVectorXd& x) const
    {
        return x.sum() / std::sqrt(static_cast<double>(feature_dim()));
    }

    double a_;
    double b_;
    double sigma_;
};

//! Student-t location model: Y = Xᵀβ/√p + scale·T with T ~ Student(ν) and
//! β_j ~ U(0,1) frozen at creation.  Heavy-tailed conditional law.
class LinearStudentModel : public DensityModel
{
public:
    LinearStudentModel(Eigen::Index p, double dof, double scale,
                       std::uint64_t seed)
        : DensityModel("linear_student", p)
        , beta_(detail::frozen_uniform_coeffs(p, seed))
        , dof_(dof)
        , scale_(scale)
    {
        if (!(dof > 1.0))
            throw std::invalid_argument(
                "linear_student: degrees of freedom must exceed 1");
        if (!(scale > 0.0))
            throw std::invalid_argument("linear_student: scale must be positive");
    }

    const Eigen::VectorXd& coefficients() const { return beta_; }

    double conditional_pdf(const Eigen::RowVectorXd& x, double y) const override
    {
        check_feature_width(x);
        const double loc =
            (x.dot(beta_)) / std::sqrt(static_cast<double>(feature_dim()));
        const double t = (y - loc) / scale_;
        const double log_norm = std::lgamma(0.5 * (dof_ + 1.0))
            - std::lgamma(0.5 * dof_) - 0.5 * std::log(dof_ * M_PI);
        const double log_kernel =
            -0.5 * (dof_ + 1.0) * std::log1p(t * t / dof_);
        return std::exp(log_norm + log_kernel) / scale_;
    }

protected:
    double draw_target(const Eigen::RowVectorXd& x,
                       std::mt19937_64& rng) const override
    {
        std::student_t_distribution<double> student(dof_);
        const double loc =
            (x.dot(beta_)) / std::sqrt(static_cast<double>(feature_dim()));
        return loc + scale_ * student(rng);
    }

private:
    Eigen::VectorXd beta_;
    double dof_;
    double scale_;
};

//! Two-component Gaussian mixture whose component means both shift with
//! the scaled feature sum s = (Σ_j x_j)/√p:
//! Y | X ~ Σ_c w_c · N(μ_c + s, σ_c²).
class GaussianMixtModel : public DensityModel
{
public:
    GaussianMixtModel(Eigen::Index p, std::array<double, 2> weights,
                      std::array<double, 2> means, std::array<double, 2> scales)
        : DensityModel("gaussian_mixt", p)
        , weights_(weights)
        , means_(means)
        , scales_(scales)
    {
        if (weights_[0] < 0.0 || weights_[1] < 0.0)
            throw std::invalid_argument(
                "gaussian_mixt: mixture weights cannot be negative");
        if (std::abs(weights_[0] + weights_[1] - 1.0) > 1e-12)
            throw std::invalid_argument(
                "gaussian_mixt: mixture weights must sum to 1");
        if (!(scales_[0] > 0.0) || !(scales_[1] > 0.0))
            throw std::invalid_argument(
                "gaussian_mixt: component scales must be positive");
    }

    double conditional_pdf(const Eigen::RowVectorXd& x, double y) const override
    {
        check_feature_width(x);
        const double s = scaled_sum(x);
        double pdf = 0.0;
        for (int c = 0; c < 2; ++c)
            pdf += weights_[static_cast<std::size_t>(c)]
                * detail::standard_normal_pdf(
                      (y - means_[static_cast<std::size_t>(c)] - s)
                      / scales_[static_cast<std::size_t>(c)])
                / scales_[static_cast<std::size_t>(c)];
        return pdf;
    }

protected:
    double draw_target(const Eigen::RowVectorXd& x,
                       std::mt19937_64& rng) const override
    {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> gauss;
        const std::size_t c = unif(rng) < weights_[0] ? 0 : 1;
        return means_[c] + scaled_sum(x) + scales_[c] * gauss(rng);
    }

private:
    double scaled_sum(const Eigen::RowVectorXd& x) const
    {
        return x.sum() / std::sqrt(static_cast<double>(feature_dim()));
    }

    std::array<double, 2> weights_;
    std::array<double, 2> means_;
    std::array<double, 2> scales_;
};

//! Standard bivariate normal pair with correlation ρ: the one model whose
//! true contrast q(x, y, r) is available in closed form, making it the
//! end-to-end oracle for the whole pipeline.  Conditional: N(ρx, 1 − ρ²).
class BivariateGaussOracle : public DensityModel
{
public:
    explicit BivariateGaussOracle(double rho)
        : DensityModel("bivariate_gauss", 1)
        , rho_(rho)
    {
        if (!(std::abs(rho) < 1.0))
            throw std::invalid_argument(
                "bivariate_gauss: correlation must satisfy |rho| < 1");
    }

    double correlation() const { return rho_; }

    double conditional_pdf(const Eigen::RowVectorXd& x, double y) const override
    {
        check_feature_width(x);
        const double sd = std::sqrt(1.0 - rho_ * rho_);
        return detail::standard_normal_pdf((y - rho_ * x(0)) / sd) / sd;
    }

    //! Exact joint density of (X, Y).
    double joint_pdf(double x, double y) const
    {
        const double det = 1.0 - rho_ * rho_;
        const double quad = (x * x - 2.0 * rho_ * x * y + y * y) / det;
        return std::exp(-0.5 * quad) / (2.0 * M_PI * std::sqrt(det));
    }

    //! Exact marginal density of Y (standard normal).
    double marginal_pdf(double y) const
    {
        return detail::standard_normal_pdf(y);
    }

    //! Exact contrast q(x, y, r) from the closed-form joint and marginals.
    double contrast(double x, double y, double r) const
    {
        return marginal_contrast(
            DensityTriple{joint_pdf(x, y), detail::standard_normal_pdf(x),
                          marginal_pdf(y)},
            Ratio(r));
    }

protected:
    double draw_target(const Eigen::RowVectorXd& x,
                       std::mt19937_64& rng) const override
    {
        std::normal_distribution<double> gauss;
        return rho_ * x(0) + std::sqrt(1.0 - rho_ * rho_) * gauss(rng);
    }

private:
    double rho_;
};

//! Names accepted by make_model, in registry order.
inline const std::vector<std::string>& model_registry()
{
    static const std::vector<std::string> names = {
        "basic_linear",   "asymmetric_linear", "linear_gauss",
        "linear_student", "gaussian_mixt",     "bivariate_gauss",
    };
    return names;
}

//! Builds a registered model with its default parameters.
//! @param name one of model_registry().
//! @param p feature dimension (bivariate_gauss requires p = 1).
//! @param seed freezes any model coefficients drawn at creation.
//! @throw std::invalid_argument on an unknown name, listing the registry.
inline std::shared_ptr<const DensityModel>
make_model(const std::string& name, Eigen::Index p, std::uint64_t seed)
{
    if (name == "basic_linear")
        return std::make_shared<BasicLinearModel>(p, 0.3, seed);
    if (name == "asymmetric_linear")
        return std::make_shared<AsymmetricLinearModel>(p, 0.3, seed);
    if (name == "linear_gauss")
        return std::make_shared<LinearGaussModel>(p, 1.0, 1.0, 0.5);
    if (name == "linear_student")
        return std::make_shared<LinearStudentModel>(p, 3.0, 0.5, seed);
    if (name == "gaussian_mixt")
        return std::make_shared<GaussianMixtModel>(
            p, std::array<double, 2>{0.5, 0.5}, std::array<double, 2>{-2.0, 2.0},
            std::array<double, 2>{0.5, 0.5});
    if (name == "bivariate_gauss") {
        if (p != 1)
            throw std::invalid_argument(
                "bivariate_gauss: feature_dim must be 1");
        return std::make_shared<BivariateGaussOracle>(0.8);
    }
    std::ostringstream msg;
    msg << "make_model: unknown density model '" << name
        << "'; registered models:";
    for (const auto& n : model_registry())
        msg << ' ' << n;
    throw std::invalid_argument(msg.str());
}

} // namespace mcd
