#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "mcd/construction.hpp"
#include "mcd/contrast.hpp"
#include "mcd/data.hpp"
#include "mcd/discriminator.hpp"
#include "mcd/kde.hpp"
#include "mcd/random.hpp"

//! The end-to-end conditional density estimator.  Training fixes the
//! mixing ratio, fits the marginal target density, builds the requested
//! contrast dataset and trains the discriminator on it; prediction turns
//! the discriminator's class-1 probability back into a conditional density
//! through the plug-in identity
//!
//!     p̂(y | x) = p̂_Y(y) · q̂/(1 − q̂) · (1 − r)/r,   q̂ = min(q̃, 1 − ε),
//!
//! with the threshold ε keeping the ratio finite even when the classifier
//! saturates.

namespace mcd {

//! Which contrast construction training uses.
enum class Construction {
    iid,            //!< independent halves, size ⌊n/2⌋
    id,             //!< index-grid pairs, size up to n²
    iid_additional, //!< independent blocks consuming unpaired marginal rows
    id_additional,  //!< index grid over paired and unpaired rows
    id_multitarget, //!< index grid over m target draws per observation
};

inline const char* to_string(Construction c)
{
    switch (c) {
    case Construction::iid: return "iid";
    case Construction::id: return "id";
    case Construction::iid_additional: return "iid_additional";
    case Construction::id_additional: return "id_additional";
    case Construction::id_multitarget: return "id_multitarget";
    }
    throw std::logic_error("to_string: unhandled construction");
}

inline Construction construction_from_string(const std::string& name)
{
    if (name == "iid") return Construction::iid;
    if (name == "id") return Construction::id;
    if (name == "iid_additional") return Construction::iid_additional;
    if (name == "id_additional") return Construction::id_additional;
    if (name == "id_multitarget") return Construction::id_multitarget;
    throw std::invalid_argument(
        "construction_from_string: unknown construction '" + name
        + "'; expected one of iid, id, iid_additional, id_additional, "
          "id_multitarget");
}

//! Full training configuration of one estimator.
struct McdConfig
{
    Ratio r{0.5};                                //!< target matched-pair ratio
    Construction construction = Construction::id; //!< contrast construction
    DiscriminatorSpec discriminator;              //!< classifier settings
    double epsilon = 1e-6; //!< thresholding constant, ∈ (0, 1/2)
    std::uint64_t seed = 0; //!< master seed; construction and classifier
                            //!< substreams are derived from it, overriding
                            //!< the nested discriminator seed

    void validate() const
    {
        if (!(epsilon > 0.0) || !(epsilon < 0.5)) {
            std::ostringstream msg;
            msg << "McdConfig: epsilon = " << epsilon
                << " must lie strictly between 0 and 0.5";
            throw std::invalid_argument(msg.str());
        }
        discriminator.validate();
    }
};

//! A fitted conditional density estimator: the marginal KDE, the fitted
//! discriminator, the plug-in ratio and the threshold.  Immutable;
//! predictions are concurrent-safe.
class McdEstimator
{
public:
    //! Assembles an estimator from already-fitted parts (train() below is
    //! the usual path; assembling directly is useful with a stubbed
    //! discriminator).
    McdEstimator(MarginalDensityModel marginal,
                 std::shared_ptr<const Discriminator> discriminator,
                 const Ratio& r, double epsilon)
        : marginal_(std::move(marginal))
        , discriminator_(std::move(discriminator))
        , r_(r.value())
        , epsilon_(epsilon)
    {
        if (!discriminator_)
            throw std::invalid_argument("McdEstimator: null discriminator");
        if (!(epsilon > 0.0) || !(epsilon < 0.5))
            throw std::invalid_argument(
                "McdEstimator: epsilon must lie strictly between 0 and 0.5");
        if (discriminator_->input_width() < 2)
            throw std::invalid_argument(
                "McdEstimator: discriminator width must cover (x, y)");
    }

    const MarginalDensityModel& marginal() const { return marginal_; }
    const Discriminator& discriminator() const { return *discriminator_; }
    //! Plug-in ratio used in the density formula.
    double ratio() const { return r_; }
    double epsilon() const { return epsilon_; }
    //! Feature width accepted by predict (discriminator width minus the
    //! target column).
    Eigen::Index feature_dim() const
    {
        return discriminator_->input_width() - 1;
    }

    //! Size of the contrast set the discriminator was trained on (0 when
    //! the estimator was assembled directly from parts).
    Eigen::Index contrast_size() const { return contrast_size_; }
    Eigen::Index contrast_joint() const { return contrast_joint_; }

    void record_contrast_counts(Eigen::Index n, Eigen::Index n_joint)
    {
        contrast_size_ = n;
        contrast_joint_ = n_joint;
    }

    //! Conditional density estimate at a single (x, y).
    //! Always finite and ≥ 0: the threshold caps q̂ at 1 − ε.
    double predict_pointwise(const Eigen::RowVectorXd& x, double y) const
    {
        Eigen::RowVectorXd w(x.size() + 1);
        w << x, y;
        const double q_raw = discriminator_->predict_proba(w);
        const double q = std::min(q_raw, 1.0 - epsilon_);
        return marginal_.pdf(y) * (q / (1.0 - q)) * ((1.0 - r_) / r_);
    }

    //! Conditional density estimate on a strictly increasing grid.
    Eigen::VectorXd predict_pdf_on_grid(const Eigen::RowVectorXd& x,
                                        const Eigen::VectorXd& grid) const
    {
        return predict_pdf_on_grid(x, grid, marginal_.pdf_grid(grid));
    }

    //! Same, with the marginal density values on the grid precomputed —
    //! evaluating many feature rows on one shared grid skips the repeated
    //! KDE sweep.
    Eigen::VectorXd
    predict_pdf_on_grid(const Eigen::RowVectorXd& x, const Eigen::VectorXd& grid,
                        const Eigen::VectorXd& marginal_values) const
    {
        check_grid(grid);
        if (marginal_values.size() != grid.size())
            throw std::invalid_argument(
                "predict_pdf_on_grid: marginal values do not match the grid");
        Eigen::MatrixXd w(grid.size(), x.size() + 1);
        w.leftCols(x.size()).rowwise() = x;
        w.col(x.size()) = grid;
        const Eigen::VectorXd q_raw = discriminator_->predict_proba_batch(w);
        Eigen::VectorXd out(grid.size());
        const double prior_odds = (1.0 - r_) / r_;
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
            const double q = std::min(q_raw(i), 1.0 - epsilon_);
            out(i) = marginal_values(i) * (q / (1.0 - q)) * prior_odds;
        }
        return out;
    }

    //! Evenly spaced grid between the 0.001 and 0.999 quantiles of the
    //! fitted marginal.
    Eigen::VectorXd default_grid(Eigen::Index points) const
    {
        if (points < 2)
            throw std::invalid_argument("default_grid: need at least 2 points");
        return Eigen::VectorXd::LinSpaced(points, marginal_.quantile(0.001),
                                          marginal_.quantile(0.999));
    }

private:
    static void check_grid(const Eigen::VectorXd& grid)
    {
        if (grid.size() < 2)
            throw std::invalid_argument(
                "predict_pdf_on_grid: need a grid of at least 2 points");
        for (Eigen::Index i = 0; i + 1 < grid.size(); ++i)
            if (!(grid(i) < grid(i + 1)))
                throw std::invalid_argument(
                    "predict_pdf_on_grid: grid must be strictly increasing");
    }

    MarginalDensityModel marginal_;
    std::shared_ptr<const Discriminator> discriminator_;
    double r_;
    double epsilon_;
    Eigen::Index contrast_size_ = 0;
    Eigen::Index contrast_joint_ = 0;
};

//! Divides density values by their trapezoidal integral over the grid, so
//! the rescaled values integrate (trapezoidally) to exactly 1.
//! @throw std::domain_error on a zero integral ("degenerate density").
inline Eigen::VectorXd rescale(const Eigen::VectorXd& pdf_values,
                               const Eigen::VectorXd& grid)
{
    if (pdf_values.size() != grid.size())
        throw std::invalid_argument(
            "rescale: values and grid lengths differ");
    if (grid.size() < 2)
        throw std::invalid_argument("rescale: need at least 2 grid points");
    for (Eigen::Index i = 0; i + 1 < grid.size(); ++i)
        if (!(grid(i) < grid(i + 1)))
            throw std::invalid_argument(
                "rescale: grid must be strictly increasing");
    double integral = 0.0;
    for (Eigen::Index i = 0; i + 1 < grid.size(); ++i)
        integral += 0.5 * (pdf_values(i) + pdf_values(i + 1))
            * (grid(i + 1) - grid(i));
    if (!(integral > 0.0))
        throw std::domain_error(
            "rescale: degenerate density (trapezoidal integral is zero)");
    return pdf_values / integral;
}

namespace detail {

//! Target values feeding the marginal KDE: every paired target plus any
//! unpaired target-only rows.
inline Eigen::VectorXd stack_targets(const Eigen::MatrixXd& y,
                                     const Eigen::MatrixXd& extra_y)
{
    Eigen::VectorXd out(y.size() + extra_y.size());
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        for (Eigen::Index j = 0; j < y.cols(); ++j)
            out(at++) = y(i, j);
    for (Eigen::Index i = 0; i < extra_y.rows(); ++i)
        for (Eigen::Index j = 0; j < extra_y.cols(); ++j)
            out(at++) = extra_y(i, j);
    return out;
}

inline McdEstimator finish_training(const ContrastDataset& contrast,
                                    MarginalDensityModel marginal,
                                    const McdConfig& cfg, bool realized_ratio)
{
    DiscriminatorSpec spec = cfg.discriminator;
    spec.seed = derive_seed(cfg.seed, 2);
    auto discriminator = fit(spec, contrast);
    // The index-grid constructions hit their mismatched-count floor
    // exactly, so the realized ratio n_joint/N is the honest plug-in value;
    // the Bernoulli construction targets the nominal ratio instead.
    const Ratio plug_in = realized_ratio ? Ratio(contrast.ratio()) : cfg.r;
    McdEstimator est(std::move(marginal), std::move(discriminator), plug_in,
                     cfg.epsilon);
    est.record_contrast_counts(contrast.size(), contrast.n_joint);
    return est;
}

} // namespace detail

//! Trains an estimator on paired data, optionally with unpaired marginal
//! rows.  Steps: fix r; fit the marginal KDE on all target values
//! (including extra_y rows); build the configured contrast dataset; fit
//! the discriminator on it.
//! @throw std::invalid_argument when the construction needs data the
//!        caller did not provide.
inline McdEstimator train(const SupervisedDataset& d,
                          const MarginalDatasets& extra, const McdConfig& cfg)
{
    cfg.validate();
    if (d.k() != 1)
        throw std::invalid_argument(
            "train: the estimator requires a scalar target (k = 1)");
    MarginalDensityModel marginal(
        detail::stack_targets(d.Y, extra.extra_y));
    auto rng = make_engine(derive_seed(cfg.seed, 1));
    const Eigen::Index n = d.n();
    switch (cfg.construction) {
    case Construction::iid: {
        const auto contrast = build_iid(d, cfg.r, rng);
        return detail::finish_training(contrast, std::move(marginal), cfg,
                                       /*realized_ratio=*/false);
    }
    case Construction::id: {
        const auto counts =
            ratio_to_counts(n, cfg.r, static_cast<Eigen::Index>(n) * (n - 1));
        const auto contrast = build_id(d, counts.n_joint, counts.n_marg, rng);
        return detail::finish_training(contrast, std::move(marginal), cfg,
                                       /*realized_ratio=*/true);
    }
    case Construction::iid_additional: {
        const auto contrast = build_iid_additional(d, extra, cfg.r, rng);
        return detail::finish_training(contrast, std::move(marginal), cfg,
                                       /*realized_ratio=*/false);
    }
    case Construction::id_additional: {
        const Eigen::Index pool = (n + extra.n_x()) * (n + extra.n_y()) - n;
        const auto counts = ratio_to_counts(n, cfg.r, pool);
        const auto contrast =
            build_id_additional(d, extra, counts.n_joint, counts.n_marg, rng);
        return detail::finish_training(contrast, std::move(marginal), cfg,
                                       /*realized_ratio=*/true);
    }
    case Construction::id_multitarget:
        throw std::invalid_argument(
            "train: the multi-target construction needs multi-target data "
            "(several target draws per observation)");
    }
    throw std::logic_error("train: unhandled construction");
}

//! Trains on paired data with no unpaired marginal rows.
inline McdEstimator train(const SupervisedDataset& d, const McdConfig& cfg)
{
    if (cfg.construction == Construction::iid_additional
        || cfg.construction == Construction::id_additional)
        throw std::invalid_argument(
            "train: the additional-data constructions need unpaired "
            "marginal rows; provide MarginalDatasets");
    return train(d, MarginalDatasets{}, cfg);
}

//! Trains on multi-target data (m conditionally independent target draws
//! per observation); only the multi-target construction applies.
inline McdEstimator train(const MultiTargetDataset& d, const McdConfig& cfg)
{
    cfg.validate();
    if (cfg.construction != Construction::id_multitarget) {
        std::ostringstream msg;
        msg << "train: construction '" << to_string(cfg.construction)
            << "' expects plain paired data; multi-target data requires "
               "the id_multitarget construction";
        throw std::invalid_argument(msg.str());
    }
    MarginalDensityModel marginal(
        detail::stack_targets(d.Y, Eigen::MatrixXd()));
    auto rng = make_engine(derive_seed(cfg.seed, 1));
    const Eigen::Index n = d.n();
    const Eigen::Index m = d.m();
    const Eigen::Index n_joint = n * m;
    const Eigen::Index cap = n * (n - 1) * m;
    const auto counts = ratio_to_counts(n_joint, cfg.r, cap);
    const auto contrast =
        build_id_multitarget(d, counts.n_joint, counts.n_marg, rng);
    return detail::finish_training(contrast, std::move(marginal), cfg,
                                   /*realized_ratio=*/true);
}

} // namespace mcd
