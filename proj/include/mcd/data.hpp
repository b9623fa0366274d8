#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

//! Dataset types passed between the constructions, the estimator and the
//! benchmark runner.  All of them are plain in-memory containers over Eigen
//! matrices; invariants are checked eagerly at construction so downstream
//! code never sees NaNs or ragged shapes.

namespace mcd {

//! A supervised training set: feature rows paired with target rows.
//! Row i of X belongs with row i of Y.
class SupervisedDataset
{
public:
    //! @param x feature matrix, n × p.
    //! @param y target matrix, n × k (k = 1 for scalar targets).
    SupervisedDataset(Eigen::MatrixXd x, Eigen::MatrixXd y)
        : X(std::move(x))
        , Y(std::move(y))
    {
        if (X.rows() < 1)
            throw std::invalid_argument("SupervisedDataset: need at least one row");
        if (X.rows() != Y.rows()) {
            std::ostringstream msg;
            msg << "SupervisedDataset: X has " << X.rows() << " rows but Y has "
                << Y.rows();
            throw std::invalid_argument(msg.str());
        }
        if (Y.cols() < 1)
            throw std::invalid_argument("SupervisedDataset: Y needs at least one column");
        if (!X.allFinite() || !Y.allFinite())
            throw std::invalid_argument("SupervisedDataset: non-finite entries");
    }

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
    Eigen::Index k() const { return Y.cols(); }

    Eigen::MatrixXd X; //!< features, n × p
    Eigen::MatrixXd Y; //!< targets, n × k
};

//! A training set with several conditionally independent target draws per
//! observation: row i of Y holds the m targets of observation i.
class MultiTargetDataset
{
public:
    //! @param x feature matrix, n × p.
    //! @param y target draws, n × m.
    MultiTargetDataset(Eigen::MatrixXd x, Eigen::MatrixXd y)
        : X(std::move(x))
        , Y(std::move(y))
    {
        if (X.rows() < 1)
            throw std::invalid_argument("MultiTargetDataset: need at least one row");
        if (X.rows() != Y.rows()) {
            std::ostringstream msg;
            msg << "MultiTargetDataset: X has " << X.rows() << " rows but Y has "
                << Y.rows();
            throw std::invalid_argument(msg.str());
        }
        if (Y.cols() < 1)
            throw std::invalid_argument("MultiTargetDataset: need m >= 1 target draws");
        if (!X.allFinite() || !Y.allFinite())
            throw std::invalid_argument("MultiTargetDataset: non-finite entries");
    }

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }
    Eigen::Index m() const { return Y.cols(); }

    Eigen::MatrixXd X; //!< features, n × p
    Eigen::MatrixXd Y; //!< m target draws per row, n × m
};

//! Additional unpaired marginal samples: feature-only rows and/or
//! target-only rows.  Either block may be empty (zero rows); widths are
//! checked against the paired dataset by the constructions that consume it.
class MarginalDatasets
{
public:
    MarginalDatasets() = default;

    //! @param x feature-only rows, n_x × p (may have zero rows).
    //! @param y target-only rows, n_y × k (may have zero rows).
    MarginalDatasets(Eigen::MatrixXd x, Eigen::MatrixXd y)
        : extra_x(std::move(x))
        , extra_y(std::move(y))
    {
        if (!extra_x.allFinite() || !extra_y.allFinite())
            throw std::invalid_argument("MarginalDatasets: non-finite entries");
    }

    Eigen::Index n_x() const { return extra_x.rows(); }
    Eigen::Index n_y() const { return extra_y.rows(); }

    Eigen::MatrixXd extra_x; //!< feature-only rows, n_x × p
    Eigen::MatrixXd extra_y; //!< target-only rows, n_y × k
};

//! The labelled output of a construction: rows W_i = (x, y) of width p + k
//! with binary labels z_i marking matched pairs (z = 1) versus mismatched
//! pairs (z = 0).  Carries the exact label counts so the realized ratio
//! n_joint / N is available without a re-scan.
class ContrastDataset
{
public:
    //! @param w stacked (x, y) rows, N × (p + k).
    //! @param labels N binary labels.
    //! @param joint count of labels equal to 1.
    //! @param marg count of labels equal to 0.
    ContrastDataset(Eigen::MatrixXd w, std::vector<std::uint8_t> labels,
                    Eigen::Index joint, Eigen::Index marg)
        : W(std::move(w))
        , z(std::move(labels))
        , n_joint(joint)
        , n_marg(marg)
    {
        if (W.rows() < 1)
            throw std::invalid_argument("ContrastDataset: need at least one sample");
        if (static_cast<std::size_t>(W.rows()) != z.size())
            throw std::invalid_argument("ContrastDataset: label count != row count");
        Eigen::Index ones = 0;
        for (auto zi : z) {
            if (zi > 1)
                throw std::invalid_argument("ContrastDataset: labels must be 0 or 1");
            ones += zi;
        }
        if (ones != n_joint || W.rows() - ones != n_marg)
            throw std::invalid_argument(
                "ContrastDataset: recorded label counts do not match the labels");
    }

    Eigen::Index size() const { return W.rows(); }
    Eigen::Index width() const { return W.cols(); }

    //! Realized ratio of matched pairs, n_joint / N.
    double ratio() const
    {
        return static_cast<double>(n_joint) / static_cast<double>(size());
    }

    Eigen::MatrixXd W;           //!< contrast rows, N × (p + k)
    std::vector<std::uint8_t> z; //!< binary labels, length N
    Eigen::Index n_joint;        //!< number of matched rows (z = 1)
    Eigen::Index n_marg;         //!< number of mismatched rows (z = 0)
};

} // namespace mcd
