// Copyright 2026 The psmaqb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PSMAQB_ESTIMATOR_HPP
#define PSMAQB_ESTIMATOR_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "psmaqb/core.hpp"

namespace psmaqb {

/// Regularized weighted second-moment matrix
///
///   V = lambda0 I + sum_s w_s a_s a_s^T
///
/// with a lazily refreshed eigendecomposition. Eigenvalues are ascending.
/// While no update has been applied the eigenvectors are the canonical basis
/// in order, so the first action batch is reproducible.
class DesignMatrix {
public:
    DesignMatrix(double lambda0, int n_dim) : lambda0_(lambda0)
    {
        if (!(lambda0 > 0.0) || !std::isfinite(lambda0))
            throw ConfigError("design matrix needs lambda0 > 0, got " + std::to_string(lambda0));
        if (n_dim < 1)
            throw ConfigError("design matrix needs n_dim >= 1");
        v_ = lambda0 * Matrix::Identity(n_dim, n_dim);
        eigvals_ = Vector::Constant(n_dim, lambda0);
        eigvecs_ = Matrix::Identity(n_dim, n_dim);
    }

    /// V += weight a a^T.
    void rank_one_update(const Vector& a, double weight)
    {
        require_same_dim(a.size(), dim(), "rank_one_update");
        if (!std::isfinite(weight) || weight < 0.0)
            throw OutOfRange("rank_one_update: weight must be finite and >= 0, got " + std::to_string(weight));
        if (weight == 0.0)
            return;
        v_.noalias() += weight * a * a.transpose();
        dirty_ = true;
    }

    const Matrix& matrix() const { return v_; }
    int dim() const { return static_cast<int>(v_.rows()); }
    double lambda0() const { return lambda0_; }

    const Vector& eigenvalues() const
    {
        refresh();
        return eigvals_;
    }

    /// Orthonormal eigenvectors as columns, matching eigenvalues().
    const Matrix& eigenvectors() const
    {
        refresh();
        return eigvecs_;
    }

    double lambda_min() const { return eigenvalues()[0]; }
    double lambda_max() const { return eigenvalues()[dim() - 1]; }

    /// V^{-1} rhs through the cached eigendecomposition; rhs may have several columns.
    Matrix solve(const Matrix& rhs) const
    {
        require_same_dim(rhs.rows(), dim(), "DesignMatrix::solve");
        refresh();
        return eigvecs_ * (eigvals_.cwiseInverse().asDiagonal() * (eigvecs_.transpose() * rhs));
    }

    /// x^T V x.
    double quadratic_form(const Vector& x) const
    {
        require_same_dim(x.size(), dim(), "quadratic_form");
        return std::max(0.0, x.dot(v_ * x));
    }

private:
    void refresh() const
    {
        if (!dirty_)
            return;
        Eigen::SelfAdjointEigenSolver<Matrix> es(v_);
        if (es.info() != Eigen::Success)
            throw InvariantViolation("eigendecomposition of the design matrix failed");
        eigvals_ = es.eigenvalues();
        eigvecs_ = es.eigenvectors();
        dirty_ = false;
    }

    double lambda0_;
    Matrix v_;
    mutable Vector eigvals_;
    mutable Matrix eigvecs_;
    mutable bool dirty_ = false;
};

/// ||x||_V = sqrt(x^T V x).
inline double weighted_norm(const Vector& x, const DesignMatrix& v) { return std::sqrt(v.quadratic_form(x)); }

/// Radius of the median-of-means confidence ellipsoid, 9 (sqrt(9 n) + lambda0 |theta|)^2
/// with |theta| = 1.
struct BetaConstant {
    double value = 0.0;
    int n_dim = 0;
    double lambda0 = 0.0;
};

inline BetaConstant beta(int n_dim, double lambda0)
{
    const double root = std::sqrt(9.0 * n_dim) + lambda0;
    return {9.0 * root * root, n_dim, lambda0};
}

/// True iff ||theta - center||^2_V <= radius.
inline bool in_confidence(const Vector& theta, const Vector& center, const DesignMatrix& v, double radius)
{
    require_same_dim(theta.size(), center.size(), "in_confidence");
    return v.quadratic_form(theta - center) <= radius;
}

struct MomSelection {
    int index = 0;        ///< 0-based k*.
    Vector estimate;      ///< theta_tilde_{k*}, not normalized.
    std::vector<double> scores; ///< y_j; empty when k == 1.
};

/// Lower median: the ceil(m/2)-th smallest of m values. Reorders `values`.
inline double lower_median(std::span<double> values)
{
    const auto pos = static_cast<std::ptrdiff_t>((values.size() + 1) / 2 - 1);
    std::nth_element(values.begin(), values.begin() + pos, values.end());
    return values[static_cast<std::size_t>(pos)];
}

/// Median-of-means selection over the columns of `estimates`: the column with
/// the smallest lower-median V-distance to the others; ties go to the lowest index.
inline MomSelection mom_select(const Matrix& estimates, const DesignMatrix& v)
{
    require_same_dim(estimates.rows(), v.dim(), "mom_select");
    const auto k = static_cast<int>(estimates.cols());
    if (k < 1)
        throw InsufficientData("mom_select needs at least one estimate");
    MomSelection sel;
    if (k == 1) {
        sel.estimate = estimates.col(0);
        return sel;
    }
    Matrix dist(k, k);
    for (int j = 0; j < k; ++j) {
        dist(j, j) = 0.0;
        for (int i = j + 1; i < k; ++i)
            dist(j, i) = dist(i, j) = weighted_norm(estimates.col(j) - estimates.col(i), v);
    }
    sel.scores.resize(static_cast<std::size_t>(k));
    std::vector<double> others(static_cast<std::size_t>(k - 1));
    for (int j = 0; j < k; ++j) {
        std::size_t n = 0;
        for (int i = 0; i < k; ++i) {
            if (i != j)
                others[n++] = dist(j, i);
        }
        sel.scores[static_cast<std::size_t>(j)] = lower_median(others);
    }
    sel.index = static_cast<int>(std::min_element(sel.scores.begin(), sel.scores.end()) - sel.scores.begin());
    sel.estimate = estimates.col(sel.index);
    return sel;
}

/// k weighted least-squares estimators sharing one design matrix:
///
///   theta_tilde_i = V^{-1} sum_s w_s r_{s,i} a_s.
///
/// Estimates are re-solved lazily on read.
class EstimatorBank {
public:
    EstimatorBank(int k, double lambda0, int n_dim) : design_(lambda0, n_dim), b_(Matrix::Zero(n_dim, k))
    {
        if (k < 1)
            throw ConfigError("estimator bank needs k >= 1");
    }

    /// One action with k subsample rewards, all carrying weight `inv_sigma2`.
    void update(const Vector& a, std::span<const double> rewards, double inv_sigma2)
    {
        require_same_dim(static_cast<Eigen::Index>(rewards.size()), b_.cols(), "EstimatorBank::update rewards");
        require_same_dim(a.size(), b_.rows(), "EstimatorBank::update action");
        design_.rank_one_update(a, inv_sigma2);
        for (Eigen::Index i = 0; i < b_.cols(); ++i)
            b_.col(i).noalias() += (inv_sigma2 * rewards[static_cast<std::size_t>(i)]) * a;
        stale_ = true;
    }

    /// Columns are theta_tilde_1 .. theta_tilde_k.
    const Matrix& estimates() const
    {
        if (stale_) {
            theta_ = design_.solve(b_);
            stale_ = false;
        }
        return theta_;
    }

    MomSelection select() const { return mom_select(estimates(), design_); }

    const DesignMatrix& design() const { return design_; }
    const Matrix& accumulators() const { return b_; }
    int k() const { return static_cast<int>(b_.cols()); }
    int n_dim() const { return static_cast<int>(b_.rows()); }

private:
    DesignMatrix design_;
    Matrix b_;
    mutable Matrix theta_;
    mutable bool stale_ = true;
};

} // namespace psmaqb

#endif
