#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace logogan {

using MatXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecXd = Eigen::VectorXd;

// Sample mean and (n-1)-normalized covariance of row-vector features.
struct FeatureStats {
    VecXd mean;
    MatXd cov;

    static FeatureStats from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.size() < 2) throw std::invalid_argument("need at least 2 feature rows");
        const int n = static_cast<int>(rows.size());
        const int d = static_cast<int>(rows[0].size());
        MatXd x(n, d);
        for (int i = 0; i < n; ++i) {
            if (static_cast<int>(rows[i].size()) != d)
                throw std::invalid_argument("ragged feature rows");
            for (int j = 0; j < d; ++j) x(i, j) = rows[i][j];
        }
        FeatureStats s;
        s.mean = x.colwise().mean();
        const MatXd centered = x.rowwise() - s.mean.transpose();
        s.cov = centered.transpose() * centered / static_cast<double>(n - 1);
        return s;
    }
};

// Symmetric PSD square root via eigendecomposition; small negative
// eigenvalues from roundoff are clamped to zero.
inline MatXd matrix_sqrt_psd(const MatXd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("matrix must be square");
    const MatXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<MatXd> es(sym);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    VecXd ev = es.eigenvalues();
    const double floor_tol = -1e-10 * std::max(1.0, std::abs(ev.maxCoeff()));
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < floor_tol) throw std::invalid_argument("matrix is not PSD");
        ev(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Frechet distance between two Gaussians:
//   |mu_a - mu_b|^2 + tr(Ca + Cb - 2 (Ca^1/2 Cb Ca^1/2)^1/2)
// The symmetric product form keeps the inner matrix PSD.
inline double frechet_distance(const FeatureStats& a, const FeatureStats& b) {
    if (a.mean.size() != b.mean.size()) throw std::invalid_argument("feature dim mismatch");
    const MatXd sqrt_a = matrix_sqrt_psd(a.cov);
    const MatXd inner = matrix_sqrt_psd(sqrt_a * b.cov * sqrt_a);
    const double mean_term = (a.mean - b.mean).squaredNorm();
    double trace_term = a.cov.trace() + b.cov.trace() - 2.0 * inner.trace();
    if (trace_term < 0.0 && trace_term > -1e-8) trace_term = 0.0; // roundoff
    return mean_term + trace_term;
}

// exp of the mean KL divergence between per-sample class distributions and
// their marginal; rows must each sum to 1. 0*log(0) contributes 0.
inline double inception_score(const std::vector<std::vector<double>>& probs) {
    if (probs.empty()) throw std::invalid_argument("no probability rows");
    const int n = static_cast<int>(probs.size());
    const int c = static_cast<int>(probs[0].size());
    std::vector<double> marginal(c, 0.0);
    for (const auto& row : probs) {
        if (static_cast<int>(row.size()) != c) throw std::invalid_argument("ragged rows");
        double sum = 0.0;
        for (double v : row) {
            if (v < 0.0) throw std::invalid_argument("negative probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("rows must sum to 1");
        for (int j = 0; j < c; ++j) marginal[j] += row[j] / n;
    }
    double mean_kl = 0.0;
    for (const auto& row : probs)
        for (int j = 0; j < c; ++j)
            if (row[j] > 0.0) mean_kl += row[j] * std::log(row[j] / marginal[j]) / n;
    return std::exp(mean_kl);
}

} // namespace logogan
