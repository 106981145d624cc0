#include "amf/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amf/distributions.hpp"
#include "amf/error.hpp"

namespace amf {
namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kSpanTolerance = 1e-8;

bool has_constant_column(const Eigen::MatrixXd& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (X.rows() > 0 && X(0, j) != 0.0 && (X.col(j).array() == X(0, j)).all()) return true;
  }
  return false;
}

}  // namespace

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out(X.rows(), X.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(X.cols()) = X;
  return out;
}

Eigen::VectorXd OlsFit::predict(const Eigen::MatrixXd& X) const {
  const bool added = X.cols() + 1 == coefficients.size();
  if (added) return coefficients(0) + (X * coefficients.tail(X.cols())).array();
  if (X.cols() != coefficients.size()) throw Error(ErrorCode::kLengthMismatch, "prediction design width");
  return X * coefficients;
}

OlsFit ols(const Eigen::MatrixXd& X_in, const Eigen::VectorXd& y, Intercept intercept) {
  if (X_in.rows() != y.size()) throw Error(ErrorCode::kLengthMismatch, "design rows differ from response length");
  OlsFit fit;
  fit.design = intercept == Intercept::kAdd ? with_intercept(X_in) : X_in;
  fit.response = y;
  const Eigen::MatrixXd& X = fit.design;
  fit.n = X.rows();
  fit.k = X.cols();
  if (fit.k == 0) throw Error(ErrorCode::kInvalidArgument, "design has no columns");
  if (fit.n <= fit.k) {
    throw Error(ErrorCode::kTooFewObservations,
                "need more observations (" + std::to_string(fit.n) + ") than regressors (" + std::to_string(fit.k) + ")");
  }
  if (!X.allFinite() || !y.allFinite()) throw Error(ErrorCode::kInvalidArgument, "non-finite regression input");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < fit.k) {
    throw Error(ErrorCode::kRankDeficient,
                "design rank " + std::to_string(qr.rank()) + " below column count " + std::to_string(fit.k));
  }
  fit.coefficients = qr.solve(y);
  fit.fitted = X * fit.coefficients;
  fit.residuals = y - fit.fitted;
  fit.rss = fit.residuals.squaredNorm();
  fit.df_resid = fit.n - fit.k;
  fit.sigma2 = fit.rss / static_cast<double>(fit.df_resid);

  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(fit.k, fit.k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd R_inv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(fit.k, fit.k));
  const Eigen::MatrixXd permuted = R_inv * R_inv.transpose();
  const auto& perm = qr.colsPermutation();
  fit.cov_unscaled = perm * permuted * perm.transpose();

  fit.std_errors = (fit.sigma2 * fit.cov_unscaled.diagonal().array()).sqrt();
  fit.t_stats.resize(fit.k);
  fit.p_values.resize(fit.k);
  for (Eigen::Index j = 0; j < fit.k; ++j) {
    if (fit.std_errors(j) > 0.0) {
      fit.t_stats(j) = fit.coefficients(j) / fit.std_errors(j);
      fit.p_values(j) = dist::student_t_two_sided(fit.t_stats(j), static_cast<double>(fit.df_resid));
    } else {
      // Exact fit: infinite t unless the coefficient itself is zero.
      fit.t_stats(j) = fit.coefficients(j) == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(),
                                                                         fit.coefficients(j));
      fit.p_values(j) = fit.coefficients(j) == 0.0 ? 1.0 : 0.0;
    }
  }

  fit.intercept_included = intercept == Intercept::kAdd || has_constant_column(X);
  const double n = static_cast<double>(fit.n);
  const double k = static_cast<double>(fit.k);
  if (fit.intercept_included) {
    fit.tss = (y.array() - y.mean()).square().sum();
    if (fit.tss > 0.0) {
      fit.r2 = 1.0 - fit.rss / fit.tss;
      fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (n - 1.0) / (n - k);
    } else {
      fit.r2 = fit.adj_r2 = std::numeric_limits<double>::quiet_NaN();
    }
  } else {
    fit.tss = y.squaredNorm();
    if (fit.tss > 0.0) {
      fit.r2 = 1.0 - fit.rss / fit.tss;
      fit.adj_r2 = 1.0 - (1.0 - fit.r2) * n / (n - k);
    } else {
      fit.r2 = fit.adj_r2 = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return fit;
}

Eigen::VectorXd project_out(const Eigen::VectorXd& target, const Eigen::VectorXd& direction) {
  if (target.size() != direction.size()) throw Error(ErrorCode::kLengthMismatch, "projection vectors differ in length");
  const double norm2 = direction.squaredNorm();
  if (!(norm2 > 0.0)) throw Error(ErrorCode::kZeroDirection, "cannot project onto a zero vector");
  return target - (direction.dot(target) / norm2) * direction;
}

FTestResult f_test_from_rss(double rss_restricted, double rss_full, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw Error(ErrorCode::kNotNested, "F test needs positive degrees of freedom");
  if (!(rss_full > 0.0)) throw Error(ErrorCode::kZeroResidual, "full model fits exactly");
  FTestResult out;
  out.df1 = df1;
  out.df2 = df2;
  out.f_stat = std::max(0.0, (rss_restricted - rss_full) / df1) / (rss_full / df2);
  out.p_value = dist::f_survival(out.f_stat, df1, df2);
  return out;
}

FTestResult nested_f_test(const OlsFit& restricted, const OlsFit& full) {
  if (restricted.n != full.n || restricted.response != full.response) {
    throw Error(ErrorCode::kNotNested, "models were fitted to different responses");
  }
  if (restricted.k >= full.k) throw Error(ErrorCode::kNotNested, "full model must have more regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(full.design);
  qr.setThreshold(kRankTolerance);
  for (Eigen::Index j = 0; j < restricted.design.cols(); ++j) {
    const Eigen::VectorXd col = restricted.design.col(j);
    const Eigen::VectorXd resid = col - full.design * qr.solve(col);
    if (resid.norm() > kSpanTolerance * std::max(1.0, col.norm())) {
      throw Error(ErrorCode::kNotNested, "restricted regressor outside the full model's span");
    }
  }
  if (!(full.rss > 1e-28 * std::max(1.0, full.response.squaredNorm()))) {
    throw Error(ErrorCode::kZeroResidual, "full model fits exactly");
  }
  return f_test_from_rss(restricted.rss, full.rss, static_cast<double>(full.k - restricted.k),
                         static_cast<double>(full.df_resid));
}

WelchResult welch_test(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::kTooFewObservations, "Welch test needs two values per sample");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = a.mean();
  const double mb = b.mean();
  const double va = (a.array() - ma).square().sum() / (na - 1.0);
  const double vb = (b.array() - mb).square().sum() / (nb - 1.0);
  const double sa = va / na;
  const double sb = vb / nb;
  WelchResult out;
  if (!(sa + sb > 0.0)) {
    out.t_stat = 0.0;
    out.df = na + nb - 2.0;
    out.p_value = 0.5;
    return out;
  }
  out.t_stat = (ma - mb) / std::sqrt(sa + sb);
  out.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  out.p_value = 1.0 - dist::student_t_cdf(out.t_stat, out.df);
  if (out.t_stat > 0.0) out.p_value = 0.5 * dist::student_t_two_sided(out.t_stat, out.df);
  return out;
}

double out_of_sample_r2(const Eigen::VectorXd& predicted, const Eigen::VectorXd& realized,
                        const Eigen::VectorXd& baseline) {
  if (predicted.size() != realized.size() || baseline.size() != realized.size() || realized.size() == 0) {
    throw Error(ErrorCode::kLengthMismatch, "out-of-sample R2 inputs must share a positive length");
  }
  const double sse_base = (realized - baseline).squaredNorm();
  if (!(sse_base > 0.0)) throw Error(ErrorCode::kZeroBaselineSse, "baseline forecast is exact");
  return 1.0 - (realized - predicted).squaredNorm() / sse_base;
}

}  // namespace amf
