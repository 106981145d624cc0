#include "oracles.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracle {

double ks_uniform_pvalue(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double u = std::clamp(sample[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - u, u - static_cast<double>(i) / n});
  }
  const double root = std::sqrt(n);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double b0,
                       double lambda) {
  const Eigen::VectorXd r = y - X * beta - Eigen::VectorXd::Constant(y.size(), b0);
  return r.squaredNorm() / (2.0 * static_cast<double>(y.size())) + lambda * beta.lpNorm<1>();
}

namespace {

struct Scan {
  // Profiling out the intercept leaves a quadratic in centered moments.
  Eigen::MatrixXd gram;  // Xc'Xc / n
  Eigen::VectorXd cross; // Xc'yc / n
  double yy = 0.0;       // yc'yc / n
  Eigen::VectorXd x_mean;
  double y_mean = 0.0;
  double lambda = 0.0;
  LatticeResult best;

  Scan(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lam) : lambda(lam) {
    const double n = static_cast<double>(y.size());
    x_mean = X.colwise().mean().transpose();
    y_mean = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - x_mean.transpose();
    const Eigen::VectorXd yc = y.array() - y_mean;
    gram = Xc.transpose() * Xc / n;
    cross = Xc.transpose() * yc / n;
    yy = yc.squaredNorm() / n;
    best.objective = std::numeric_limits<double>::infinity();
  }

  void evaluate(const double* beta, Index p) {
    double value = yy;
    double l1 = 0.0;
    for (Index j = 0; j < p; ++j) {
      value -= 2.0 * beta[j] * cross(j);
      for (Index k = 0; k < p; ++k) value += beta[j] * gram(j, k) * beta[k];
      l1 += std::abs(beta[j]);
    }
    value = 0.5 * value + lambda * l1;
    if (value < best.objective) {
      best.objective = value;
      best.beta = Eigen::Map<const Eigen::VectorXd>(beta, p);
      best.intercept = y_mean - x_mean.dot(best.beta);
    }
  }

  // Every lattice point center + step * k with |k_j| <= half_width.
  void grid(const Eigen::VectorXd& center, double step, int half_width) {
    const Index p = center.size();
    std::vector<int> k(static_cast<std::size_t>(p), -half_width);
    std::vector<double> beta(static_cast<std::size_t>(p));
    while (true) {
      for (Index j = 0; j < p; ++j) beta[j] = std::round(center(j) / step + k[j]) * step;
      evaluate(beta.data(), p);
      Index j = 0;
      while (j < p && ++k[j] > half_width) {
        k[j] = -half_width;
        ++j;
      }
      if (j == p) break;
    }
  }
};

double minimax_of(const std::vector<Index>& members, const Eigen::MatrixXd& d, Index* prototype) {
  double best = std::numeric_limits<double>::infinity();
  for (Index x : members) {
    double worst = 0.0;
    for (Index z : members) worst = std::max(worst, d(x, z));
    if (worst < best) {
      best = worst;
      *prototype = x;
    }
  }
  return best;
}

}  // namespace

LatticeResult lattice_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda, double bound) {
  Scan scan(X, y, lambda);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(X.cols());
  scan.grid(zero, 0.1, static_cast<int>(std::round(bound / 0.1)));
  for (double step : {0.01, 0.001}) {
    const Eigen::VectorXd center = scan.best.beta;
    scan.grid(center, step, 20);
  }
  return scan.best;
}

std::vector<BruteMerge> brute_minimax(const Eigen::MatrixXd& d) {
  const Index n = d.rows();
  std::vector<std::vector<Index>> clusters;
  for (Index i = 0; i < n; ++i) clusters.push_back({i});
  std::vector<BruteMerge> merges;
  while (clusters.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    Index best_proto = 0;
    std::pair<Index, Index> best_key{n, n};
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        std::vector<Index> u = clusters[i];
        u.insert(u.end(), clusters[j].begin(), clusters[j].end());
        std::sort(u.begin(), u.end());
        Index proto = 0;
        const double r = minimax_of(u, d, &proto);
        const Index lo = std::min(clusters[i].front(), clusters[j].front());
        const Index hi = std::max(clusters[i].front(), clusters[j].front());
        const std::pair<Index, Index> key{lo, hi};
        if (r < best || (r == best && key < best_key)) {
          best = r;
          bi = i;
          bj = j;
          best_proto = proto;
          best_key = key;
        }
      }
    }
    std::vector<Index> u = clusters[bi];
    u.insert(u.end(), clusters[bj].begin(), clusters[bj].end());
    std::sort(u.begin(), u.end());
    merges.push_back({u, best, best_proto});
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    clusters[bi] = u;
    std::sort(clusters.begin(), clusters.end());
  }
  return merges;
}

Eigen::VectorXd step_up_qvalues(const Eigen::VectorXd& p, bool dependence_adjusted) {
  const Index m = p.size();
  double c = 1.0;
  if (dependence_adjusted) {
    c = 0.0;
    for (Index k = 1; k <= m; ++k) c += 1.0 / static_cast<double>(k);
  }
  // rank(i) = number of p-values strictly below p_i plus ties before i.
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return p(a) < p(b); });
  Eigen::VectorXd q(m);
  for (Index r = 0; r < m; ++r) {
    double best = 1.0;
    for (Index s = r; s < m; ++s) {
      best = std::min(best, c * static_cast<double>(m) * p(order[static_cast<std::size_t>(s)]) / static_cast<double>(s + 1));
    }
    q(order[static_cast<std::size_t>(r)]) = best;
  }
  return q;
}

OlsOracle ols_normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const LMat Xl = X.cast<long double>();
  const LVec yl = y.cast<long double>();
  const LMat xtx = Xl.transpose() * Xl;
  const LMat inv = xtx.inverse();
  const LVec beta = inv * (Xl.transpose() * yl);
  const LVec r = yl - Xl * beta;
  const long double rss = r.squaredNorm();
  const long double s2 = rss / static_cast<long double>(X.rows() - X.cols());
  OlsOracle out;
  out.beta = beta.cast<double>();
  out.se.resize(X.cols());
  for (Index j = 0; j < X.cols(); ++j) out.se(j) = static_cast<double>(std::sqrt(s2 * inv(j, j)));
  out.rss = static_cast<double>(rss);
  return out;
}

double t_two_sided(double t, double df) {
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double f_survival(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

}  // namespace oracle
