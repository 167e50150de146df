#include "sdelap/oracles/kalman.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "sdelap/error.hpp"

namespace sdelap::oracles {

namespace {

std::vector<int> observed_rows(const Eigen::VectorXd& y) {
  std::vector<int> rows;
  for (Eigen::Index k = 0; k < y.size(); ++k)
    if (!std::isnan(y[k])) rows.push_back(static_cast<int>(k));
  return rows;
}

}  // namespace

KalmanResult kalman_loglik_and_smooth(const LinearChain& ch) {
  const int nodes = static_cast<int>(ch.y.size());
  if (nodes < 1) throw Error(ErrorKind::InvalidArgument, "empty chain");
  std::vector<Eigen::VectorXd> mp(nodes), mf(nodes);
  std::vector<Eigen::MatrixXd> pp(nodes), pf(nodes);
  KalmanResult out;
  for (int i = 0; i < nodes; ++i) {
    if (i == 0) {
      mp[0] = ch.m0;
      pp[0] = ch.P0;
    } else {
      mp[i] = ch.F[i] * mf[i - 1] + ch.c[i];
      pp[i] = ch.F[i] * pf[i - 1] * ch.F[i].transpose() + ch.Q[i];
    }
    mf[i] = mp[i];
    pf[i] = pp[i];
    if (ch.y[i].size() == 0) continue;
    const auto rows = observed_rows(ch.y[i]);
    if (rows.empty()) continue;
    const int k = static_cast<int>(rows.size());
    Eigen::MatrixXd h(k, ch.H.cols());
    Eigen::MatrixXd r(k, k);
    Eigen::VectorXd y(k);
    for (int a = 0; a < k; ++a) {
      h.row(a) = ch.H.row(rows[a]);
      y[a] = ch.y[i][rows[a]];
      for (int b = 0; b < k; ++b) r(a, b) = ch.R(rows[a], rows[b]);
    }
    const Eigen::VectorXd innov = y - h * mp[i];
    const Eigen::MatrixXd s = h * pp[i] * h.transpose() + r;
    const Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "innovation covariance");
    const Eigen::MatrixXd l = llt.matrixL();
    out.loglik += -0.5 * innov.dot(llt.solve(innov)) - l.diagonal().array().log().sum() -
                  0.5 * k * std::log(2.0 * M_PI);
    const Eigen::MatrixXd gain = llt.solve(h * pp[i]).transpose();
    mf[i] = mp[i] + gain * innov;
    pf[i] = pp[i] - gain * h * pp[i];
    pf[i] = 0.5 * (pf[i] + pf[i].transpose()).eval();
  }
  out.filtered_mean = mf;
  out.smoothed_mean.resize(nodes);
  out.smoothed_cov.resize(nodes);
  out.smoothed_mean[nodes - 1] = mf[nodes - 1];
  out.smoothed_cov[nodes - 1] = pf[nodes - 1];
  for (int i = nodes - 2; i >= 0; --i) {
    const Eigen::MatrixXd g = pp[i + 1].ldlt().solve(ch.F[i + 1] * pf[i]).transpose();
    out.smoothed_mean[i] = mf[i] + g * (out.smoothed_mean[i + 1] - mp[i + 1]);
    out.smoothed_cov[i] = pf[i] + g * (out.smoothed_cov[i + 1] - pp[i + 1]) * g.transpose();
  }
  out.smoothed_sd.resize(nodes);
  for (int i = 0; i < nodes; ++i)
    out.smoothed_sd[i] = out.smoothed_cov[i].diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

LinearChain ou_chain(double lambda, double mu, double sigma, const std::vector<double>& times, OuScheme scheme) {
  const int nodes = static_cast<int>(times.size());
  LinearChain ch;
  ch.F.assign(nodes, Eigen::MatrixXd::Zero(1, 1));
  ch.c.assign(nodes, Eigen::VectorXd::Zero(1));
  ch.Q.assign(nodes, Eigen::MatrixXd::Zero(1, 1));
  ch.y.assign(nodes, Eigen::VectorXd());
  ch.H = Eigen::MatrixXd::Identity(1, 1);
  ch.R = Eigen::MatrixXd::Identity(1, 1);
  ch.m0 = Eigen::VectorXd::Constant(1, mu);
  ch.P0 = Eigen::MatrixXd::Constant(1, 1, sigma * sigma / (2.0 * lambda));
  for (int i = 1; i < nodes; ++i) {
    const double h = times[i] - times[i - 1];
    double f = 0.0, c = 0.0, q = 0.0;
    switch (scheme) {
      case OuScheme::Exact:
        f = std::exp(-lambda * h);
        c = mu * (1.0 - f);
        q = sigma * sigma * -std::expm1(-2.0 * lambda * h) / (2.0 * lambda);
        break;
      case OuScheme::EulerMaruyama:
        f = 1.0 - lambda * h;
        c = lambda * mu * h;
        q = sigma * sigma * h;
        break;
      case OuScheme::Trapezoidal: {
        const double den = 1.0 + 0.5 * lambda * h;
        f = (1.0 - 0.5 * lambda * h) / den;
        c = lambda * mu * h / den;
        q = sigma * sigma * h / (den * den);
        break;
      }
    }
    ch.F[i](0, 0) = f;
    ch.c[i][0] = c;
    ch.Q[i](0, 0) = q;
  }
  return ch;
}

double dense_gaussian_loglik(const LinearChain& ch) {
  const int nodes = static_cast<int>(ch.y.size());
  const int n = static_cast<int>(ch.m0.size());
  // Joint moments of (x_0..x_M): mean by propagation, covariance Cov(x_i, x_j)
  // = Phi(i<-j) P_j for i >= j.
  std::vector<Eigen::VectorXd> mean(nodes);
  std::vector<Eigen::MatrixXd> var(nodes);
  mean[0] = ch.m0;
  var[0] = ch.P0;
  for (int i = 1; i < nodes; ++i) {
    mean[i] = ch.F[i] * mean[i - 1] + ch.c[i];
    var[i] = ch.F[i] * var[i - 1] * ch.F[i].transpose() + ch.Q[i];
  }
  Eigen::MatrixXd cov(nodes * n, nodes * n);
  for (int j = 0; j < nodes; ++j) {
    Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
    for (int i = j; i < nodes; ++i) {
      if (i > j) phi = ch.F[i] * phi;
      const Eigen::MatrixXd cij = phi * var[j];
      cov.block(i * n, j * n, n, n) = cij;
      cov.block(j * n, i * n, n, n) = cij.transpose();
    }
  }
  std::vector<std::pair<int, int>> index;  // (node, obs row)
  for (int i = 0; i < nodes; ++i) {
    if (ch.y[i].size() == 0) continue;
    for (Eigen::Index k = 0; k < ch.y[i].size(); ++k)
      if (!std::isnan(ch.y[i][k])) index.emplace_back(i, static_cast<int>(k));
  }
  const int m = static_cast<int>(index.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, nodes * n);
  Eigen::VectorXd y(m), mu(m);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
  for (int p = 0; p < m; ++p) {
    const auto [i, k] = index[p];
    a.block(p, i * n, 1, n) = ch.H.row(k);
    y[p] = ch.y[i][k];
    mu[p] = ch.H.row(k).dot(mean[i]);
    for (int q = 0; q < m; ++q)
      if (index[q].first == i) r(p, q) = ch.R(k, index[q].second);
  }
  const Eigen::MatrixXd s = a * cov * a.transpose() + r;
  const Eigen::LLT<Eigen::MatrixXd> llt(s);
  const Eigen::VectorXd d = y - mu;
  const Eigen::MatrixXd l = llt.matrixL();
  return -0.5 * d.dot(llt.solve(d)) - l.diagonal().array().log().sum() - 0.5 * m * std::log(2.0 * M_PI);
}

}  // namespace sdelap::oracles
