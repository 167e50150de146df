#include "sdelap/inference/fit.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "sdelap/inference/parallel.hpp"

namespace sdelap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Problem {
  const LoglikFn& loglik;
  std::vector<Param> params;
  std::vector<int> free;
  int threads = 1;
  int evaluations = 0;

  std::vector<double> theta(const Eigen::VectorXd& phi) const {
    std::vector<double> t;
    for (const auto& p : params) t.push_back(p.value);
    for (std::size_t k = 0; k < free.size(); ++k) {
      const auto& p = params[free[k]];
      t[free[k]] = p.positive ? std::exp(phi[k]) : phi[k];
    }
    return t;
  }

  Eigen::VectorXd phi0() const {
    Eigen::VectorXd phi(free.size());
    for (std::size_t k = 0; k < free.size(); ++k) {
      const auto& p = params[free[k]];
      if (p.positive && !(p.value > 0.0))
        throw Error(ErrorKind::InvalidArgument, "parameter " + p.name + " must start > 0");
      phi[k] = p.positive ? std::log(p.value) : p.value;
    }
    return phi;
  }

  /// -log L; +inf where the inner problem fails.
  double objective(const Eigen::VectorXd& phi, const Eigen::VectorXd* warm, Eigen::VectorXd* mode) {
    ++evaluations;
    return eval(phi, warm, mode);
  }

  double eval(const Eigen::VectorXd& phi, const Eigen::VectorXd* warm, Eigen::VectorXd* mode) const {
    try {
      const double v = -loglik(theta(phi), warm, mode);
      return std::isfinite(v) ? v : kInf;
    } catch (const Error&) {
      return kInf;
    }
  }

  /// Values at a batch of points, evaluated independently.
  std::vector<double> batch(const std::vector<Eigen::VectorXd>& pts, const Eigen::VectorXd* warm) {
    std::vector<double> out(pts.size());
    parallel_for(static_cast<int>(pts.size()), threads, [&](int i) { out[i] = eval(pts[i], warm, nullptr); });
    evaluations += static_cast<int>(pts.size());
    return out;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& phi, double f0, double rel, const Eigen::VectorXd* warm) {
    const Eigen::Index k = phi.size();
    std::vector<Eigen::VectorXd> pts;
    Eigen::VectorXd h(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      h[i] = rel * std::max(1.0, std::abs(phi[i]));
      Eigen::VectorXd a = phi, b = phi;
      a[i] += h[i];
      b[i] -= h[i];
      pts.push_back(a);
      pts.push_back(b);
    }
    const auto v = batch(pts, warm);
    Eigen::VectorXd g(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double fp = v[2 * i], fm = v[2 * i + 1];
      if (std::isfinite(fp) && std::isfinite(fm))
        g[i] = (fp - fm) / (2.0 * h[i]);
      else if (std::isfinite(fp))
        g[i] = (fp - f0) / h[i];
      else if (std::isfinite(fm))
        g[i] = (f0 - fm) / h[i];
      else
        throw Error(ErrorKind::NonFinite, "log-likelihood undefined around the current parameters");
    }
    return g;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& phi, double f0, double rel, const Eigen::VectorXd* warm) {
    const Eigen::Index k = phi.size();
    Eigen::VectorXd h(k);
    for (Eigen::Index i = 0; i < k; ++i) h[i] = rel * std::max(1.0, std::abs(phi[i]));
    std::vector<Eigen::VectorXd> pts;
    auto shifted = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
      Eigen::VectorXd p = phi;
      p[i] += si * h[i];
      if (j >= 0) p[j] += sj * h[j];
      return p;
    };
    for (Eigen::Index i = 0; i < k; ++i) {
      pts.push_back(shifted(i, 1, -1, 0));
      pts.push_back(shifted(i, -1, -1, 0));
    }
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < i; ++j) {
        pts.push_back(shifted(i, 1, j, 1));
        pts.push_back(shifted(i, 1, j, -1));
        pts.push_back(shifted(i, -1, j, 1));
        pts.push_back(shifted(i, -1, j, -1));
      }
    const auto v = batch(pts, warm);
    Eigen::MatrixXd H(k, k);
    std::size_t at = 0;
    for (Eigen::Index i = 0; i < k; ++i, at += 2) H(i, i) = (v[at] - 2.0 * f0 + v[at + 1]) / (h[i] * h[i]);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < i; ++j, at += 4) {
        H(i, j) = (v[at] - v[at + 1] - v[at + 2] + v[at + 3]) / (4.0 * h[i] * h[j]);
        H(j, i) = H(i, j);
      }
    return H;
  }
};

}  // namespace

FitResult maximize_loglik(const LoglikFn& loglik, std::vector<Param> params, const FitOptions& opts) {
  Problem pb{loglik, std::move(params), {}, resolve_threads(opts.threads)};
  for (std::size_t k = 0; k < pb.params.size(); ++k)
    if (!pb.params[k].fixed) pb.free.push_back(static_cast<int>(k));

  FitResult out;
  out.free_index = pb.free;
  Eigen::VectorXd phi = pb.phi0();
  Eigen::VectorXd mode;
  double f = pb.objective(phi, nullptr, &mode);
  if (!std::isfinite(f)) throw Error(ErrorKind::NonFinite, "log-likelihood at the initial parameters");

  const Eigen::Index k = phi.size();
  if (k > 0) {
    Eigen::VectorXd g = pb.gradient(phi, f, opts.fd_step, &mode);
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(k, k);
    bool scaled = false;
    for (int it = 0; it < opts.max_iters; ++it) {
      out.iterations = it;
      if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
        out.converged = true;
        break;
      }
      Eigen::VectorXd p = -hinv * g;
      if (!(g.dot(p) < 0.0)) {
        hinv.setIdentity();
        p = -g;
      }
      const double pmax = p.lpNorm<Eigen::Infinity>();
      if (pmax > 2.0) p *= 2.0 / pmax;
      const double slope = g.dot(p);
      // Possible gain under the quadratic model, in log-likelihood units.
      if (-0.5 * slope <= 1e-7 && it > 0) {
        out.converged = true;
        out.message = "predicted improvement below 1e-7";
        break;
      }
      double t = 1.0;
      bool accepted = false;
      Eigen::VectorXd phi_t, mode_t;
      double f_t = kInf;
      for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
        phi_t = phi + t * p;
        f_t = pb.objective(phi_t, &mode, &mode_t);
        if (f_t <= f + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (!hinv.isIdentity()) {
          hinv.setIdentity();
          continue;
        }
        out.message = "line search failed";
        break;
      }
      const Eigen::VectorXd s = phi_t - phi;
      const double df = f - f_t;
      phi = phi_t;
      f = f_t;
      mode = mode_t;
      const Eigen::VectorXd g_new = pb.gradient(phi, f, opts.fd_step, &mode);
      const Eigen::VectorXd y = g_new - g;
      g = g_new;
      const double sy = s.dot(y);
      if (sy > 1e-12 * s.norm() * y.norm()) {
        if (!scaled) {
          hinv = (sy / y.squaredNorm()) * Eigen::MatrixXd::Identity(k, k);
          scaled = true;
        }
        const double rho = 1.0 / sy;
        const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(k, k) - rho * s * y.transpose();
        hinv = a * hinv * a.transpose() + rho * s * s.transpose();
      }
      if (std::abs(df) <= opts.f_tol * (1.0 + std::abs(f)) && s.lpNorm<Eigen::Infinity>() <= 1e-8) {
        out.converged = true;
        out.message = "no further change";
        break;
      }
      out.iterations = it + 1;
    }
    out.grad_norm = g.lpNorm<Eigen::Infinity>();
    if (!out.converged && out.message.empty()) out.message = "iteration limit reached";
  } else {
    out.converged = true;
  }

  out.loglik = -f;
  out.mode = mode;
  const std::vector<double> theta = pb.theta(phi);
  out.params = pb.params;
  for (std::size_t i = 0; i < theta.size(); ++i) out.params[i].value = theta[i];
  out.sd.assign(theta.size(), std::numeric_limits<double>::quiet_NaN());

  if (k > 0) {
    const Eigen::MatrixXd h = pb.hessian(phi, f, opts.hessian_step, &mode);
    const Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (!h.allFinite() || llt.info() != Eigen::Success) {
      out.hessian_pd = false;
      out.cov = Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN());
      if (!out.message.empty()) out.message += "; ";
      out.message += "Hessian of the log-likelihood is not negative definite, standard errors unavailable";
    } else {
      const Eigen::MatrixXd cov_phi = llt.solve(Eigen::MatrixXd::Identity(k, k));
      Eigen::VectorXd jac(k);
      for (Eigen::Index i = 0; i < k; ++i) jac[i] = out.params[pb.free[i]].positive ? theta[pb.free[i]] : 1.0;
      out.cov = jac.asDiagonal() * cov_phi * jac.asDiagonal();
      for (Eigen::Index i = 0; i < k; ++i) out.sd[pb.free[i]] = std::sqrt(out.cov(i, i));
    }
  }
  out.evaluations = pb.evaluations;
  return out;
}

}  // namespace sdelap
