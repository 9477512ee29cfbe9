#include "spdc/fit.hpp"

#include <cmath>
#include <sstream>

#include "spdc/errors.hpp"

namespace spdc {

namespace {

// Solve A x = b in place for a small dense system; returns false when A is
// numerically singular. A is row-major n x n.
bool solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n,
                 std::vector<double>& x) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::fabs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::fabs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best)) return false;
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
      std::swap(b[pivot], b[col]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

// Inverse of a small dense matrix by solving against unit vectors.
bool invert_dense(const std::vector<double>& a, std::size_t n, std::vector<double>& inv) {
  inv.assign(n * n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> e(n, 0.0);
    e[col] = 1.0;
    std::vector<double> x;
    if (!solve_dense(a, e, n, x)) return false;
    for (std::size_t r = 0; r < n; ++r) inv[r * n + col] = x[r];
  }
  return true;
}

}  // namespace

LmResult lm_fit(const std::vector<double>& initial, std::size_t n_points,
                const LmModelFn& model, const std::vector<double>& observations,
                const std::vector<double>& weights, const LmOptions& opt) {
  const std::size_t np = initial.size();
  if (np == 0) fail(ErrorCategory::domain, "fit has no parameters");
  if (n_points < np) fail(ErrorCategory::domain, "fewer data points than fit parameters");
  if (observations.size() != n_points || weights.size() != n_points)
    fail(ErrorCategory::domain, "observation and weight arrays must match the point count");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      fail(ErrorCategory::domain, "fit weights must be finite and non-negative");

  std::vector<double> params = initial;
  std::vector<double> grad(np);

  auto chi_square = [&](const std::vector<double>& p) {
    double acc = 0.0;
    double value;
    for (std::size_t i = 0; i < n_points; ++i) {
      model(p, i, value, nullptr);
      const double r = observations[i] - value;
      acc += weights[i] * r * r;
    }
    return acc;
  };

  double chi = chi_square(params);
  if (!std::isfinite(chi))
    fail(ErrorCategory::estimate, "initial fit parameters give a non-finite residual");

  double lambda = opt.initial_lambda;
  int iter = 0;
  bool converged = false;

  std::vector<double> jtj(np * np), jtr(np);
  for (; iter < opt.max_iterations && !converged; ++iter) {
    std::fill(jtj.begin(), jtj.end(), 0.0);
    std::fill(jtr.begin(), jtr.end(), 0.0);
    double value;
    for (std::size_t i = 0; i < n_points; ++i) {
      model(params, i, value, grad.data());
      const double r = observations[i] - value;
      const double w = weights[i];
      for (std::size_t a = 0; a < np; ++a) {
        jtr[a] += w * grad[a] * r;
        for (std::size_t b = a; b < np; ++b) jtj[a * np + b] += w * grad[a] * grad[b];
      }
    }
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < a; ++b) jtj[a * np + b] = jtj[b * np + a];

    // Try damped steps, growing lambda until chi-square improves.
    bool stepped = false;
    while (lambda < 1e12) {
      std::vector<double> a = jtj;
      for (std::size_t d = 0; d < np; ++d) {
        const double diag = jtj[d * np + d];
        a[d * np + d] = diag + lambda * (diag > 0.0 ? diag : 1.0);
      }
      std::vector<double> step;
      if (!solve_dense(a, jtr, np, step)) {
        lambda *= 10.0;
        continue;
      }
      std::vector<double> trial(np);
      for (std::size_t d = 0; d < np; ++d) trial[d] = params[d] + step[d];
      const double trial_chi = chi_square(trial);
      if (std::isfinite(trial_chi) && trial_chi <= chi) {
        double max_rel = 0.0;
        for (std::size_t d = 0; d < np; ++d)
          max_rel = std::max(max_rel,
                             std::fabs(step[d]) / (std::fabs(params[d]) + 1e-300));
        const double rel_drop = (chi - trial_chi) / (chi + 1e-300);
        params = trial;
        chi = trial_chi;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (max_rel < opt.tolerance || rel_drop < opt.tolerance) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // No downhill step exists at any damping: treat the current point as
      // the minimum if the gradient is already tiny, otherwise give up.
      double gnorm = 0.0;
      for (double g : jtr) gnorm += g * g;
      if (std::sqrt(gnorm) < 1e-10 * (1.0 + chi)) {
        converged = true;
      } else {
        std::ostringstream msg;
        msg << "fit stalled after " << iter + 1 << " iterations (chi2=" << chi << ", params=";
        for (std::size_t d = 0; d < np; ++d) msg << (d ? "," : "") << params[d];
        msg << ")";
        fail(ErrorCategory::estimate, msg.str());
      }
    }
  }

  if (!converged) {
    std::ostringstream msg;
    msg << "fit did not converge in " << opt.max_iterations << " iterations (chi2=" << chi
        << ", params=";
    for (std::size_t d = 0; d < np; ++d) msg << (d ? "," : "") << params[d];
    msg << ")";
    fail(ErrorCategory::estimate, msg.str());
  }

  // Covariance from the undamped normal matrix at the solution.
  std::fill(jtj.begin(), jtj.end(), 0.0);
  double value;
  for (std::size_t i = 0; i < n_points; ++i) {
    model(params, i, value, grad.data());
    const double w = weights[i];
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = a; b < np; ++b) jtj[a * np + b] += w * grad[a] * grad[b];
  }
  for (std::size_t a = 0; a < np; ++a)
    for (std::size_t b = 0; b < a; ++b) jtj[a * np + b] = jtj[b * np + a];

  LmResult out;
  out.params = params;
  out.chi_square = chi;
  out.points = n_points;
  out.iterations = iter;
  out.uncertainties.assign(np, 0.0);
  std::vector<double> cov;
  if (invert_dense(jtj, np, cov)) {
    for (std::size_t d = 0; d < np; ++d)
      out.uncertainties[d] = cov[d * np + d] > 0.0 ? std::sqrt(cov[d * np + d]) : 0.0;
  }
  return out;
}

}  // namespace spdc
