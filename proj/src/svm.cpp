#include "attentiv/svm.hpp"

#include "attentiv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace attentiv {

namespace {

constexpr double kTau = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Dual of the soft-margin problem with a linear kernel:
//   min 0.5 a'Qa - e'a   s.t. y'a = 0, 0 <= a <= C,  Q_ij = y_i y_j x_i.x_j
class SmoSolver {
 public:
  SmoSolver(const FeatureMatrix& m, const SvmParams& params)
      : m_(m), C_(params.C), eps_(params.tol), n_(m.n),
        y_(n_), alpha_(n_, 0.0), grad_(n_, -1.0), qd_(n_), qi_(n_), qj_(n_) {
    for (std::size_t t = 0; t < n_; ++t) {
      y_[t] = m.label(t) == 1 ? 1.0 : -1.0;
      qd_[t] = dot(m.row(t), m.row(t));
    }
  }

  std::size_t run(std::size_t max_iter, bool& converged) {
    std::size_t iter = 0;
    converged = false;
    while (iter < max_iter) {
      std::size_t i = 0;
      std::size_t j = 0;
      if (!select_working_set(i, j)) {
        converged = true;
        break;
      }
      ++iter;
      update_pair(i, j);
    }
    if (!converged) {
      std::size_t i = 0;
      std::size_t j = 0;
      converged = !select_working_set(i, j);
    }
    return iter;
  }

  double rho() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -ub;
    double sum_free = 0.0;
    std::size_t nr_free = 0;
    for (std::size_t t = 0; t < n_; ++t) {
      const double yg = y_[t] * grad_[t];
      if (alpha_[t] >= C_) {
        if (y_[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (alpha_[t] <= 0.0) {
        if (y_[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++nr_free;
        sum_free += yg;
      }
    }
    return nr_free > 0 ? sum_free / static_cast<double>(nr_free) : (ub + lb) / 2.0;
  }

  std::vector<double> weights() const {
    std::vector<double> w(m_.d, 0.0);
    for (std::size_t t = 0; t < n_; ++t) {
      if (alpha_[t] == 0.0) continue;
      const auto x = m_.row(t);
      for (std::size_t k = 0; k < m_.d; ++k) w[k] += alpha_[t] * y_[t] * x[k];
    }
    return w;
  }

  const std::vector<double>& alphas() const { return alpha_; }

 private:
  void fill_row(std::size_t i, std::vector<double>& out) const {
    const auto xi = m_.row(i);
    for (std::size_t t = 0; t < n_; ++t) out[t] = y_[i] * y_[t] * dot(xi, m_.row(t));
  }

  bool upper_free(std::size_t t) const { return alpha_[t] < C_; }
  bool lower_free(std::size_t t) const { return alpha_[t] > 0.0; }

  // Returns false once the maximal KKT violation is below eps.
  bool select_working_set(std::size_t& out_i, std::size_t& out_j) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t gmax_idx = -1;
    for (std::size_t t = 0; t < n_; ++t) {
      if (y_[t] > 0) {
        if (upper_free(t) && -grad_[t] >= gmax) {
          gmax = -grad_[t];
          gmax_idx = static_cast<std::ptrdiff_t>(t);
        }
      } else if (lower_free(t) && grad_[t] >= gmax) {
        gmax = grad_[t];
        gmax_idx = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (gmax_idx < 0) return false;
    const auto i = static_cast<std::size_t>(gmax_idx);
    fill_row(i, qi_);

    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t gmin_idx = -1;
    double obj_diff_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n_; ++t) {
      if (y_[t] > 0) {
        if (!lower_free(t)) continue;
        const double grad_diff = gmax + grad_[t];
        gmax2 = std::max(gmax2, grad_[t]);
        if (grad_diff > 0) {
          double quad = qd_[i] + qd_[t] - 2.0 * y_[i] * qi_[t];
          if (quad <= 0) quad = kTau;
          const double obj_diff = -(grad_diff * grad_diff) / quad;
          if (obj_diff <= obj_diff_min) {
            gmin_idx = static_cast<std::ptrdiff_t>(t);
            obj_diff_min = obj_diff;
          }
        }
      } else {
        if (!upper_free(t)) continue;
        const double grad_diff = gmax - grad_[t];
        gmax2 = std::max(gmax2, -grad_[t]);
        if (grad_diff > 0) {
          double quad = qd_[i] + qd_[t] + 2.0 * y_[i] * qi_[t];
          if (quad <= 0) quad = kTau;
          const double obj_diff = -(grad_diff * grad_diff) / quad;
          if (obj_diff <= obj_diff_min) {
            gmin_idx = static_cast<std::ptrdiff_t>(t);
            obj_diff_min = obj_diff;
          }
        }
      }
    }
    if (gmax + gmax2 < eps_ || gmin_idx < 0) return false;
    out_i = i;
    out_j = static_cast<std::size_t>(gmin_idx);
    return true;
  }

  // Analytic two-variable update with clipping to the box; qi_ holds row i.
  void update_pair(std::size_t i, std::size_t j) {
    fill_row(j, qj_);
    const double old_ai = alpha_[i];
    const double old_aj = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];

    if (y_[i] != y_[j]) {
      double quad = qd_[i] + qd_[j] + 2.0 * qi_[j];
      if (quad <= 0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > 0) {
        if (ai > C_) { ai = C_; aj = C_ - diff; }
      } else if (aj > C_) {
        aj = C_;
        ai = C_ + diff;
      }
    } else {
      double quad = qd_[i] + qd_[j] - 2.0 * qi_[j];
      if (quad <= 0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C_) {
        if (ai > C_) { ai = C_; aj = sum - C_; }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > C_) {
        if (aj > C_) { aj = C_; ai = sum - C_; }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }

    const double dai = ai - old_ai;
    const double daj = aj - old_aj;
    for (std::size_t t = 0; t < n_; ++t) grad_[t] += qi_[t] * dai + qj_[t] * daj;
  }

  const FeatureMatrix& m_;
  double C_;
  double eps_;
  std::size_t n_;
  std::vector<double> y_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  std::vector<double> qd_;
  std::vector<double> qi_;
  std::vector<double> qj_;
};

}  // namespace

double SvmModel::decision(std::span<const double> x) const {
  return dot(weights, x) + bias;
}

Prediction SvmModel::predict(std::span<const double> x) const {
  const double s = decision(x);
  return {label_for(s), s};
}

SvmSolution solve_svm(const FeatureMatrix& m, const SvmParams& params) {
  if (!(params.C > 0.0)) throw Error(ErrorKind::parameter, "SVM penalty C must be > 0");
  if (!(params.tol > 0.0)) throw Error(ErrorKind::parameter, "SVM tolerance must be > 0");
  if (!m.labels) throw Error(ErrorKind::training, "SVM needs labels");
  m.validate();
  std::size_t ones = 0;
  for (std::size_t i = 0; i < m.n; ++i) ones += static_cast<std::size_t>(m.label(i));
  if (ones == 0 || ones == m.n) {
    throw Error(ErrorKind::training, "SVM needs both classes present");
  }

  SmoSolver solver(m, params);
  SvmSolution out;
  bool converged = false;
  const std::size_t max_iter = std::max<std::size_t>(1, params.max_sweeps) * m.n;
  out.model.iterations = solver.run(max_iter, converged);
  out.model.converged = converged;
  out.model.weights = solver.weights();
  out.model.bias = -solver.rho();
  out.model.C = params.C;
  out.model.tol = params.tol;
  out.alphas = solver.alphas();
  return out;
}

SvmModel train_svm(const FeatureMatrix& m, const SvmParams& params) {
  return solve_svm(m, params).model;
}

}  // namespace attentiv
