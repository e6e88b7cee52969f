#include "looptune/system_model.hpp"

namespace looptune {

void attach_fd_jacobians(SystemModel& model, double step) {
  const auto f = model.f;
  const auto h = model.h;
  const int n = model.n;
  const int m = model.m;
  const int p = model.p;

  model.jac_f_x = [f, n, step](const State& x, const Control& u) {
    Mat J(n, n);
    State xp = x;
    State xm = x;
    for (int j = 0; j < n; ++j) {
      xp[j] = x[j] + step;
      xm[j] = x[j] - step;
      J.col(j) = (f(xp, u) - f(xm, u)) / (2.0 * step);
      xp[j] = x[j];
      xm[j] = x[j];
    }
    return J;
  };

  model.jac_f_u = [f, n, m, step](const State& x, const Control& u) {
    Mat J(n, m);
    Control up = u;
    Control um = u;
    for (int j = 0; j < m; ++j) {
      up[j] = u[j] + step;
      um[j] = u[j] - step;
      J.col(j) = (f(x, up) - f(x, um)) / (2.0 * step);
      up[j] = u[j];
      um[j] = u[j];
    }
    return J;
  };

  model.jac_h_x = [h, n, m, step](const State& x, const Vec& d, const ParamVector& th) {
    Mat J(m, n);
    State xp = x;
    State xm = x;
    for (int j = 0; j < n; ++j) {
      xp[j] = x[j] + step;
      xm[j] = x[j] - step;
      J.col(j) = (h(xp, d, th) - h(xm, d, th)) / (2.0 * step);
      xp[j] = x[j];
      xm[j] = x[j];
    }
    return J;
  };

  model.jac_h_theta = [h, m, p, step](const State& x, const Vec& d, const ParamVector& th) {
    Mat J(m, p);
    ParamVector tp = th;
    ParamVector tm = th;
    for (int j = 0; j < p; ++j) {
      tp[j] = th[j] + step;
      tm[j] = th[j] - step;
      J.col(j) = (h(x, d, tp) - h(x, d, tm)) / (2.0 * step);
      tp[j] = th[j];
      tm[j] = th[j];
    }
    return J;
  };
}

}  // namespace looptune
