#include "igflow/jets.hpp"

#include <algorithm>
#include <cmath>

namespace igflow {

namespace {

void check_point(const PotentialModel& f, const Point& x) {
  if (x.dim() != f.dim()) {
    throw InvalidArgument(f.name() + ": point dimension " +
                          std::to_string(x.dim()) + " != model dimension " +
                          std::to_string(f.dim()));
  }
  require_in_domain(f.domain(), x.x, f.name());
}

double fd_step(double xi) { return 1e-5 * std::max(1.0, std::abs(xi)); }

// Probe points for the oracle must stay >= 2h inside the domain.
void check_fd_margin(const PotentialModel& f, const Vec& x) {
  for (int k = 0; k < x.size(); ++k) {
    double h = 2.0 * fd_step(x[k]);
    Vec p = x;
    p[k] = x[k] + h;
    int bad = f.domain().violation(p);
    if (bad < 0) {
      p[k] = x[k] - h;
      bad = f.domain().violation(p);
    }
    if (bad >= 0) {
      throw DomainError(f.name() + ": point closer than 2h to the domain "
                                   "boundary along coordinate " +
                            std::to_string(bad),
                        bad);
    }
  }
}

}  // namespace

Jet2 jet2(const PotentialModel& f, const Point& x) {
  check_point(f, x);
  const int n = x.dim();
  Jet2 out;
  out.grad = Vec::Zero(n);
  out.hess = Mat::Zero(n, n);

  std::vector<D2> z(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        z[k] = D2{D1{x.x[k], k == j ? 1.0 : 0.0}, D1{k == i ? 1.0 : 0.0, 0.0}};
      }
      D2 r = f.eval(z);
      if (j == i) {
        out.value = r.v.v;
        out.grad[i] = r.v.d;
      }
      out.hess(i, j) = r.d.d;
      out.hess(j, i) = r.d.d;
    }
  }
  return out;
}

Jet3 jet3(const PotentialModel& f, const Point& x) {
  check_point(f, x);
  const int n = x.dim();
  Jet3 out;
  out.grad = Vec::Zero(n);
  out.hess = Mat::Zero(n, n);
  out.third = Ten3(n);

  std::vector<D3> z(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        for (int m = 0; m < n; ++m) {
          double di = m == i ? 1.0 : 0.0;
          double dj = m == j ? 1.0 : 0.0;
          double dk = m == k ? 1.0 : 0.0;
          z[m] = D3{D2{D1{x.x[m], dk}, D1{dj, 0.0}}, D2{D1{di, 0.0}, D1{0.0, 0.0}}};
        }
        D3 r = f.eval(z);
        if (i == j && j == k) {
          out.value = r.v.v.v;
          out.grad[i] = r.v.v.d;
        }
        if (i == j) {
          out.hess(j, k) = r.v.d.d;
          out.hess(k, j) = r.v.d.d;
        }
        double t = r.d.d.d;
        // fill all permutations of (i, j, k)
        out.third[i](j, k) = t;
        out.third[i](k, j) = t;
        out.third[j](i, k) = t;
        out.third[j](k, i) = t;
        out.third[k](i, j) = t;
        out.third[k](j, i) = t;
      }
    }
  }
  return out;
}

Ten4 jet4(const PotentialModel& f, const Point& x) {
  check_point(f, x);
  const int n = x.dim();
  Ten4 out(n);

  std::vector<D4> z(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        for (int l = k; l < n; ++l) {
          for (int m = 0; m < n; ++m) {
            double di = m == i ? 1.0 : 0.0;
            double dj = m == j ? 1.0 : 0.0;
            double dk = m == k ? 1.0 : 0.0;
            double dl = m == l ? 1.0 : 0.0;
            z[m] = D4{D3{D2{D1{x.x[m], dl}, D1{dk, 0.0}},
                         D2{D1{dj, 0.0}, D1{0.0, 0.0}}},
                      D3{D2{D1{di, 0.0}, D1{0.0, 0.0}},
                         D2{D1{0.0, 0.0}, D1{0.0, 0.0}}}};
          }
          double t = f.eval(z).d.d.d.d;
          int idx[4] = {i, j, k, l};
          std::sort(idx, idx + 4);
          // write every distinct permutation of the sorted quadruple
          do {
            out[idx[0]][idx[1]](idx[2], idx[3]) = t;
          } while (std::next_permutation(idx, idx + 4));
        }
      }
    }
  }
  return out;
}

Vec fd_gradient(const PotentialModel& f, const Point& x) {
  check_point(f, x);
  check_fd_margin(f, x.x);
  const int n = x.dim();
  Vec g(n);
  for (int k = 0; k < n; ++k) {
    double h = fd_step(x.x[k]);
    Vec xp = x.x, xm = x.x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (f.value(xp) - f.value(xm)) / (xp[k] - xm[k]);
  }
  return g;
}

Mat fd_hessian(const PotentialModel& f, const Point& x) {
  check_point(f, x);
  check_fd_margin(f, x.x);
  const int n = x.dim();
  Mat h_out(n, n);
  for (int k = 0; k < n; ++k) {
    double h = fd_step(x.x[k]);
    Point xp{x.x, x.chart}, xm{x.x, x.chart};
    xp.x[k] += h;
    xm.x[k] -= h;
    Vec col = (jet2(f, xp).grad - jet2(f, xm).grad) / (xp.x[k] - xm.x[k]);
    h_out.col(k) = col;
  }
  return 0.5 * (h_out + h_out.transpose());
}

Ten3 fd_third(const PotentialModel& f, const Point& x) {
  check_point(f, x);
  check_fd_margin(f, x.x);
  const int n = x.dim();
  Ten3 t(n);
  for (int k = 0; k < n; ++k) {
    double h = fd_step(x.x[k]);
    Point xp{x.x, x.chart}, xm{x.x, x.chart};
    xp.x[k] += h;
    xm.x[k] -= h;
    t[k] = (jet2(f, xp).hess - jet2(f, xm).hess) / (xp.x[k] - xm.x[k]);
  }
  // symmetrize over the derivative slot as well
  Ten3 s(n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        s[k](i, j) =
            (t[k](i, j) + t[i](k, j) + t[j](i, k)) / 3.0;
      }
    }
  }
  return s;
}

}  // namespace igflow
