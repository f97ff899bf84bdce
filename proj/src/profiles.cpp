#include "kgl/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kgl/errors.hpp"

namespace kgl {

namespace {

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class EuclideanFm final : public RadialProfile {
 public:
  double value(double r) const override { return r; }
  double deriv(double) const override { return 1.0; }
  double deriv2(double) const override { return 0.0; }
  std::string describe() const override { return "euclidean"; }
  std::optional<double> constant_curvature() const override { return 0.0; }
};

class HyperbolicFm final : public RadialProfile {
 public:
  explicit HyperbolicFm(double k0) : k0_(k0), sk_(std::sqrt(k0)) {
    if (!(k0 > 0.0)) throw InvalidGeometryError("hyperbolic profile needs k0 > 0");
  }
  double value(double r) const override { return std::sinh(sk_ * r) / sk_; }
  double deriv(double r) const override { return std::cosh(sk_ * r); }
  double deriv2(double r) const override { return k0_ * value(r); }
  std::string describe() const override {
    return "hyperbolic(" + fmt_num(k0_) + ")";
  }
  std::optional<double> constant_curvature() const override { return -k0_; }

 private:
  double k0_, sk_;
};

class ConstantRho final : public RadialProfile {
 public:
  explicit ConstantRho(double c) : c_(c) {
    if (!(c > 0.0)) throw InvalidGeometryError("constant rho needs c > 0");
  }
  double value(double) const override { return c_; }
  double deriv(double) const override { return 0.0; }
  double deriv2(double) const override { return 0.0; }
  std::string describe() const override { return "constant(" + fmt_num(c_) + ")"; }
  double c() const { return c_; }

 private:
  double c_;
};

class ExpDecayRho final : public RadialProfile {
 public:
  ExpDecayRho(double c, PsiKind psi) : c_(c), psi_(psi) {
    if (!(c > 0.0)) throw InvalidGeometryError("exp_decay rho needs c > 0");
  }
  double value(double r) const override { return c_ + std::exp(-psi(r)); }
  double deriv(double r) const override {
    return -psi_d(r) * std::exp(-psi(r));
  }
  double deriv2(double r) const override {
    double e = std::exp(-psi(r));
    double d = psi_d(r);
    return (d * d - psi_dd(r)) * e;
  }
  std::string describe() const override {
    return "exp_decay(" + fmt_num(c_) + ", " +
           (psi_ == PsiKind::kLog1p ? "log1p" : "linear") + ")";
  }
  double c() const { return c_; }

 private:
  double psi(double r) const {
    return psi_ == PsiKind::kLog1p ? std::log1p(r) : r;
  }
  double psi_d(double r) const {
    return psi_ == PsiKind::kLog1p ? 1.0 / (1.0 + r) : 1.0;
  }
  double psi_dd(double r) const {
    return psi_ == PsiKind::kLog1p ? -1.0 / ((1.0 + r) * (1.0 + r)) : 0.0;
  }
  double c_;
  PsiKind psi_;
};

// Cubic spline with not-a-knot ends (reproduces cubics exactly, keeps the
// second derivative honest at the first knot). Knot second derivatives solve
// a tridiagonal system (Thomas algorithm).
class TableProfile final : public RadialProfile {
 public:
  TableProfile(std::vector<double> r, std::vector<double> v, std::string label)
      : r_(std::move(r)), v_(std::move(v)), label_(std::move(label)) {
    size_t n = r_.size();
    if (n < 4 || v_.size() != n)
      throw InvalidGeometryError("table profile needs >= 4 matching rows: " + label_);
    for (size_t i = 1; i < n; ++i)
      if (!(r_[i] > r_[i - 1]))
        throw InvalidGeometryError("table abscissae must increase strictly: " + label_);
    m_.assign(n, 0.0);
    auto h = [&](size_t i) { return r_[i + 1] - r_[i]; };
    // unknowns m[1..n-2]; the end moments follow from third-derivative
    // continuity at the first and last interior knots:
    //   m[0]   = (1 + h0/h1) m[1]     - (h0/h1) m[2]
    //   m[n-1] = (1 + hL/hK) m[n-2]   - (hL/hK) m[n-3],  hL = h(n-2), hK = h(n-3)
    std::vector<double> sub(n, 0.0), dia(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
      sub[i] = h(i - 1);
      dia[i] = 2.0 * (h(i - 1) + h(i));
      sup[i] = h(i);
      rhs[i] = 6.0 * ((v_[i + 1] - v_[i]) / h(i) - (v_[i] - v_[i - 1]) / h(i - 1));
    }
    {
      double q = h(0) / h(1);
      dia[1] += h(0) * (1.0 + q);
      sup[1] -= h(0) * q;
      double p = h(n - 2) / h(n - 3);
      dia[n - 2] += h(n - 2) * (1.0 + p);
      sub[n - 2] -= h(n - 2) * p;
      sup[n - 2] = 0.0;
    }
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (size_t i = 1; i + 1 < n; ++i) {
      double denom = dia[i] - (i > 1 ? sub[i] * c[i - 1] : 0.0);
      c[i] = sup[i] / denom;
      d[i] = (rhs[i] - (i > 1 ? sub[i] * d[i - 1] : 0.0)) / denom;
    }
    for (size_t i = n - 2; i >= 1; --i) m_[i] = d[i] - c[i] * m_[i + 1];
    m_[0] = (1.0 + h(0) / h(1)) * m_[1] - h(0) / h(1) * m_[2];
    m_[n - 1] = (1.0 + h(n - 2) / h(n - 3)) * m_[n - 2] -
                h(n - 2) / h(n - 3) * m_[n - 3];
  }

  double value(double r) const override {
    auto [i, t, h] = locate(r);
    if (h == 0.0) return v_[i] + slope_end(i) * t;
    double a = (r_[i + 1] - r) / h;
    double b = (r - r_[i]) / h;
    return a * v_[i] + b * v_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }
  double deriv(double r) const override {
    auto [i, t, h] = locate(r);
    if (h == 0.0) return slope_end(i);
    double a = (r_[i + 1] - r) / h;
    double b = (r - r_[i]) / h;
    return (v_[i + 1] - v_[i]) / h +
           h / 6.0 * ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]);
  }
  double deriv2(double r) const override {
    auto [i, t, h] = locate(r);
    if (h == 0.0) return 0.0;
    double a = (r_[i + 1] - r) / h;
    double b = (r - r_[i]) / h;
    return a * m_[i] + b * m_[i + 1];
  }
  std::string describe() const override { return "table:" + label_; }

 private:
  // Returns (segment index, offset from knot, segment width); width 0 flags
  // linear extension outside the table.
  std::tuple<size_t, double, double> locate(double r) const {
    if (r <= r_.front()) return {0, r - r_.front(), 0.0};
    if (r >= r_.back()) return {r_.size() - 1, r - r_.back(), 0.0};
    size_t i = std::upper_bound(r_.begin(), r_.end(), r) - r_.begin() - 1;
    return {i, r - r_[i], r_[i + 1] - r_[i]};
  }
  double slope_end(size_t i) const {
    size_t n = r_.size();
    if (i == 0) {
      double h = r_[1] - r_[0];
      return (v_[1] - v_[0]) / h - h / 6.0 * (2.0 * m_[0] + m_[1]);
    }
    double h = r_[n - 1] - r_[n - 2];
    return (v_[n - 1] - v_[n - 2]) / h + h / 6.0 * (m_[n - 2] + 2.0 * m_[n - 1]);
  }

  std::vector<double> r_, v_, m_;
  std::string label_;
};

}  // namespace

ProfilePtr make_euclidean_fm() { return std::make_shared<EuclideanFm>(); }

ProfilePtr make_hyperbolic_fm(double k0) {
  return std::make_shared<HyperbolicFm>(k0);
}

ProfilePtr make_constant_rho(double c) {
  return std::make_shared<ConstantRho>(c);
}

ProfilePtr make_exp_decay_rho(double c, PsiKind psi) {
  return std::make_shared<ExpDecayRho>(c, psi);
}

ProfilePtr make_table_profile(std::vector<double> r, std::vector<double> v,
                              const std::string& label) {
  return std::make_shared<TableProfile>(std::move(r), std::move(v), label);
}

ProfilePtr load_table_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open table file: " + path);
  std::vector<double> r, v;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double a, b;
    if (ss >> a >> b) {
      r.push_back(a);
      v.push_back(b);
    }
  }
  return make_table_profile(std::move(r), std::move(v), path);
}

std::optional<GlobalProfileBounds> global_bounds(const RadialProfile& p) {
  if (auto* c = dynamic_cast<const ConstantRho*>(&p))
    return GlobalProfileBounds{c->c(), c->c(), 0.0};
  if (auto* e = dynamic_cast<const ExpDecayRho*>(&p))
    // decreasing from c + e^{-psi(0)} to c; |rho'| peaks at r = 0
    return GlobalProfileBounds{e->value(0.0), e->c(), std::fabs(e->deriv(0.0))};
  return std::nullopt;
}

}  // namespace kgl
