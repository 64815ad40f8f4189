#pragma once

// Manufactured problems.
//
//   acoustic61  v = sin x sin y on (0,1)^2, Dirichlet data from v.
//   elastic62   u = (sin pi x cos pi y, cos pi x sin pi y) on (0,1)^2, Dirichlet
//               displacement; grad u is symmetric, so gamma = 0.
//   coupled63   both fields on (-2,2)^2 minus [-1,1]^2 (acoustic) and (-1,1)^2
//               (elastic) with v_inc = -v. The transmission conditions then
//               need the extra terms g1 = -s u.n_E and g2 = -sigma n_E.
//   poly*       random polynomials of degree k, reproduced exactly by the scheme.

#include "hdg/projections.hpp"

#include <map>
#include <numbers>
#include <random>

namespace hdg {

/// Parameters shared by every case. Defaults are the experiment values.
struct CaseParams {
  Complex s{2.0, -1.0};
  double c = 1.0;
  double rhoE = 1.0;
  double rhoF = 1.0;
  double E = 1.0;
  double nu = 0.3;
  double tauE = 1.0;
  double tauA = 1.0;

  ModelParams model() const {
    ModelParams p = ModelParams::from_young(E, nu);
    p.s = s;
    p.c = c;
    p.rhoE = rhoE;
    p.rhoF = rhoF;
    p.tauE = tauE;
    p.tauA = tauA;
    return p;
  }
};

/// Parses "re,im" (or a bare real number).
inline Complex parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  std::size_t used = 0;
  try {
    if (comma == std::string::npos) {
      const double re = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {re, 0.0};
    }
    const std::string a = text.substr(0, comma), b = text.substr(comma + 1);
    std::size_t ua = 0, ub = 0;
    const double re = std::stod(a, &ua), im = std::stod(b, &ub);
    if (ua != a.size() || ub != b.size()) throw std::invalid_argument(text);
    return {re, im};
  } catch (const std::logic_error&) {
    throw Error("malformed complex literal '" + text + "' (expected re,im)");
  }
}

inline void apply_override(CaseParams& p, const std::string& key, const std::string& value) {
  const auto real = [&]() {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(value, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw Error("malformed number '" + value + "' for " + key);
    return x;
  };
  if (key == "s") p.s = parse_complex(value);
  else if (key == "c") p.c = real();
  else if (key == "rhoE") p.rhoE = real();
  else if (key == "rhoF") p.rhoF = real();
  else if (key == "E") p.E = real();
  else if (key == "nu") p.nu = real();
  else if (key == "tauE") p.tauE = real();
  else if (key == "tauA") p.tauA = real();
  else throw Error("unknown parameter '" + key + "'");
}

struct CaseGeometry {
  Box outer;
  std::optional<Box> inner;
  Subdomain single = Subdomain::acoustic;
  int base_n = 2;

  Mesh mesh(int level) const {
    GridOptions opts;
    opts.single_domain = single;
    Mesh m = build_structured_coupled(base_n, outer, inner, opts);
    for (int l = 0; l < level; ++l) m = refine(m);
    return m;
  }
};

struct ManufacturedCase {
  std::string name;
  CaseParams settings;
  ModelParams params;
  CaseGeometry geometry;
  bool elastic = false;
  bool acoustic = false;
  ExactFields exact;
  VectorField elastic_source;
  ScalarField acoustic_source;
  /// Values chosen here because the experiment description leaves them open.
  std::vector<std::string> assumptions;

  /// Boundary, interface and source data derived from the exact fields.
  ProblemData data() const {
    ProblemData d;
    if (elastic) {
      d.elastic_source = elastic_source;
      d.elastic_dirichlet = exact.u;
    }
    if (acoustic) {
      d.acoustic_source = acoustic_source;
      d.dirichlet = exact.v;
      const VectorField q = exact.q;
      d.neumann = [q](const Vec2& x, const Vec2& n) {
        const CVec2 g = q(x);
        return g[0] * n[0] + g[1] * n[1];
      };
    }
    if (elastic && acoustic) {
      const ScalarField v = exact.v;
      const VectorField q = exact.q, u = exact.u;
      const TensorField sigma = exact.sigma;
      const Complex s = params.s;
      d.incident = [v](const Vec2& x) { return -v(x); };
      d.incident_gradient = [q](const Vec2& x) { return CVec2(-q(x)); };
      d.interface_scalar = [u, s](const Vec2& x, const Vec2& nE) {
        const CVec2 w = u(x);
        return -s * (w[0] * nE[0] + w[1] * nE[1]);
      };
      d.interface_vector = [sigma](const Vec2& x, const Vec2& nE) {
        return CVec2(-(sigma(x) * nE.cast<Complex>()));
      };
    }
    return d;
  }
};

namespace detail {

inline CMat2 hooke_complex(const CMat2& M, const ModelParams& p) {
  return hooke_apply(M, p.lambda, p.mu);
}

inline void attach_acoustic_smooth(ManufacturedCase& mc) {
  const Complex sc2 = (mc.params.s / mc.params.c) * (mc.params.s / mc.params.c);
  mc.acoustic = true;
  mc.exact.v = [](const Vec2& x) { return Complex(std::sin(x[0]) * std::sin(x[1])); };
  mc.exact.q = [](const Vec2& x) {
    return CVec2(std::cos(x[0]) * std::sin(x[1]), std::sin(x[0]) * std::cos(x[1]));
  };
  mc.acoustic_source = [sc2](const Vec2& x) { return (2.0 + sc2) * std::sin(x[0]) * std::sin(x[1]); };
}

inline void attach_elastic_smooth(ManufacturedCase& mc) {
  constexpr double pi = std::numbers::pi;
  const ModelParams p = mc.params;
  mc.elastic = true;
  mc.exact.u = [](const Vec2& x) {
    return CVec2(std::sin(pi * x[0]) * std::cos(pi * x[1]), std::cos(pi * x[0]) * std::sin(pi * x[1]));
  };
  mc.exact.sigma = [p](const Vec2& x) {
    const double a = pi * std::cos(pi * x[0]) * std::cos(pi * x[1]);
    const double b = -pi * std::sin(pi * x[0]) * std::sin(pi * x[1]);
    CMat2 g;
    g << a, b, b, a;
    return hooke_complex(g, p);
  };
  mc.exact.gamma = [](const Vec2&) { return CMat2(CMat2::Zero()); };
  const Complex factor = 2.0 * pi * pi * (2.0 * p.mu + p.lambda) + p.rhoE * p.s * p.s;
  const VectorField u = mc.exact.u;
  mc.elastic_source = [u, factor](const Vec2& x) { return CVec2(factor * u(x)); };
}

inline std::vector<Poly2> random_polys(int count, int degree, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Poly2> out;
  for (int i = 0; i < count; ++i) {
    Poly2 p = Poly2::constant(0.0);
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) p += Poly2::monomial(a, b, dist(gen));
    out.push_back(p);
  }
  return out;
}

inline void attach_acoustic_poly(ManufacturedCase& mc, int k, unsigned seed) {
  const Poly2 v = random_polys(1, k, seed)[0];
  const Poly2 vx = v.dr(), vy = v.ds();
  const Poly2 lap = vx.dr() + vy.ds();
  const Complex sc2 = (mc.params.s / mc.params.c) * (mc.params.s / mc.params.c);
  mc.acoustic = true;
  mc.exact.v = [v](const Vec2& x) { return Complex(v(x)); };
  mc.exact.q = [vx, vy](const Vec2& x) { return CVec2(vx(x), vy(x)); };
  mc.acoustic_source = [v, lap, sc2](const Vec2& x) { return -lap(x) + sc2 * v(x); };
}

inline void attach_elastic_poly(ManufacturedCase& mc, int k, unsigned seed) {
  const auto u = random_polys(2, k, seed + 17);
  const ModelParams p = mc.params;
  PolyMat2 grad;
  for (int i = 0; i < 2; ++i) {
    grad.m[i][0] = u[i].dr();
    grad.m[i][1] = u[i].ds();
  }
  PolyMat2 sigma;
  const Poly2 div = grad.m[0][0] + grad.m[1][1];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      sigma.m[i][j] = p.mu * (grad.m[i][j] + grad.m[j][i]);
      if (i == j) sigma.m[i][j] += p.lambda * div;
    }
  const auto divsig = row_divergence(sigma, cartesian_partial);
  const Poly2 spin = 0.5 * (grad.m[0][1] - grad.m[1][0]);
  mc.elastic = true;
  mc.exact.u = [u](const Vec2& x) { return CVec2(u[0](x), u[1](x)); };
  mc.exact.sigma = [sigma](const Vec2& x) { return CMat2(sigma(x).cast<Complex>()); };
  mc.exact.gamma = [spin](const Vec2& x) {
    CMat2 g = CMat2::Zero();
    g(0, 1) = spin(x);
    g(1, 0) = -spin(x);
    return g;
  };
  const Complex rs2 = p.rhoE * p.s * p.s;
  mc.elastic_source = [u, divsig, rs2](const Vec2& x) {
    return CVec2(-divsig[0](x) + rs2 * u[0](x), -divsig[1](x) + rs2 * u[1](x));
  };
}

} // namespace detail

inline const std::vector<std::string>& case_names() {
  static const std::vector<std::string> names{"acoustic61", "elastic62", "coupled63", "polyacoustic",
                                              "polyelastic", "polycoupled"};
  return names;
}

/// Builds a case. `k` is only used by the polynomial cases (degree of the
/// exact solution).
inline ManufacturedCase make_case(const std::string& name, const CaseParams& settings = {},
                                  int k = 1) {
  ManufacturedCase mc;
  mc.name = name;
  mc.settings = settings;
  mc.params = settings.model();
  const Box unit{Vec2(0.0, 0.0), Vec2(1.0, 1.0)};
  const Box outer{Vec2(-2.0, -2.0), Vec2(2.0, 2.0)};
  const Box inner{Vec2(-1.0, -1.0), Vec2(1.0, 1.0)};
  const bool poly = name.rfind("poly", 0) == 0;
  const unsigned seed = 1234u + static_cast<unsigned>(k);

  if (name == "acoustic61" || name == "polyacoustic") {
    mc.geometry = {unit, std::nullopt, Subdomain::acoustic, 2};
    poly ? detail::attach_acoustic_poly(mc, k, seed) : detail::attach_acoustic_smooth(mc);
  } else if (name == "elastic62" || name == "polyelastic") {
    mc.geometry = {unit, std::nullopt, Subdomain::elastic, 2};
    poly ? detail::attach_elastic_poly(mc, k, seed) : detail::attach_elastic_smooth(mc);
  } else if (name == "coupled63" || name == "polycoupled") {
    mc.geometry = {outer, inner, Subdomain::acoustic, 1};
    if (poly) {
      detail::attach_acoustic_poly(mc, k, seed);
      detail::attach_elastic_poly(mc, k, seed);
    } else {
      detail::attach_acoustic_smooth(mc);
      detail::attach_elastic_smooth(mc);
    }
    mc.assumptions = {"rhoF not given for the coupled experiment; using " + std::to_string(settings.rhoF),
                      "nu not given for the coupled experiment; using " + std::to_string(settings.nu),
                      "acoustic region taken as the annulus (-2,2)^2 minus [-1,1]^2"};
  } else {
    throw Error("unknown case '" + name + "'");
  }
  return mc;
}

/// Residuals of the strong equations at random points, by fourth-order central
/// differences. Each residual is relative to the largest term of its equation.
struct StrongResidual {
  double constitutive = 0.0;  // C^-1 sigma - grad u + gamma
  double momentum = 0.0;      // -div sigma + rhoE s^2 u - f
  double symmetry = 0.0;      // sigma - sigma^T, gamma + gamma^T
  double gradient = 0.0;      // q - grad v
  double wave = 0.0;          // -div q + (s/c)^2 v - f
  double transmission = 0.0;  // interface conditions with the extra terms

  double max() const {
    return std::max({constitutive, momentum, symmetry, gradient, wave, transmission});
  }
};

namespace detail {

template <typename F>
auto central_diff(const F& f, const Vec2& x, int i, double h) {
  Vec2 e = Vec2::Zero();
  e[i] = h;
  using Value = decltype(f(x));
  return Value((-f(x + 2.0 * e) + 8.0 * f(x + e) - 8.0 * f(x - e) + f(x - 2.0 * e)) / (12.0 * h));
}

inline double ratio(double r, double scale) { return scale > 0.0 ? r / scale : r; }

} // namespace detail

inline StrongResidual strong_residual(const ManufacturedCase& mc, int samples = 100,
                                      unsigned seed = 7, double h = 1e-3) {
  StrongResidual out;
  std::mt19937 gen(seed);
  const ModelParams& p = mc.params;
  const auto sample = [&](const Box& box, const std::optional<Box>& hole) {
    std::uniform_real_distribution<double> ux(box.lo[0] + 3 * h, box.hi[0] - 3 * h);
    std::uniform_real_distribution<double> uy(box.lo[1] + 3 * h, box.hi[1] - 3 * h);
    while (true) {
      const Vec2 x(ux(gen), uy(gen));
      if (!hole) return x;
      const bool inside = (x.array() > hole->lo.array() - 3 * h).all() && (x.array() < hole->hi.array() + 3 * h).all();
      if (!inside) return x;
    }
  };
  const Box elastic_box = mc.geometry.inner ? *mc.geometry.inner : mc.geometry.outer;

  if (mc.elastic) {
    const Complex rs2 = p.rhoE * p.s * p.s;
    for (int n = 0; n < samples; ++n) {
      const Vec2 x = sample(elastic_box, std::nullopt);
      CMat2 grad;
      for (int j = 0; j < 2; ++j) grad.col(j) = detail::central_diff(mc.exact.u, x, j, h);
      const CMat2 sig = mc.exact.sigma(x), gam = mc.exact.gamma(x);
      const CMat2 cinv = hooke_inverse_apply(sig, p.lambda, p.mu);
      out.constitutive = std::max(out.constitutive, detail::ratio((cinv - grad + gam).norm(),
                                                                  std::max({cinv.norm(), grad.norm(), gam.norm()})));
      CVec2 div = CVec2::Zero();
      for (int j = 0; j < 2; ++j) {
        const auto col = [&](const Vec2& y) -> CVec2 { return mc.exact.sigma(y).col(j); };
        div += detail::central_diff(col, x, j, h);
      }
      const CVec2 u = mc.exact.u(x), f = mc.elastic_source(x);
      out.momentum = std::max(out.momentum, detail::ratio((-div + rs2 * u - f).norm(),
                                                          std::max({div.norm(), (rs2 * u).norm(), f.norm()})));
      out.symmetry = std::max(out.symmetry, detail::ratio((sig - sig.transpose()).norm() + (gam + gam.transpose()).norm(),
                                                          std::max(sig.norm(), 1.0)));
    }
  }
  if (mc.acoustic) {
    const Complex sc2 = (p.s / p.c) * (p.s / p.c);
    const std::optional<Box> hole = mc.geometry.inner;
    for (int n = 0; n < samples; ++n) {
      const Vec2 x = sample(mc.geometry.outer, hole);
      CVec2 grad;
      for (int j = 0; j < 2; ++j) grad[j] = detail::central_diff(mc.exact.v, x, j, h);
      const CVec2 q = mc.exact.q(x);
      out.gradient = std::max(out.gradient, detail::ratio((q - grad).norm(), std::max(q.norm(), grad.norm())));
      Complex div = 0.0;
      for (int j = 0; j < 2; ++j) {
        const auto comp = [&](const Vec2& y) -> Complex { return mc.exact.q(y)[j]; };
        div += detail::central_diff(comp, x, j, h);
      }
      const Complex v = mc.exact.v(x), f = mc.acoustic_source(x);
      out.wave = std::max(out.wave, detail::ratio(std::abs(-div + sc2 * v - f),
                                                  std::max({std::abs(div), std::abs(sc2 * v), std::abs(f)})));
    }
  }
  if (mc.elastic && mc.acoustic) {
    // transmission: q.n_A - s u.n_E = -grad v_inc.n_A + g1, -sigma n_E + rhoF s v n_A = -rhoF s v_inc n_A + g2
    const ProblemData d = mc.data();
    std::uniform_real_distribution<double> t(0.0, 1.0);
    const Box& b = *mc.geometry.inner;
    for (int n = 0; n < samples; ++n) {
      const int side = n % 4;
      const double a = t(gen);
      Vec2 x, nE;
      switch (side) {
        case 0: x = Vec2(b.lo[0] + a * (b.hi[0] - b.lo[0]), b.lo[1]); nE = Vec2(0, -1); break;
        case 1: x = Vec2(b.hi[0], b.lo[1] + a * (b.hi[1] - b.lo[1])); nE = Vec2(1, 0); break;
        case 2: x = Vec2(b.lo[0] + a * (b.hi[0] - b.lo[0]), b.hi[1]); nE = Vec2(0, 1); break;
        default: x = Vec2(b.lo[0], b.lo[1] + a * (b.hi[1] - b.lo[1])); nE = Vec2(-1, 0); break;
      }
      const Vec2 nA = -nE;
      const CVec2 q = mc.exact.q(x), u = mc.exact.u(x), gi = d.incident_gradient(x);
      const Complex lhs1 = q[0] * nA[0] + q[1] * nA[1] - p.s * (u[0] * nE[0] + u[1] * nE[1]);
      const Complex rhs1 = -(gi[0] * nA[0] + gi[1] * nA[1]) + d.interface_scalar(x, nE);
      const CVec2 lhs2 = -(mc.exact.sigma(x) * nE.cast<Complex>()) + p.rhoF * p.s * mc.exact.v(x) * nA.cast<Complex>();
      const CVec2 rhs2 = -p.rhoF * p.s * d.incident(x) * nA.cast<Complex>() + d.interface_vector(x, nE);
      out.transmission = std::max(out.transmission, std::abs(lhs1 - rhs1) / std::max(std::abs(lhs1), 1e-300));
      out.transmission = std::max(out.transmission, (lhs2 - rhs2).norm() / std::max(lhs2.norm(), 1e-300));
    }
  }
  return out;
}

} // namespace hdg
