#include "hdg/verify/errors.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hdg;

namespace {

Mesh one_triangle(Subdomain d, const std::array<Vec2, 3>& t = {Vec2(0.1, 0.2), Vec2(0.8, 0.1), Vec2(0.3, 0.7)}) {
  return assemble_mesh({t[0], t[1], t[2]}, {Triangle{{0, 1, 2}, d}});
}

ComplexVector random_vector(std::mt19937& gen, Eigen::Index n) {
  std::normal_distribution<double> g;
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(g(gen), g(gen));
  return v;
}

/// Exact traces P_M of a field on the three faces of element 0, local layout.
ComplexVector stack(const std::array<ComplexVector, 3>& blocks) {
  const Eigen::Index b = blocks[0].size();
  ComplexVector out(3 * b);
  for (int j = 0; j < 3; ++j) out.segment(j * b, b) = blocks[j];
  return out;
}

ComplexVector exact_traces(const Mesh& m, const ReferenceBasis& rb, const VectorField& f) {
  std::array<ComplexVector, 3> blocks;
  for (int j = 0; j < 3; ++j) blocks[j] = project_face_vector(m, m.element_faces[0][j], rb, f);
  return stack(blocks);
}

ComplexVector exact_traces(const Mesh& m, const ReferenceBasis& rb, const ScalarField& f) {
  std::array<ComplexVector, 3> blocks;
  for (int j = 0; j < 3; ++j) blocks[j] = project_face_scalar(m, m.element_faces[0][j], rb, f);
  return stack(blocks);
}

} // namespace

TEST(Hooke, LameFromYoung) {
  const LameParameters l = lame_from_young(1.0, 0.3);
  EXPECT_NEAR(l.lambda, 0.576923077, 1e-9);
  EXPECT_NEAR(l.mu, 0.384615385, 1e-9);
  const Mat2 ci = hooke_apply(Mat2(Mat2::Identity()), l.lambda, l.mu);
  EXPECT_NEAR(ci(0, 0), 1.923076923, 1e-9);
  EXPECT_NEAR(ci(1, 1), 1.923076923, 1e-9);
  EXPECT_NEAR(ci(0, 0), 2 * l.mu + 2 * l.lambda, 1e-15);
  EXPECT_EQ(ci(0, 1), 0.0);
  const LameParameters n = lame_from_young(1.0, 0.49999);
  EXPECT_NEAR(n.lambda, 16666.4, 0.05);
  EXPECT_NEAR(n.mu, 0.333336, 1e-6);
  EXPECT_THROW(lame_from_young(1.0, 0.5), Error);
  EXPECT_THROW(lame_from_young(-1.0, 0.3), Error);
}

TEST(Hooke, InverseRoundTrip) {
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 20; ++t) {
    CMat2 m;
    m << Complex(u(gen), u(gen)), Complex(u(gen), u(gen)), Complex(u(gen), u(gen)), Complex(u(gen), u(gen));
    const double lambda = 2 * (u(gen) + 1), mu = 0.5 + (u(gen) + 1);
    const CMat2 back = hooke_inverse_apply(hooke_apply(m, lambda, mu), lambda, mu);
    EXPECT_LE((back - m).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(ModelParams, HypothesisCheck) {
  ModelParams p = ModelParams::from_young(1.0, 0.3);
  EXPECT_NO_THROW(check_hypothesis(p));
  p.s = Complex(-1.0, 0.0);
  EXPECT_THROW(check_hypothesis(p), HypothesisError);
  p.s = Complex(2.0, -1.0);
  p.tauE = -1.0;
  EXPECT_THROW(check_hypothesis(p), HypothesisError);
  p.tauE = 1.0;
  p.tauA_face = {1.0, 0.0};
  EXPECT_THROW(check_hypothesis(p), HypothesisError);
  p.tauA_face.clear();
  p.mu = 0.0;
  EXPECT_THROW(check_hypothesis(p), Error);
}

TEST(LocalSolver, ZeroDataGivesZeroLift) {
  const ModelParams p = ModelParams::from_young(1.0, 0.3);
  const ReferenceBasis rb = build_reference_basis(2);
  for (const Subdomain d : {Subdomain::elastic, Subdomain::acoustic}) {
    const Mesh m = one_triangle(d);
    const ElementSpaces es = build_element_spaces(m, 0, rb);
    const LocalSystem ls = assemble_local(es, p, {}, {});
    const ComplexVector x = ls.lift_volume(ComplexVector::Zero(ls.trace_dim));
    EXPECT_EQ(x.norm(), 0.0);
    EXPECT_EQ(ls.rhs_trace.norm(), 0.0);
    EXPECT_GT(ls.min_pivot_ratio, 1e-13);
  }
}

TEST(LocalSolver, Dimensions) {
  const ModelParams p = ModelParams::from_young(1.0, 0.3);
  for (int k = 1; k <= 3; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    const int d = rb.dim();
    const ElementSpaces ee = build_element_spaces(one_triangle(Subdomain::elastic), 0, rb);
    const LocalSystem le = assemble_local(ee, p, {}, {});
    EXPECT_EQ(le.volume_dim, 4 * d + (k + 1) + 2 * d + d);
    EXPECT_EQ(le.trace_dim, 6 * (k + 1));
    const ElementSpaces ea = build_element_spaces(one_triangle(Subdomain::acoustic), 0, rb);
    const LocalSystem la = assemble_local(ea, p, {}, {});
    EXPECT_EQ(la.volume_dim, 3 * d);
    EXPECT_EQ(la.trace_dim, 3 * (k + 1));
  }
}

TEST(LocalSolver, CondensationMatchesFullSolve) {
  std::mt19937 gen(17);
  const ModelParams p = ModelParams::from_young(1.0, 0.3);
  const ReferenceBasis rb = build_reference_basis(2);
  const VectorField fe = [](const Vec2& x) { return CVec2(std::sin(3 * x[0]), Complex(x[1], 1.0)); };
  const ScalarField fa = [](const Vec2& x) { return Complex(std::cos(x[0] * x[1]), x[0]); };
  for (const Subdomain d : {Subdomain::elastic, Subdomain::acoustic}) {
    const Mesh m = one_triangle(d);
    const ElementSpaces es = build_element_spaces(m, 0, rb);
    const LocalSystem ls = assemble_local(es, p, fe, fa);
    const ComplexVector g = random_vector(gen, ls.trace_dim);
    // full block system [A B; 0 I] [X; L] = [F; g]
    const int n = ls.volume_dim + ls.trace_dim;
    ComplexMatrix full = ComplexMatrix::Zero(n, n);
    full.topLeftCorner(ls.volume_dim, ls.volume_dim) = ls.A;
    full.topRightCorner(ls.volume_dim, ls.trace_dim) = ls.B;
    full.bottomRightCorner(ls.trace_dim, ls.trace_dim).setIdentity();
    ComplexVector rhs(n);
    rhs << ls.F, g;
    const ComplexVector xl = full.fullPivLu().solve(rhs);
    const ComplexVector x = xl.head(ls.volume_dim);
    const ComplexVector flux = ls.C * x + ls.D * g;
    EXPECT_LE((ls.lift_volume(g) - x).norm(), 1e-11 * x.norm());
    EXPECT_LE((ls.condensed * g + ls.rhs_trace - flux).norm(), 1e-11 * flux.norm());
    // flux moments from the pointwise definition
    const ComplexVector direct = reconstruct_flux(es, p, x, g);
    EXPECT_LE((direct - flux).norm(), 1e-12 * flux.norm());
  }
}

TEST(LocalSolver, WeakSymmetryOfLiftedStress) {
  std::mt19937 gen(23);
  const ModelParams p = ModelParams::from_young(1.0, 0.3);
  for (int k = 1; k <= 3; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    const ElementSpaces es = build_element_spaces(one_triangle(Subdomain::elastic), 0, rb);
    const LocalSystem ls = assemble_local(es, p, {}, {});
    const ComplexVector x = ls.lift_volume(random_vector(gen, ls.trace_dim));
    const StressBasis& sb = *es.stress;
    const RealMatrix skew = sb.value[0][1] - sb.value[1][0];
    const ComplexVector moments =
        (es.volume.values.transpose() * es.volume.weights.asDiagonal() * skew).cast<Complex>() * x.head(sb.size());
    const ElementEvaluator ev{es, x};
    double n2 = 0.0;
    for (Eigen::Index q = 0; q < static_cast<Eigen::Index>(es.volume.points.size()); ++q)
      n2 += es.volume.weights[q] * ev.sigma(q).squaredNorm();
    EXPECT_LE(moments.norm(), 1e-11 * std::sqrt(n2));
  }
}

TEST(LocalSolver, ConstantAcousticSolutionReproduced) {
  ModelParams p;
  const ReferenceBasis rb = build_reference_basis(1);
  const Mesh m = one_triangle(Subdomain::acoustic);
  const ElementSpaces es = build_element_spaces(m, 0, rb);
  const Complex s2 = p.s * p.s;
  const LocalSystem ls = assemble_acoustic_local(es, p, [s2](const Vec2&) { return s2; });
  const ComplexVector g = exact_traces(m, rb, ScalarField([](const Vec2&) { return Complex(1.0); }));
  const ComplexVector x = ls.lift_volume(g);
  const ElementEvaluator ev{es, x};
  for (Eigen::Index q = 0; q < static_cast<Eigen::Index>(es.volume.points.size()); ++q) {
    EXPECT_LE(std::abs(ev.v(q) - 1.0), 1e-12);
    EXPECT_LE(ev.qfield(q).norm(), 1e-12);
  }
}

TEST(LocalSolver, PolynomialSolutionsReproduced) {
  for (int k = 1; k <= 3; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    for (const std::string name : {"polyacoustic", "polyelastic"}) {
      const ManufacturedCase mc = make_case(name, {}, k);
      const bool elastic = name == "polyelastic";
      const Mesh m = one_triangle(elastic ? Subdomain::elastic : Subdomain::acoustic);
      const ElementSpaces es = build_element_spaces(m, 0, rb);
      const LocalSystem ls = assemble_local(es, mc.params, mc.elastic_source, mc.acoustic_source);
      const ComplexVector g = elastic ? exact_traces(m, rb, mc.exact.u) : exact_traces(m, rb, mc.exact.v);
      const ComplexVector x = ls.lift_volume(g);
      const ElementEvaluator ev{es, x};
      double err = 0.0, ref = 0.0;
      for (Eigen::Index q = 0; q < static_cast<Eigen::Index>(es.volume.points.size()); ++q) {
        const Vec2& y = es.volume.points[q];
        if (elastic) {
          err = std::max({err, (ev.sigma(q) - mc.exact.sigma(y)).norm(), (ev.u(q) - mc.exact.u(y)).norm(),
                          (ev.gamma(q) - mc.exact.gamma(y)).norm()});
          ref = std::max({ref, mc.exact.sigma(y).norm(), mc.exact.u(y).norm()});
        } else {
          err = std::max({err, (ev.qfield(q) - mc.exact.q(y)).norm(), std::abs(ev.v(q) - mc.exact.v(y))});
          ref = std::max({ref, mc.exact.q(y).norm(), std::abs(mc.exact.v(y))});
        }
      }
      EXPECT_LE(err, 1e-10 * ref) << name << " k=" << k;
    }
  }
}

TEST(LocalSolver, ExactTracesGiveOptimalRate) {
  // v = sin x sin y lifted elementwise from P_M v on two meshes
  const ManufacturedCase mc = make_case("acoustic61");
  for (int k = 1; k <= 2; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    std::vector<double> err, h;
    for (int n : {4, 8}) {
      const Mesh m = build_structured_coupled(n, Box{Vec2(0, 0), Vec2(1, 1)});
      FieldSolution sol;
      sol.k = k;
      sol.uhat.resize(m.num_faces());
      sol.vhat.resize(m.num_faces());
      for (int f = 0; f < m.num_faces(); ++f) sol.vhat[f] = project_face_scalar(m, f, rb, mc.exact.v);
      for (int e = 0; e < m.num_elements(); ++e) {
        const ElementSpaces es = build_element_spaces(m, e, rb);
        const LocalSystem ls = assemble_local(es, mc.params, {}, mc.acoustic_source);
        sol.volume.push_back(ls.lift_volume(element_traces(m, sol, e)));
      }
      err.push_back(compute_errors(m, rb, mc.params, sol, mc.exact).v);
      h.push_back(m.h());
    }
    const double rate = eoc(err[0], err[1], h[0], h[1]);
    EXPECT_GE(rate, k + 0.7);
    EXPECT_LE(rate, k + 1.4);
  }
}

TEST(Flux, ZeroStabilisationGivesStressNormal) {
  std::mt19937 gen(29);
  ModelParams p = ModelParams::from_young(1.0, 0.3);
  p.tauE = 0.0;
  const ReferenceBasis rb = build_reference_basis(2);
  const ElementSpaces es = build_element_spaces(one_triangle(Subdomain::elastic), 0, rb);
  const ElasticLayout lay{es.stress->size(), es.dim()};
  const ComplexVector x = random_vector(gen, lay.size());
  const ComplexVector g = random_vector(gen, 6 * rb.face_dim());
  const ComplexVector flux = reconstruct_flux(es, p, x, g);
  const int kf = rb.face_dim();
  for (int j = 0; j < 3; ++j) {
    const FaceQuadrature& fq = es.faces[j];
    for (int c = 0; c < 2; ++c) {
      const ComplexVector sn = fq.stress_normal[c].cast<Complex>() * x.head(lay.stress);
      const ComplexVector m = fq.trace.transpose().cast<Complex>() * (fq.weights.cast<Complex>().asDiagonal() * sn);
      EXPECT_LE((flux.segment(j * 2 * kf + c * kf, kf) - m).norm(), 1e-13 * std::max(1.0, m.norm()));
    }
  }
}

TEST(Flux, MatchingTraceGivesStressNormal) {
  std::mt19937 gen(31);
  const ModelParams p = ModelParams::from_young(1.0, 0.3);
  const ReferenceBasis rb = build_reference_basis(2);
  const Mesh m = one_triangle(Subdomain::elastic);
  const ElementSpaces es = build_element_spaces(m, 0, rb);
  const ElasticLayout lay{es.stress->size(), es.dim()};
  const ComplexVector x = random_vector(gen, lay.size());
  // uhat = restriction of u_h, which lies in P_k(F)
  const AffineMap map(m.corners(0));
  const VectorField uh = [&](const Vec2& y) {
    const Vec2 r = map.to_reference(y);
    CVec2 out = CVec2::Zero();
    for (int i = 0; i < es.dim(); ++i)
      for (int c = 0; c < 2; ++c) out[c] += rb.scalar[i](r) * x[lay.u(c, i)];
    return out;
  };
  ModelParams p0 = p;
  p0.tauE = 0.0;
  const ComplexVector g = exact_traces(m, rb, uh);
  EXPECT_LE((reconstruct_flux(es, p, x, g) - reconstruct_flux(es, p0, x, g)).norm(), 1e-12 * g.norm());
}
