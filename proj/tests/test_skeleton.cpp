#include "hdg/verify/oracle.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace hdg;

namespace {

const Box unit{Vec2(0, 0), Vec2(1, 1)};
const Box outer{Vec2(-2, -2), Vec2(2, 2)};
const Box inner{Vec2(-1, -1), Vec2(1, 1)};

} // namespace

TEST(DofMap, AcousticUnitSquareUnknowns) {
  const Mesh m = build_structured_coupled(2, unit);
  const ReferenceBasis rb = build_reference_basis(1);
  ProblemData data;
  data.dirichlet = [](const Vec2&) { return Complex(1.0); };
  const DofMap dm = number_traces(m, rb, data);
  EXPECT_EQ(dm.size, 16);
  int fixed = 0;
  for (int f = 0; f < m.num_faces(); ++f) {
    EXPECT_EQ(dm.uhat[f], -1);
    fixed += dm.vhat_fixed[f].size() > 0;
  }
  EXPECT_EQ(fixed, 8);
}

TEST(DofMap, CoupledFacesCarryBothTraces) {
  const Mesh m = build_structured_coupled(1, outer, inner);
  for (int k = 1; k <= 3; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    const DofMap dm = number_traces(m, rb, ProblemData{});
    const int kf = k + 1;
    const int expected = 2 * kf * (m.count(FaceKind::interiorE) + m.count(FaceKind::gamma)) +
                         kf * (m.count(FaceKind::interiorA) + m.count(FaceKind::gamma));
    EXPECT_EQ(dm.size, expected);
    std::vector<int> seen(dm.size, 0);
    for (int f = 0; f < m.num_faces(); ++f) {
      const bool gamma = m.faces[f].kind == FaceKind::gamma;
      if (gamma) {
        EXPECT_GE(dm.uhat[f], 0);
        EXPECT_GE(dm.vhat[f], 0);
      }
      if (dm.uhat[f] >= 0)
        for (int i = 0; i < 2 * kf; ++i) ++seen[dm.uhat[f] + i];
      if (dm.vhat[f] >= 0)
        for (int i = 0; i < kf; ++i) ++seen[dm.vhat[f] + i];
    }
    for (int c : seen) EXPECT_EQ(c, 1);
  }
}

TEST(FaceProjection, VectorLayoutIsComponentOuter) {
  const Mesh m = build_structured_coupled(1, unit);
  const ReferenceBasis rb = build_reference_basis(2);
  const ScalarField a = [](const Vec2& x) { return Complex(x[0] * x[0], 1.0); };
  const ScalarField b = [](const Vec2& x) { return Complex(x[1], -x[0]); };
  for (int f = 0; f < m.num_faces(); ++f) {
    const ComplexVector v = project_face_vector(m, f, rb, [&](const Vec2& x) { return CVec2(a(x), b(x)); });
    EXPECT_LE((v.head(3) - project_face_scalar(m, f, rb, a)).norm(), 1e-15);
    EXPECT_LE((v.tail(3) - project_face_scalar(m, f, rb, b)).norm(), 1e-15);
  }
}

TEST(Skeleton, ConstantAcousticSolution) {
  const Mesh m = build_structured_coupled(2, unit);
  ModelParams p;
  const Complex s2 = p.s * p.s;
  ProblemData data;
  data.dirichlet = [](const Vec2&) { return Complex(1.0); };
  data.acoustic_source = [s2](const Vec2&) { return s2; };
  for (int k = 1; k <= 2; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    const HdgSolution sol = solve_problem(m, rb, p, data);
    for (int f = 0; f < m.num_faces(); ++f) {
      const ComplexVector one = project_face_scalar(m, f, rb, data.dirichlet);
      EXPECT_LE((sol.fields.vhat[f] - one).norm(), 1e-12);
    }
    ExactFields ex;
    ex.v = data.dirichlet;
    ex.q = [](const Vec2&) { return CVec2(CVec2::Zero()); };
    const ErrorRecord err = compute_errors(m, rb, p, sol.fields, ex);
    EXPECT_LE(err.v, 1e-12);
    EXPECT_LE(err.q, 1e-12);
  }
}

TEST(Skeleton, ZeroDataGivesZeroSolution) {
  const ModelParams p = ModelParams::from_young(1.0, 0.3);
  const Mesh m = build_structured_coupled(1, outer, inner);
  const ReferenceBasis rb = build_reference_basis(2);
  const HdgSolution sol = solve_problem(m, rb, p, ProblemData{});
  EXPECT_EQ(sol.solve.traces.norm(), 0.0);
  EXPECT_EQ(solution_norm(sol.fields), 0.0);
}

TEST(Skeleton, AcousticResidual) {
  const ManufacturedCase mc = make_case("acoustic61");
  const Mesh m = mc.geometry.mesh(0);
  for (int k = 1; k <= 3; ++k) {
    const HdgSolution sol = solve_problem(m, build_reference_basis(k), mc.params, mc.data());
    EXPECT_EQ(sol.system.matrix.rows(), sol.system.matrix.cols());
    EXPECT_EQ(sol.system.matrix.rows(), sol.system.dofs.size);
    EXPECT_LE(sol.solve.relative_residual, 1e-10);
    for (const auto& x : sol.fields.volume) EXPECT_TRUE(x.allFinite());
  }
}

TEST(Skeleton, CondensedMatchesMonolithic) {
  for (const std::string name : {"acoustic61", "elastic62"}) {
    const ManufacturedCase mc = make_case(name);
    const Mesh m = mc.geometry.mesh(0);
    ASSERT_LE(m.num_elements(), 64);
    for (int k = 1; k <= 2; ++k) {
      const ReferenceBasis rb = build_reference_basis(k);
      const ProblemData data = mc.data();
      const HdgSolution hdg = solve_problem(m, rb, mc.params, data);
      const FieldSolution mono = solve_monolithic(m, rb, mc.params, data);
      EXPECT_LE(solution_difference(mono, hdg.fields), 1e-9) << name << " k=" << k;
    }
  }
}

TEST(Skeleton, RecoveredFieldsConserveFluxes) {
  const ManufacturedCase mc = make_case("coupled63");
  const Mesh m = mc.geometry.mesh(0);
  for (int k = 1; k <= 2; ++k) {
    const ReferenceBasis rb = build_reference_basis(k);
    const ProblemData data = mc.data();
    const HdgSolution sol = solve_problem(m, rb, mc.params, data);
    const ConservationReport c = check_conservation(m, rb, mc.params, data, sol.fields);
    EXPECT_LE(c.elastic_jump, 1e-10);
    EXPECT_LE(c.acoustic_jump, 1e-10);
    EXPECT_LE(c.velocity_condition, 1e-10);
    EXPECT_LE(c.force_condition, 1e-10);
    EXPECT_LE(c.weak_symmetry, 1e-10);
  }
}

TEST(Skeleton, RejectsHypothesisViolation) {
  ModelParams p;
  p.tauA = -1.0;
  const Mesh m = build_structured_coupled(2, unit);
  EXPECT_THROW(solve_problem(m, build_reference_basis(1), p, ProblemData{}), HypothesisError);
}

TEST(Skeleton, SingularSystemReported) {
  SkeletonSystem sys;
  sys.dofs.k = 0;
  sys.dofs.size = 2;
  sys.dofs.uhat = {-1, -1};
  sys.dofs.vhat = {0, 1};
  sys.matrix.resize(2, 2);
  sys.matrix.insert(0, 0) = 1.0;
  sys.matrix.insert(1, 0) = 2.0;
  sys.matrix.makeCompressed();
  sys.rhs = ComplexVector::Ones(2);
  try {
    solve_skeleton(sys);
    FAIL() << "singular matrix accepted";
  } catch (const SingularSystemError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("discrete system singular"), std::string::npos);
    EXPECT_NE(what.find("face 1"), std::string::npos);
  }
}

TEST(Skeleton, MatrixMarketDump) {
  const ManufacturedCase mc = make_case("coupled63");
  const Mesh m = mc.geometry.mesh(0);
  const HdgSolution sol = solve_problem(m, build_reference_basis(1), mc.params, mc.data());
  const std::string path = (std::filesystem::temp_directory_path() / "hdg_test_dump.mtx").string();
  dump_matrix_market(sol.system, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_NE(header.find("%%MatrixMarket matrix coordinate complex general"), std::string::npos);
  std::string line;
  while (std::getline(in, line) && line[0] == '%') {
  }
  int rows = 0, cols = 0, nnz = 0;
  std::istringstream(line) >> rows >> cols >> nnz;
  EXPECT_EQ(rows, sol.system.dofs.size);
  EXPECT_EQ(cols, sol.system.dofs.size);
  EXPECT_EQ(nnz, sol.system.matrix.nonZeros());
  std::remove(path.c_str());
}
