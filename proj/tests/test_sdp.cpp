#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "isaclab/rng.hpp"
#include "isaclab/sdp.hpp"

using namespace isaclab;

namespace {

MatC random_hermitian(SubStream& s, int n) {
  MatC a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = s.cn();
  return (a + a.adjoint()) / 2.0;
}

double angular_distance(const VecC& a, const VecC& b) {
  const double c = std::abs((a.adjoint() * b)(0, 0)) / (a.norm() * b.norm());
  return std::acos(std::min(1.0, c));
}

SdpProblem max_eigenvalue_problem() {
  // maximize Tr(diag(1,2) X) s.t. Tr(X) = 1, X PSD: optimum e2 e2^T, value 2.
  SdpProblem p;
  p.block_sizes = {2};
  MatC c = MatC::Zero(2, 2);
  c(0, 0) = 1.0;
  c(1, 1) = 2.0;
  p.objective = {c};
  SdpConstraint con;
  con.coeffs = {MatC::Identity(2, 2)};
  con.sense = ConstraintSense::kEq;
  con.rhs = 1.0;
  p.constraints.push_back(con);
  return p;
}

SdpProblem diagonal_floor_problem(int n) {
  // minimize Tr(X) s.t. diag(X) >= 1, X PSD: optimum X = I, value n.
  SdpProblem p;
  p.block_sizes = {n};
  p.objective = {-MatC::Identity(n, n)};
  for (int i = 0; i < n; ++i) {
    SdpConstraint con;
    con.coeffs = {MatC::Zero(n, n)};
    con.coeffs[0](i, i) = 1.0;
    con.sense = ConstraintSense::kGe;
    con.rhs = 1.0;
    p.constraints.push_back(con);
  }
  return p;
}

}  // namespace

TEST_CASE("hermitian to real embedding") {
  SUBCASE("identity doubles") {
    const MatR e = hermitian_to_real_embedding(MatC::Identity(3, 3));
    CHECK((e - MatR::Identity(6, 6)).norm() < 1e-15);
    CHECK(e.trace() == doctest::Approx(2.0 * 3.0));
  }
  SUBCASE("pure imaginary pauli block") {
    MatC x(2, 2);
    x << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
    const MatR e = hermitian_to_real_embedding(x);
    Eigen::SelfAdjointEigenSolver<MatR> es(e);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-1.0));
    CHECK(es.eigenvalues()(1) == doctest::Approx(-1.0));
    CHECK(es.eigenvalues()(2) == doctest::Approx(1.0));
    CHECK(es.eigenvalues()(3) == doctest::Approx(1.0));
  }
  SUBCASE("PSD preserved on random PSD inputs") {
    SubStream s(1, 0, StreamPurpose::kGaussianRandomization);
    const MatC h = random_hermitian(s, 4);
    const MatC psd = h * h.adjoint();
    Eigen::SelfAdjointEigenSolver<MatR> es(hermitian_to_real_embedding(psd));
    CHECK(es.eigenvalues()(0) >= -1e-9 * psd.norm());
    CHECK(hermitian_to_real_embedding(psd).trace() ==
          doctest::Approx(2.0 * std::real(psd.trace())));
  }
  SUBCASE("non-hermitian input is rejected") {
    MatC bad = MatC::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(hermitian_to_real_embedding(bad), std::invalid_argument);
  }
}

TEST_CASE("analytic SDPs solve to 1e-6") {
  SUBCASE("max eigenvalue") {
    const SdpSolution sol = solve_sdp(max_eigenvalue_problem());
    CHECK(sol.status == SdpStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(std::abs(sol.X[0](1, 1).real() - 1.0) < 1e-4);
  }
  SUBCASE("diagonal floor") {
    const SdpSolution sol = solve_sdp(diagonal_floor_problem(5));
    CHECK(sol.status == SdpStatus::kOptimal);
    CHECK(-sol.objective == doctest::Approx(5.0).epsilon(1e-6));
    CHECK((sol.X[0] - MatC::Identity(5, 5)).norm() < 1e-4);
  }
}

TEST_CASE("planted rank-one recovery through the solver") {
  SubStream s(2, 0, StreamPurpose::kGaussianRandomization);
  const int n = 6;
  VecC v(n);
  for (int i = 0; i < n; ++i) v(i) = s.cn();
  const MatC planted = v * v.adjoint();

  SdpProblem p;
  p.block_sizes = {n};
  p.objective = {-MatC::Identity(n, n)};  // trace minimization
  for (int i = 0; i < 24; ++i) {
    SdpConstraint con;
    con.coeffs = {random_hermitian(s, n)};
    con.sense = ConstraintSense::kEq;
    con.rhs = std::real((con.coeffs[0] * planted).trace());
    p.constraints.push_back(con);
  }
  SdpSolverOptions opts;
  opts.tol = 1e-9;
  opts.max_iter = 200000;
  const SdpSolution sol = solve_sdp(p, opts);
  CHECK(sol.status == SdpStatus::kOptimal);
  CHECK(-sol.objective == doctest::Approx(v.squaredNorm()).epsilon(1e-5));
  const RankOneRecovery rec = rank_one_recovery(sol.X[0]);
  CHECK(angular_distance(rec.z, v) < 1e-3);
  CHECK(rec.defect < 1e-4);
}

TEST_CASE("rank one recovery basics") {
  SubStream s(3, 0, StreamPurpose::kGaussianRandomization);
  VecC v(5);
  for (int i = 0; i < 5; ++i) v(i) = s.cn();
  SUBCASE("exact rank-one input") {
    const RankOneRecovery rec = rank_one_recovery(v * v.adjoint());
    CHECK(rec.defect == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(angular_distance(rec.z, v) < 1e-6);
    CHECK(std::abs(rec.z.norm() - v.norm()) < 1e-9);
    // Phase fix: largest-modulus entry real positive.
    Eigen::Index imax;
    rec.z.cwiseAbs().maxCoeff(&imax);
    CHECK(std::abs(std::imag(rec.z(imax))) < 1e-12);
    CHECK(std::real(rec.z(imax)) > 0.0);
  }
  SUBCASE("maximally spread spectrum reports defect 1 - 1/n") {
    const RankOneRecovery rec = rank_one_recovery(MatC::Identity(2, 2));
    CHECK(rec.defect == doctest::Approx(0.5));
  }
  SUBCASE("zero matrix has no direction") {
    CHECK_THROWS_AS(rank_one_recovery(MatC::Zero(3, 3)), std::runtime_error);
  }
  SUBCASE("deterministic under repetition") {
    const MatC z = v * v.adjoint() + 0.3 * MatC::Identity(5, 5);
    const RankOneRecovery a = rank_one_recovery(z);
    const RankOneRecovery b = rank_one_recovery(z);
    CHECK((a.z - b.z).norm() == 0.0);
  }
}

TEST_CASE("solver invariances") {
  SubStream s(4, 0, StreamPurpose::kGaussianRandomization);
  const int n = 4;
  // Random bounded-feasible problem: maximize Tr(C X) s.t. Tr(X) = 1,
  // a few random inequalities with slack room.
  SdpProblem p;
  p.block_sizes = {n};
  p.objective = {random_hermitian(s, n)};
  {
    SdpConstraint con;
    con.coeffs = {MatC::Identity(n, n)};
    con.sense = ConstraintSense::kEq;
    con.rhs = 1.0;
    p.constraints.push_back(con);
    for (int i = 0; i < 3; ++i) {
      SdpConstraint c2;
      c2.coeffs = {random_hermitian(s, n)};
      c2.sense = ConstraintSense::kLe;
      c2.rhs = 0.8 * c2.coeffs[0].norm();
      p.constraints.push_back(c2);
    }
  }
  SdpSolverOptions opts;
  opts.tol = 1e-8;
  opts.max_iter = 100000;
  const SdpSolution base = solve_sdp(p, opts);
  REQUIRE(base.status == SdpStatus::kOptimal);

  SUBCASE("consistent permutation leaves the objective unchanged") {
    std::vector<int> perm{2, 0, 3, 1};
    SdpProblem q = p;
    auto permute = [&](const MatC& m) {
      MatC out(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = m(perm[i], perm[j]);
      return out;
    };
    q.objective[0] = permute(p.objective[0]);
    for (size_t i = 0; i < q.constraints.size(); ++i)
      q.constraints[i].coeffs[0] = permute(p.constraints[i].coeffs[0]);
    const SdpSolution sol = solve_sdp(q, opts);
    CHECK(sol.objective == doctest::Approx(base.objective).epsilon(1e-6));
  }
  SUBCASE("positive objective scaling scales the value") {
    SdpProblem q = p;
    q.objective[0] *= 3.5;
    const SdpSolution sol = solve_sdp(q, opts);
    CHECK(sol.objective == doctest::Approx(3.5 * base.objective).epsilon(1e-6));
    CHECK((sol.X[0] - base.X[0]).norm() < 1e-4);
  }
  SUBCASE("returned block passes an independent PSD check") {
    Eigen::SelfAdjointEigenSolver<MatC> es(base.X[0]);
    CHECK(es.eigenvalues()(0) >= -1e-7 * std::real(base.X[0].trace()));
  }
  SUBCASE("complex solve equals the real-embedded solve") {
    SdpProblem q;
    q.block_sizes = {2 * n};
    q.objective = {hermitian_to_real_embedding(p.objective[0]).cast<cplx>()};
    for (const auto& con : p.constraints) {
      SdpConstraint c2;
      c2.coeffs = {hermitian_to_real_embedding(con.coeffs[0]).cast<cplx>()};
      c2.sense = con.sense;
      c2.rhs = 2.0 * con.rhs;
      q.constraints.push_back(c2);
    }
    const SdpSolution sol = solve_sdp(q, opts);
    CHECK(sol.objective == doctest::Approx(2.0 * base.objective).epsilon(1e-5));
  }
}

TEST_CASE("status reporting") {
  SUBCASE("inconsistent affine system is certified infeasible") {
    SdpProblem p;
    p.block_sizes = {3};
    p.objective = {MatC::Zero(3, 3)};
    SdpConstraint c1;
    c1.coeffs = {MatC::Identity(3, 3)};
    c1.sense = ConstraintSense::kEq;
    c1.rhs = 1.0;
    SdpConstraint c2 = c1;
    c2.rhs = 2.0;
    p.constraints = {c1, c2};
    CHECK(solve_sdp(p).status == SdpStatus::kInfeasible);
  }
  SUBCASE("cone-empty problem runs out of iterations") {
    SdpProblem p = diagonal_floor_problem(3);
    SdpConstraint cap;
    cap.coeffs = {MatC::Identity(3, 3)};
    cap.sense = ConstraintSense::kLe;
    cap.rhs = 0.5;  // diag >= 1 forces Tr >= 3
    p.constraints.push_back(cap);
    SdpSolverOptions opts;
    opts.max_iter = 3000;
    CHECK(solve_sdp(p, opts).status == SdpStatus::kMaxIters);
    opts.stall_exit = true;
    const SdpSolution sol = solve_sdp(p, opts);
    CHECK(sol.status == SdpStatus::kMaxIters);
    CHECK(sol.iterations <= 3000);
  }
}

TEST_CASE("problem dump/load round trip") {
  SubStream s(5, 0, StreamPurpose::kGaussianRandomization);
  SdpProblem p;
  p.block_sizes = {3, 2};
  p.objective = {random_hermitian(s, 3), MatC()};
  SdpConstraint c1;
  c1.coeffs = {random_hermitian(s, 3), random_hermitian(s, 2)};
  c1.sense = ConstraintSense::kLe;
  c1.rhs = 4.2;
  SdpConstraint c2;
  c2.coeffs = {MatC(), MatC::Identity(2, 2)};
  c2.sense = ConstraintSense::kEq;
  c2.rhs = 1.0;
  p.constraints = {c1, c2};

  std::stringstream ss;
  p.dump(ss);
  const SdpProblem q = SdpProblem::load(ss);
  REQUIRE(q.block_sizes == p.block_sizes);
  REQUIRE(q.constraints.size() == p.constraints.size());
  CHECK((q.objective[0] - p.objective[0]).norm() < 1e-14);
  CHECK(q.objective[1].size() == 0);
  CHECK((q.constraints[0].coeffs[1] - c1.coeffs[1]).norm() < 1e-14);
  CHECK(q.constraints[1].sense == ConstraintSense::kEq);
  const SdpSolution a = solve_sdp(p);
  const SdpSolution b = solve_sdp(q);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
}

TEST_CASE("warm starts cut the iteration count on nearby problems") {
  SdpProblem p = diagonal_floor_problem(8);
  SdpWarmStart warm;
  const SdpSolution cold = solve_sdp(p, {}, &warm);
  REQUIRE(cold.status == SdpStatus::kOptimal);
  // Perturb the floor slightly and re-solve from the warm iterate.
  for (auto& con : p.constraints) con.rhs = 1.01;
  const SdpSolution hot = solve_sdp(p, {}, &warm);
  CHECK(hot.status == SdpStatus::kOptimal);
  CHECK(hot.iterations < cold.iterations);
}
