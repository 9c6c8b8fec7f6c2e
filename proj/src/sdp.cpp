#include "isaclab/sdp.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace isaclab {
namespace {

int svec_dim(int n) { return n * n; }

// Real coordinates of a Hermitian matrix: diagonal first, then sqrt(2)-scaled
// real/imaginary parts of the upper triangle. The packing is an isometry:
// dot(svec(A), svec(X)) = Tr(A X) for Hermitian A, X.
void svec_into(const MatC& a, double* out) {
  const int n = static_cast<int>(a.rows());
  int k = 0;
  for (int i = 0; i < n; ++i) out[k++] = std::real(a(i, i));
  const double s = std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      out[k++] = s * std::real(a(i, j));
      out[k++] = s * std::imag(a(i, j));
    }
}

MatC svec_back(const double* x, int n) {
  MatC a(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) a(i, i) = x[k++];
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double re = x[k++] * s;
      const double im = x[k++] * s;
      a(i, j) = cplx(re, im);
      a(j, i) = cplx(re, -im);
    }
  return a;
}

// In-place projection of a svec segment onto the PSD cone. Attempts a
// Cholesky first; near convergence the iterate is already PSD and the
// eigendecomposition is skipped.
void project_psd(double* x, int n, Eigen::SelfAdjointEigenSolver<MatC>& es) {
  MatC a = svec_back(x, n);
  Eigen::LLT<MatC> llt(a);
  if (llt.info() == Eigen::Success) return;
  es.compute(a);
  const VecR evals = es.eigenvalues().cwiseMax(0.0);
  a = es.eigenvectors() * evals.asDiagonal() * es.eigenvectors().adjoint();
  svec_into(a, x);
}

}  // namespace

void SdpProblem::symmetrize() {
  auto make_hermitian = [](MatC& m) {
    if (m.size() == 0) return;
    m = ((m + m.adjoint()) / 2.0).eval();
  };
  for (auto& c : objective) make_hermitian(c);
  for (auto& con : constraints)
    for (auto& a : con.coeffs) make_hermitian(a);
}

void SdpProblem::validate() const {
  if (block_sizes.empty()) throw std::invalid_argument("sdp: no blocks");
  if (objective.size() != block_sizes.size())
    throw std::invalid_argument("sdp: objective/block count mismatch");
  for (size_t b = 0; b < block_sizes.size(); ++b) {
    if (block_sizes[b] < 1) throw std::invalid_argument("sdp: block size must be >= 1");
    if (objective[b].size() != 0 &&
        (objective[b].rows() != block_sizes[b] || objective[b].cols() != block_sizes[b]))
      throw std::invalid_argument("sdp: objective block shape mismatch");
  }
  for (const auto& con : constraints) {
    if (con.coeffs.size() != block_sizes.size())
      throw std::invalid_argument("sdp: constraint/block count mismatch");
    if (!std::isfinite(con.rhs)) throw std::invalid_argument("sdp: non-finite rhs");
    for (size_t b = 0; b < con.coeffs.size(); ++b)
      if (con.coeffs[b].size() != 0 && (con.coeffs[b].rows() != block_sizes[b] ||
                                        con.coeffs[b].cols() != block_sizes[b]))
        throw std::invalid_argument("sdp: constraint block shape mismatch");
  }
}

SdpSolution solve_sdp(const SdpProblem& problem_in, const SdpSolverOptions& options,
                      SdpWarmStart* warm) {
  SdpProblem problem = problem_in;
  problem.symmetrize();
  problem.validate();

  const size_t n_blocks = problem.block_sizes.size();
  std::vector<int> offsets(n_blocks);
  int n_mat = 0;
  for (size_t b = 0; b < n_blocks; ++b) {
    offsets[b] = n_mat;
    n_mat += svec_dim(problem.block_sizes[b]);
  }
  const int m = static_cast<int>(problem.constraints.size());
  int n_slack = 0;
  for (const auto& con : problem.constraints)
    if (con.sense != ConstraintSense::kEq) ++n_slack;
  const int n_total = n_mat + n_slack;

  // Assemble the row-equilibrated affine system A y = b (slack columns carry
  // +1 for <=, -1 for >=). Constraint rows are sparse in the svec
  // coordinates, so the per-iteration products stay cheap.
  Eigen::SparseMatrix<double> a(m, n_total);
  VecR b = VecR::Zero(m);
  {
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<double> row_buf;
    int slack = 0;
    for (int i = 0; i < m; ++i) {
      const auto& con = problem.constraints[static_cast<size_t>(i)];
      std::vector<std::pair<int, double>> entries;
      for (size_t blk = 0; blk < n_blocks; ++blk) {
        if (con.coeffs[blk].size() == 0) continue;
        row_buf.assign(static_cast<size_t>(svec_dim(problem.block_sizes[blk])), 0.0);
        svec_into(con.coeffs[blk], row_buf.data());
        for (size_t k = 0; k < row_buf.size(); ++k)
          if (row_buf[k] != 0.0) entries.emplace_back(offsets[blk] + static_cast<int>(k), row_buf[k]);
      }
      if (con.sense != ConstraintSense::kEq)
        entries.emplace_back(n_mat + slack++, (con.sense == ConstraintSense::kLe) ? 1.0 : -1.0);
      double norm2 = 0.0;
      for (const auto& e : entries) norm2 += e.second * e.second;
      const double scale = std::max(std::sqrt(norm2), 1e-12);
      for (const auto& e : entries)
        triplets.emplace_back(i, e.first, e.second / scale);
      b(i) = con.rhs / scale;
    }
    a.setFromTriplets(triplets.begin(), triplets.end());
  }

  VecR c = VecR::Zero(n_total);
  for (size_t blk = 0; blk < n_blocks; ++blk)
    if (problem.objective[blk].size() != 0)
      svec_into(problem.objective[blk], c.data() + offsets[blk]);
  const double c_scale = std::max(c.norm(), 1e-12);
  const VecR c_unit = c / c_scale;

  SdpSolution sol;
  sol.X.resize(n_blocks);

  const Eigen::SparseMatrix<double> at = a.transpose();
  const MatR gram_dense = MatR(Eigen::SparseMatrix<double>(a * at));
  Eigen::LDLT<MatR> gram(gram_dense);
  // Least-squares consistency check; an inconsistent affine system is the
  // one certified infeasibility.
  {
    VecR mu = gram.solve(b);
    const VecR y0 = at * mu;
    if ((a * y0 - b).norm() > 1e-7 * (1.0 + b.norm())) {
      sol.status = SdpStatus::kInfeasible;
      for (size_t blk = 0; blk < n_blocks; ++blk)
        sol.X[blk] = MatC::Zero(problem.block_sizes[blk], problem.block_sizes[blk]);
      return sol;
    }
  }

  double rho = options.rho;
  VecR y = VecR::Zero(n_total), v = VecR::Zero(n_total), u = VecR::Zero(n_total);
  if (warm && warm->y.size() == n_total) {
    y = warm->y;
    v = warm->v;
    u = warm->dual;
    if (warm->rho > 0.0) rho = warm->rho;
  }

  Eigen::SelfAdjointEigenSolver<MatC> es;
  VecR v_prev = v;
  const double alpha = options.over_relax;
  int iter = 0;
  double r_prim = 0.0, r_dual = 0.0;
  double stall_best = std::numeric_limits<double>::infinity();
  int stall_age = 0;
  for (; iter < options.max_iter; ++iter) {
    // Affine projection of (v - u + c/rho).
    const VecR w = v - u + c_unit / rho;
    y = w - at * gram.solve(a * w - b);
    const VecR y_relaxed = alpha * y + (1.0 - alpha) * v;
    v_prev.swap(v);
    v = y_relaxed + u;
    for (size_t blk = 0; blk < n_blocks; ++blk)
      project_psd(v.data() + offsets[blk], problem.block_sizes[blk], es);
    for (int s = n_mat; s < n_total; ++s) v(s) = std::max(0.0, v(s));
    u += y_relaxed - v;

    r_prim = (y - v).norm() / std::max({1.0, y.norm(), v.norm()});
    r_dual = rho * (v - v_prev).norm() / std::max(1.0, rho * u.norm());
    if (r_prim < options.tol && r_dual < options.tol) {
      ++iter;
      break;
    }
    if (options.stall_exit) {
      const double level = std::max(r_prim, r_dual);
      if (level < 0.95 * stall_best) {
        stall_best = level;
        stall_age = 0;
      } else if (++stall_age >= 250 && level > 20.0 * options.tol) {
        ++iter;
        break;
      }
    }
    if ((iter + 1) % 50 == 0) {
      if (r_prim > 10.0 * r_dual && rho < 1e6) {
        rho *= 2.0;
        u /= 2.0;
      } else if (r_dual > 10.0 * r_prim && rho > 1e-6) {
        rho /= 2.0;
        u *= 2.0;
      }
    }
  }

  if (warm) {
    warm->y = y;
    warm->v = v;
    warm->dual = u;
    warm->rho = rho;
  }

  sol.iterations = iter;
  sol.primal_residual = r_prim;
  sol.dual_residual = r_dual;
  sol.status = (r_prim < options.tol && r_dual < options.tol) ? SdpStatus::kOptimal
                                                              : SdpStatus::kMaxIters;
  double obj = 0.0;
  for (size_t blk = 0; blk < n_blocks; ++blk) {
    sol.X[blk] = svec_back(v.data() + offsets[blk], problem.block_sizes[blk]);
    if (problem.objective[blk].size() != 0)
      obj += std::real((problem.objective[blk] * sol.X[blk]).trace());
  }
  sol.objective = obj;
  return sol;
}

MatR hermitian_to_real_embedding(const MatC& x) {
  if (x.rows() != x.cols()) throw std::invalid_argument("embedding: square matrix required");
  if ((x - x.adjoint()).norm() > 1e-9 * std::max(1.0, x.norm()))
    throw std::invalid_argument("embedding: input is not Hermitian");
  const Eigen::Index n = x.rows();
  MatR r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = x.real();
  r.topRightCorner(n, n) = -x.imag();
  r.bottomLeftCorner(n, n) = x.imag();
  r.bottomRightCorner(n, n) = x.real();
  return r;
}

RankOneRecovery rank_one_recovery(const MatC& Z) {
  const double trace = std::real(Z.trace());
  if (!(trace > 0.0) || Z.norm() < 1e-300)
    throw std::runtime_error("rank_one_recovery: matrix has no principal direction");
  Eigen::SelfAdjointEigenSolver<MatC> es(Z);
  const VecR evals = es.eigenvalues();
  const Eigen::Index n = Z.rows();
  const double lambda1 = evals(n - 1);

  auto phase_fixed = [&](VecC vec) {
    Eigen::Index imax = 0;
    vec.cwiseAbs().maxCoeff(&imax);
    const cplx pivot = vec(imax);
    if (std::abs(pivot) > 0.0) vec *= std::conj(pivot) / std::abs(pivot);
    return vec;
  };

  // Near-degenerate top eigenvalues: deterministic lexicographic tie-break.
  VecC best = phase_fixed(es.eigenvectors().col(n - 1));
  for (Eigen::Index i = n - 2; i >= 0 && lambda1 - evals(i) <= 1e-9 * std::max(lambda1, 1.0);
       --i) {
    const VecC cand = phase_fixed(es.eigenvectors().col(i));
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::real(cand(k)) > std::real(best(k)) + 1e-15) {
        best = cand;
        break;
      }
      if (std::real(best(k)) > std::real(cand(k)) + 1e-15) break;
    }
  }

  RankOneRecovery out;
  out.z = std::sqrt(std::max(lambda1, 0.0)) * best;
  out.defect = 1.0 - std::max(lambda1, 0.0) / trace;
  return out;
}

void SdpProblem::dump(std::ostream& os) const {
  os << "isaclab-sdp 1\n" << block_sizes.size() << "\n";
  for (size_t b = 0; b < block_sizes.size(); ++b)
    os << block_sizes[b] << (b + 1 < block_sizes.size() ? ' ' : '\n');
  os.precision(17);
  auto write_mat = [&](const MatC& m, int n) {
    if (m.size() == 0) {
      os << "0\n";
      return;
    }
    os << "1\n";
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        os << std::real(m(i, j)) << ' ' << std::imag(m(i, j)) << '\n';
  };
  for (size_t b = 0; b < block_sizes.size(); ++b) write_mat(objective[b], block_sizes[b]);
  os << constraints.size() << "\n";
  for (const auto& con : constraints) {
    os << (con.sense == ConstraintSense::kEq ? "eq" : con.sense == ConstraintSense::kLe ? "le" : "ge")
       << ' ' << con.rhs << '\n';
    for (size_t b = 0; b < block_sizes.size(); ++b) write_mat(con.coeffs[b], block_sizes[b]);
  }
}

SdpProblem SdpProblem::load(std::istream& is) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "isaclab-sdp" || version != 1)
    throw std::runtime_error("sdp load: unrecognized header");
  size_t n_blocks = 0;
  is >> n_blocks;
  SdpProblem p;
  p.block_sizes.resize(n_blocks);
  for (auto& s : p.block_sizes) is >> s;
  auto read_mat = [&](int n) {
    int flag = 0;
    is >> flag;
    if (!flag) return MatC();
    MatC m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double re, im;
        is >> re >> im;
        m(i, j) = cplx(re, im);
      }
    return m;
  };
  for (size_t b = 0; b < n_blocks; ++b) p.objective.push_back(read_mat(p.block_sizes[b]));
  size_t n_con = 0;
  is >> n_con;
  for (size_t i = 0; i < n_con; ++i) {
    SdpConstraint con;
    std::string sense;
    is >> sense >> con.rhs;
    con.sense = sense == "eq" ? ConstraintSense::kEq
                              : sense == "le" ? ConstraintSense::kLe : ConstraintSense::kGe;
    for (size_t b = 0; b < n_blocks; ++b) con.coeffs.push_back(read_mat(p.block_sizes[b]));
    p.constraints.push_back(std::move(con));
  }
  if (!is) throw std::runtime_error("sdp load: truncated document");
  return p;
}

}  // namespace isaclab
