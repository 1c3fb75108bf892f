#include "realmod/repvar.hpp"

#include "realmod/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace realmod {

Quad conj_by(const UnitQuaternion& g, const Quad& q) {
  const UnitQuaternion gi = g.inverse();
  Quad r;
  for (int s = 0; s < 4; ++s) r[s] = g * q[s] * gi;
  return r;
}

double distance(const Quad& p, const Quad& q) {
  double acc = 0.0;
  for (int s = 0; s < 4; ++s) acc += (p[s].vec() - q[s].vec()).squaredNorm();
  return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Words

Word::Word(std::vector<Letter> letters, int sign) : letters_(std::move(letters)), sign_(sign < 0 ? -1 : 1) {
  reduce();
}

void Word::reduce() {
  std::vector<Letter> out;
  out.reserve(letters_.size());
  for (const Letter& l : letters_) {
    if (!out.empty() && out.back().gen == l.gen && out.back().exponent == -l.exponent) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  letters_ = std::move(out);
}

Word operator*(const Word& u, const Word& v) {
  std::vector<Letter> letters = u.letters_;
  letters.insert(letters.end(), v.letters_.begin(), v.letters_.end());
  return Word(std::move(letters), u.sign_ * v.sign_);
}

Word Word::inverse() const {
  std::vector<Letter> letters(letters_.rbegin(), letters_.rend());
  for (Letter& l : letters) l.exponent = -l.exponent;
  return Word(std::move(letters), sign_);
}

Word Word::commutator(const Word& x, const Word& y) { return x * y * x.inverse() * y.inverse(); }

Word Word::boundary() {
  return commutator(generator(Gen::A1), generator(Gen::B1)) * commutator(generator(Gen::A2), generator(Gen::B2));
}

UnitQuaternion evaluate_word(const Word& w, const Quad& q) {
  UnitQuaternion p = w.sign() < 0 ? -kOne : kOne;
  for (const Letter& l : w.letters()) {
    const UnitQuaternion& x = q[l.gen];
    p = p * (l.exponent > 0 ? x : x.inverse());
  }
  return p;
}

// ---------------------------------------------------------------------------
// Tangents

AmbientTangent::AmbientTangent(const Su2Vector& v1, const Su2Vector& u1, const Su2Vector& v2, const Su2Vector& u2) {
  const Su2Vector parts[4] = {v1, u1, v2, u2};
  for (int s = 0; s < 4; ++s) v.segment<3>(3 * s) = parts[s].vec();
}

Quad retract(const Quad& q, const Vector12& v) {
  Quad r;
  for (int s = 0; s < 4; ++s) {
    r[s] = q[s] * exp_su2(Su2Vector(Eigen::Vector3d(v.segment<3>(3 * s))));
  }
  return r;
}

Quad retract(const Quad& q, const AmbientTangent& t) { return retract(q, t.v); }

Vector12 body_difference(const Quad& p, const Quad& q) {
  Vector12 v;
  for (int s = 0; s < 4; ++s) v.segment<3>(3 * s) = log_su2(p[s].inverse() * q[s]).vec();
  return v;
}

Eigen::MatrixXd TangentFrame::matrix() const {
  Eigen::MatrixXd m(12, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t c = 0; c < vectors.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = vectors[c].v;
  return m;
}

double TraceFingerprint::gap(const TraceFingerprint& o) const {
  double g = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) g = std::max(g, std::abs(t[k] - o.t[k]));
  return g;
}

// ---------------------------------------------------------------------------
// Constraint

UnitQuaternion mu(const Quad& q) { return -(commutator(q.a1(), q.b1()) * commutator(q.a2(), q.b2())); }

Su2Vector constraint_residual(const Quad& q) { return log_su2(mu(q)); }

Matrix3x12 word_jacobian(const Word& w, const Quad& q) {
  Matrix3x12 jac = Matrix3x12::Zero();
  UnitQuaternion prefix = kOne;
  for (const Letter& l : w.letters()) {
    const int s = static_cast<int>(l.gen);
    if (l.exponent > 0) {
      prefix = prefix * q[s];
      jac.block<3, 3>(0, 3 * s) += adjoint_matrix(prefix);
    } else {
      jac.block<3, 3>(0, 3 * s) -= adjoint_matrix(prefix);
      prefix = prefix * q[s].inverse();
    }
  }
  return jac;
}

Matrix3x12 mu_jacobian(const Quad& q) {
  static const Word c = Word::boundary();
  return word_jacobian(c, q);
}

namespace {

double residual_norm_or_inf(const Quad& q) {
  try {
    return constraint_residual(q).norm();
  } catch (const AntipodeError&) {
    return std::numeric_limits<double>::infinity();
  }
}

// One minimum-norm Gauss-Newton step with backtracking; false if no decrease.
bool newton_step(ProjectResult& res) {
  const Matrix3x12 jac = mu_jacobian(res.quad);
  const Eigen::Vector3d r = constraint_residual(res.quad).vec();
  const Eigen::Matrix3d jjt = jac * jac.transpose();
  // Minimum-norm step J^T (J J^T)^+ r; the pseudo-inverse only matters at reducibles.
  const Eigen::Vector3d y = jjt.completeOrthogonalDecomposition().solve(r);
  Vector12 step = -(jac.transpose() * y);
  constexpr double kMaxStep = 1.0;
  if (step.norm() > kMaxStep) step *= kMaxStep / step.norm();

  double scale = 1.0;
  for (int ls = 0; ls < 40; ++ls, scale *= 0.5) {
    const Quad cand = retract(res.quad, Vector12(scale * step));
    const double rc = residual_norm_or_inf(cand);
    if (rc < res.residual) {
      res.quad = cand;
      res.residual = rc;
      return true;
    }
  }
  return false;
}

}  // namespace

ProjectResult project_to_variety_detailed(const Quad& q0, const ProjectOptions& opts) {
  ProjectResult res{q0, 0, constraint_residual(q0).norm()};
  if (res.residual < opts.tol) return res;
  while (res.residual >= opts.tol) {
    if (res.iterations >= opts.max_iter) {
      throw NoConvergence("project_to_variety: no convergence after " + std::to_string(opts.max_iter) +
                          " iterations, residual " + std::to_string(res.residual));
    }
    ++res.iterations;
    if (!newton_step(res)) {
      if (std::isinf(residual_norm_or_inf(res.quad))) throw AntipodeError("project_to_variety: reached mu = -1");
      throw NoConvergence("project_to_variety: line search stalled at residual " + std::to_string(res.residual));
    }
  }
  for (int k = 0; k < opts.polish_steps && res.residual > 0.0; ++k) {
    if (!newton_step(res)) break;
  }
  return res;
}

Quad project_to_variety(const Quad& q0, const ProjectOptions& opts) {
  return project_to_variety_detailed(q0, opts).quad;
}

Quad haar_quad(RandomSource& rng) {
  Quad q;
  for (int s = 0; s < 4; ++s) q[s] = haar_sample(rng);
  return q;
}

Quad random_point(RandomSource& rng) {
  constexpr int kAttempts = 10;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    try {
      return project_to_variety(haar_quad(rng));
    } catch (const NoConvergence&) {
    } catch (const AntipodeError&) {
    }
  }
  throw NoConvergence("random_point: projection failed " + std::to_string(kAttempts) + " times");
}

// ---------------------------------------------------------------------------
// Geometry of the quotient

std::vector<Vector12> gram_schmidt(const std::vector<Vector12>& basis, const std::vector<Vector12>& candidates,
                                   double drop_below) {
  std::vector<Vector12> all = basis;
  std::vector<Vector12> kept;
  for (const Vector12& c : candidates) {
    Vector12 v = c;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector12& b : all) v -= b.dot(v) * b;
    }
    const double n = v.norm();
    if (n < drop_below) continue;
    v /= n;
    all.push_back(v);
    kept.push_back(v);
  }
  return kept;
}

namespace {

std::vector<Vector12> raw_gauge_vectors(const Quad& q) {
  std::vector<Vector12> raw;
  for (const UnitQuaternion& u : {kI, kJ, kK}) {
    Vector12 v;
    for (int s = 0; s < 4; ++s) {
      v.segment<3>(3 * s) = (adjoint(q[s].inverse(), u.imag()) - u.imag()).vec();
    }
    raw.push_back(v);
  }
  return raw;
}

}  // namespace

std::vector<AmbientTangent> gauge_directions(const Quad& q) {
  const auto ortho = gram_schmidt({}, raw_gauge_vectors(q));
  if (ortho.size() < 3) {
    throw DegenerateGauge("gauge_directions: rank " + std::to_string(ortho.size()) + " < 3 (reducible tuple)");
  }
  std::vector<AmbientTangent> out;
  for (const auto& v : ortho) out.emplace_back(v);
  return out;
}

TangentFrame tangent_frame_M(const Quad& q) {
  const Matrix3x12 jac = mu_jacobian(q);
  std::vector<Vector12> normal;
  for (int r = 0; r < 3; ++r) normal.push_back(jac.row(r).transpose());
  for (const auto& g : gauge_directions(q)) normal.push_back(g.v);
  const auto excluded = gram_schmidt({}, normal);
  if (excluded.size() != 6) {
    throw RankError("tangent_frame_M: constraint and gauge span " + std::to_string(excluded.size()) + " != 6");
  }
  std::vector<Vector12> axes;
  for (int k = 0; k < 12; ++k) axes.push_back(Vector12::Unit(k));
  const auto frame = gram_schmidt(excluded, axes);
  if (frame.size() != 6) {
    throw RankError("tangent_frame_M: computed dimension " + std::to_string(frame.size()) + " != 6");
  }
  TangentFrame tf{q, {}};
  for (const auto& v : frame) tf.vectors.emplace_back(v);
  return tf;
}

TraceFingerprint fingerprint(const Quad& q) {
  TraceFingerprint fp;
  int k = 0;
  for (int a = 0; a < 4; ++a) fp.t[k++] = trace(q[a]);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) fp.t[k++] = trace(q[a] * q[b]);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      for (int c = b + 1; c < 4; ++c) fp.t[k++] = trace(q[a] * q[b] * q[c]);
  return fp;
}

ClassAlignment align_classes(const Quad& p, const Quad& q) {
  const ConjugatorFit fit = solve_conjugator(p.x, q.x);
  return {fit.g, distance(conj_by(fit.g, p), q)};
}

double class_distance(const Quad& p, const Quad& q) { return align_classes(p, q).distance; }

bool is_irreducible(const Quad& q) {
  Eigen::Matrix<double, 3, 10> m;
  int c = 0;
  for (int a = 0; a < 4; ++a) m.col(c++) = q[a].imag().vec();
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) m.col(c++) = (q[a] * q[b]).imag().vec();
  const Eigen::Vector3d sv = Eigen::JacobiSVD<Eigen::Matrix<double, 3, 10>>(m).singularValues();
  int rank = 0;
  for (int k = 0; k < 3; ++k) rank += sv[k] > 1e-8 ? 1 : 0;
  return rank >= 2;
}

}  // namespace realmod
