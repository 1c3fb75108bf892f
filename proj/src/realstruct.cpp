#include "realmod/realstruct.hpp"

#include "realmod/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace realmod {

std::string_view to_string(Puncture p) {
  switch (p) {
    case Puncture::Left:
      return "left";
    case Puncture::Middle:
      return "middle";
    case Puncture::Right:
      return "right";
  }
  return "?";
}

Puncture parse_puncture(std::string_view name) {
  if (name == "left") return Puncture::Left;
  if (name == "middle") return Puncture::Middle;
  if (name == "right") return Puncture::Right;
  throw ConfigError("unknown puncture '" + std::string(name) + "' (expected left, middle or right)");
}

Quad sigma_star(Puncture p, const Quad& q) {
  const UnitQuaternion b1i = q.b1().inverse();
  const UnitQuaternion b2i = q.b2().inverse();
  UnitQuaternion a1 = q.b1() * q.a1() * b1i;
  UnitQuaternion a2 = q.b2() * q.a2() * b2i;
  switch (p) {
    case Puncture::Left:
      a2 = -a2;
      break;
    case Puncture::Right:
      a1 = -a1;
      break;
    case Puncture::Middle:
      break;
  }
  return {a1, b1i, a2, b2i};
}

Word sigma_star_pi1(Puncture p, Gen g) {
  if (p != Puncture::Left) {
    throw UnsupportedCase("sigma_star_pi1: word formulas are only available for the left puncture");
  }
  const Word a1 = Word::generator(Gen::A1), b1 = Word::generator(Gen::B1);
  const Word a2 = Word::generator(Gen::A2), b2 = Word::generator(Gen::B2);
  switch (g) {
    case Gen::A1:
      return a1;
    case Gen::B1:
      return b1.inverse();
    case Gen::A2:
      return b1.inverse() * Word::boundary() * b2 * a2 * b2.inverse() * b1;
    case Gen::B2:
      return b1.inverse() * b2.inverse() * b1;
  }
  return {};
}

double check_pi1_consistency(const Quad& q) {
  Quad image;
  for (int s = 0; s < 4; ++s) image[s] = evaluate_word(sigma_star_pi1(Puncture::Left, static_cast<Gen>(s)), q);
  return class_distance(image, sigma_star(Puncture::Left, q));
}

Quad residual_r(const Quad& q) { return {-q.a1(), q.b1(), q.a2(), q.b2()}; }

Quad handle_swap(const Quad& q) { return {q.a2(), q.b2(), q.a1(), q.b1()}; }

Quad apply_involution(Involution kind, Puncture p, const Quad& q) {
  return kind == Involution::SigmaStar ? sigma_star(p, q) : residual_r(q);
}

FixedPointCertificate certify_fixed(Involution kind, Puncture p, const Quad& q) {
  const ClassAlignment al = align_classes(apply_involution(kind, p, q), q);
  return {q, al.g, al.distance};
}

FixCheck is_class_fixed(Involution kind, Puncture p, const Quad& q) {
  const double gap = fingerprint(q).gap(fingerprint(apply_involution(kind, p, q)));
  if (gap > 1e-6) return NotFixed{gap};
  return certify_fixed(kind, p, q);
}

FixedPointCertificate symmetrize(Involution kind, Puncture p, const Quad& q0, const SymmetrizeOptions& opts) {
  const double gap = fingerprint(q0).gap(fingerprint(apply_involution(kind, p, q0)));
  if (gap > opts.basin_gap) {
    throw NoConvergence("symmetrize: start outside basin (fingerprint gap " + std::to_string(gap) + ")");
  }
  Quad q = q0;
  for (int it = 0; it <= opts.max_iter; ++it) {
    FixedPointCertificate cert = certify_fixed(kind, p, q);
    if (cert.residual < opts.tol_fixed) return cert;
    if (it == opts.max_iter) break;
    const Quad target = conj_by(cert.conjugator, apply_involution(kind, p, q));
    Quad mid;
    try {
      for (int s = 0; s < 4; ++s) mid[s] = q[s] * exp_su2(log_su2(q[s].inverse() * target[s]) * 0.5);
      q = project_to_variety(mid, opts.projection);
    } catch (const AntipodeError&) {
      throw NoConvergence("symmetrize: midpoint undefined (antipodal factors)");
    }
  }
  throw NoConvergence("symmetrize: no convergence after " + std::to_string(opts.max_iter) + " iterations");
}

namespace {

using Vector19 = Eigen::Matrix<double, 19, 1>;

// Residual of {mu(q) = 1, u map(q) = q u}; the twisted part is bilinear in
// (q, u) and smooth everywhere, unlike a logarithmic residual.
Vector19 twisted_residual(Involution kind, Puncture p, const Quad& q, const UnitQuaternion& u) {
  Vector19 r;
  r.head<3>() = constraint_residual(q).vec();
  const Quad image = apply_involution(kind, p, q);
  for (int s = 0; s < 4; ++s) r.segment<4>(3 + 4 * s) = (u * image[s]).vec() - (q[s] * u).vec();
  return r;
}

struct TwistedState {
  Quad q;
  UnitQuaternion u;
};

TwistedState advance(const TwistedState& s, const Eigen::VectorXd& step) {
  TwistedState out{retract(s.q, Vector12(step.head<12>())), s.u};
  if (step.size() == 15) out.u = s.u * exp_su2(Su2Vector(Eigen::Vector3d(step.tail<3>())));
  return out;
}

double norm_or_inf(Involution kind, Puncture p, const TwistedState& s) {
  try {
    return twisted_residual(kind, p, s.q, s.u).norm();
  } catch (const AntipodeError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

Quad solve_twisted_fixed_system(Involution kind, Puncture p, const Quad& q0, const UnitQuaternion& u0,
                                bool free_conjugator) {
  constexpr double kTol = 1e-13;
  constexpr double kFd = 1e-6;
  const int unknowns = free_conjugator ? 15 : 12;
  TwistedState s{q0, u0};
  double res = norm_or_inf(kind, p, s);
  if (!std::isfinite(res)) throw NoConvergence("fixed-point search: degenerate start");
  for (int it = 0; it < 100 && res >= kTol; ++it) {
    const Vector19 r = twisted_residual(kind, p, s.q, s.u);
    Eigen::MatrixXd jac(19, unknowns);
    for (int c = 0; c < unknowns; ++c) {
      const Eigen::VectorXd e = Eigen::VectorXd::Unit(unknowns, c) * kFd;
      const TwistedState plus = advance(s, e), minus = advance(s, -e);
      jac.col(c) = (twisted_residual(kind, p, plus.q, plus.u) - twisted_residual(kind, p, minus.q, minus.u)) /
                   (2 * kFd);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-8);
    Eigen::VectorXd step = -svd.solve(Eigen::VectorXd(r));
    if (step.norm() > 1.0) step /= step.norm();
    bool accepted = false;
    double scale = 1.0;
    for (int ls = 0; ls < 30; ++ls, scale *= 0.5) {
      const TwistedState cand = advance(s, scale * step);
      const double rc = norm_or_inf(kind, p, cand);
      if (rc < res) {
        s = cand;
        res = rc;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (res >= 1e-9) throw NoConvergence("fixed-point search: Gauss-Newton stalled at residual " + std::to_string(res));
  return s.q;
}

FixedPointCertificate search_fixed_point(Involution kind, Puncture p, const Quad& q0, RandomSource& rng) {
  constexpr int kConjugatorStarts = 8;
  SymmetrizeOptions opts;
  opts.tol_fixed = 1e-11;
  // First guess: best alignment of map(q0) onto q0; then Haar restarts of u only.
  UnitQuaternion u0 = align_classes(apply_involution(kind, p, q0), q0).g;
  for (int attempt = 0; attempt < kConjugatorStarts; ++attempt) {
    try {
      const Quad q = project_to_variety(solve_twisted_fixed_system(kind, p, q0, u0, true), {1e-13, 100});
      return symmetrize(kind, p, q, opts);
    } catch (const NoConvergence&) {
    } catch (const AntipodeError&) {
    }
    u0 = haar_sample(rng);
  }
  throw NoConvergence("search_fixed_point: no conjugator start converged");
}

FixedPointCertificate random_fixed_point(Puncture p, RandomSource& rng) {
  constexpr int kAttempts = 10;
  SymmetrizeOptions opts;
  opts.tol_fixed = 1e-11;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    try {
      const Quad start = haar_quad(rng);
      const Quad q = project_to_variety(solve_twisted_fixed_system(Involution::SigmaStar, p, start, kI, false),
                                        {1e-13, 100});
      if (!is_irreducible(q)) continue;
      return symmetrize(Involution::SigmaStar, p, q, opts);
    } catch (const NoConvergence&) {
    } catch (const AntipodeError&) {
    }
  }
  throw NoConvergence("random_fixed_point: failed " + std::to_string(kAttempts) + " attempts");
}

Matrix12 map_differential(const std::function<Quad(const Quad&)>& map, const Quad& q, double step) {
  const Quad base = map(q);
  Matrix12 d;
  for (int c = 0; c < 12; ++c) {
    const Vector12 e = Vector12::Unit(c) * step;
    d.col(c) = (body_difference(base, map(retract(q, e))) - body_difference(base, map(retract(q, Vector12(-e))))) /
               (2 * step);
  }
  return d;
}

Matrix12 involution_differential(Involution kind, Puncture p, const FixedPointCertificate& cert, double step) {
  const UnitQuaternion g = cert.conjugator;
  return map_differential([&](const Quad& x) { return conj_by(g, apply_involution(kind, p, x)); }, cert.quad, step);
}

Eigen::MatrixXd involution_in_frame(Involution kind, Puncture p, const FixedPointCertificate& cert,
                                    const TangentFrame& frame_m) {
  const Eigen::MatrixXd f = frame_m.matrix();
  return f.transpose() * involution_differential(kind, p, cert) * f;
}

AmbientTangent linearized_involution(Puncture p, const FixedPointCertificate& cert, const AmbientTangent& v) {
  const Eigen::MatrixXd f = tangent_frame_M(cert.quad).matrix();
  const Matrix12 d = involution_differential(Involution::SigmaStar, p, cert);
  return AmbientTangent(Vector12(f * (f.transpose() * (d * v.v))));
}

TangentFrame tangent_frame_Mprime(Puncture p, const FixedPointCertificate& cert) {
  const TangentFrame fm = tangent_frame_M(cert.quad);
  const Eigen::MatrixXd tau = involution_in_frame(Involution::SigmaStar, p, cert, fm);
  const Eigen::Index n = tau.rows();
  // Range of the projector (I + tau)/2 is the +1 eigenspace.
  const Eigen::MatrixXd proj = 0.5 * (Eigen::MatrixXd::Identity(n, n) + tau);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(proj, Eigen::ComputeFullU);
  int rank = 0;
  for (Eigen::Index k = 0; k < n; ++k) rank += svd.singularValues()[k] > 0.5 ? 1 : 0;
  if (rank != 3) {
    throw RankError("tangent_frame_Mprime: +1 eigenspace has dimension " + std::to_string(rank) + " != 3");
  }
  const Eigen::MatrixXd basis = fm.matrix() * svd.matrixU().leftCols(3);
  TangentFrame out{cert.quad, {}};
  for (int c = 0; c < 3; ++c) out.vectors.emplace_back(Vector12(basis.col(c)));
  return out;
}

}  // namespace realmod
