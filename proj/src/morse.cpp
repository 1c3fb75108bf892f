#include "realmod/morse.hpp"

#include "realmod/errors.hpp"
#include "realmod/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace realmod {

namespace {

constexpr double kPi = std::numbers::pi;

UnitQuaternion unit_k(double t) { return UnitQuaternion::exact(std::cos(t), 0, 0, std::sin(t)); }

UnitQuaternion in_ij_plane(double t) { return UnitQuaternion::exact(0, std::cos(t), std::sin(t), 0); }

}  // namespace

double morse_function(const Quad& q) { return 0.5 * trace(q.b1()); }

Quad sign_change(const Quad& q) { return {q.a1(), -q.b1(), q.a2(), q.b2()}; }

std::string_view to_string(Family f) {
  switch (f) {
    case Family::S1p:
      return "S1p";
    case Family::S2p:
      return "S2p";
    case Family::S3p:
      return "S3p";
  }
  return "?";
}

double family_value(Family f) {
  switch (f) {
    case Family::S1p:
      return -1.0;
    case Family::S2p:
      return 0.0;
    case Family::S3p:
      return 1.0;
  }
  return 0.0;
}

Quad critical_point(Family fam, double t, int branch, Puncture p) {
  const UnitQuaternion sgn = branch < 0 ? -kOne : kOne;
  if (fam == Family::S2p) {
    const UnitQuaternion a2 = p == Puncture::Left ? sgn * kI : sgn;
    return {kJ, kI, a2, unit_complex(t)};
  }
  const UnitQuaternion b1 = fam == Family::S1p ? -kOne : kOne;
  UnitQuaternion a1;
  switch (p) {
    case Puncture::Left:
      a1 = unit_complex(t);
      break;
    case Puncture::Middle:
      a1 = unit_k(t);
      break;
    case Puncture::Right:
      a1 = in_ij_plane(t);
      break;
  }
  return {a1, b1, kI, kJ};
}

Vector12 critical_tangent(Family fam, double t, int branch, Puncture p) {
  constexpr double h = 1e-6;
  const Quad x = critical_point(fam, t, branch, p);
  return (body_difference(x, critical_point(fam, t + h, branch, p)) -
          body_difference(x, critical_point(fam, t - h, branch, p))) /
         (2 * h);
}

AmbientTangent ambient_gradient(const Quad& q) {
  AmbientTangent g;
  g.v.segment<3>(3) = -q.b1().imag().vec();
  return g;
}

AmbientTangent grad_fprime(const TangentFrame& frame_mprime) {
  const Eigen::MatrixXd e = frame_mprime.matrix();
  return AmbientTangent(Vector12(e * (e.transpose() * ambient_gradient(frame_mprime.base).v)));
}

AmbientTangent grad_fprime(Puncture p, const FixedPointCertificate& cert) {
  return grad_fprime(tangent_frame_Mprime(p, cert));
}

Eigen::Matrix3d hessian_fprime(const TangentFrame& frame, const HessianOptions& opts) {
  const double gn = grad_fprime(frame).norm();
  if (gn >= opts.tol_grad) {
    throw NotCritical("hessian_fprime: gradient norm " + std::to_string(gn) + " >= " + std::to_string(opts.tol_grad));
  }
  const Eigen::MatrixXd e = frame.matrix();
  const ProjectOptions proj{1e-13, 50, 2};
  const double h = opts.step;
  auto f_at = [&](const Eigen::Vector3d& c) {
    return morse_function(project_to_variety(retract(frame.base, Vector12(e * c)), proj));
  };
  const double f0 = morse_function(frame.base);
  Eigen::Matrix3d hess;
  for (int a = 0; a < 3; ++a) {
    const Eigen::Vector3d ea = Eigen::Vector3d::Unit(a) * h;
    hess(a, a) = (f_at(ea) - 2 * f0 + f_at(-ea)) / (h * h);
    for (int b = 0; b < a; ++b) {
      const Eigen::Vector3d eb = Eigen::Vector3d::Unit(b) * h;
      hess(a, b) = (f_at(ea + eb) - f_at(ea - eb) - f_at(eb - ea) + f_at(-ea - eb)) / (4 * h * h);
      hess(b, a) = hess(a, b);
    }
  }
  return hess;
}

Eigen::Matrix3d hessian_fprime(Puncture p, const FixedPointCertificate& cert, const HessianOptions& opts) {
  return hessian_fprime(tangent_frame_Mprime(p, cert), opts);
}

namespace {

CriticalClassification classify_in_frame(const TangentFrame& frame, double tol_eig, const HessianOptions& opts) {
  const Eigen::Matrix3d hess = hessian_fprime(frame, opts);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(hess);
  CriticalClassification out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  out.frame = frame;
  const double rho = out.eigenvalues.cwiseAbs().maxCoeff();
  out.threshold = std::max(tol_eig * rho, 1e-8);
  for (int k = 0; k < 3; ++k) {
    const double l = out.eigenvalues[k];
    if (l < -out.threshold) {
      ++out.index;
    } else if (l > out.threshold) {
      ++out.positive;
    } else {
      ++out.nullity;
    }
  }
  return out;
}

}  // namespace

CriticalClassification classify_critical(Puncture p, const FixedPointCertificate& cert, double tol_eig,
                                         const HessianOptions& opts) {
  return classify_in_frame(tangent_frame_Mprime(p, cert), tol_eig, opts);
}

Quad gauge_normal_form(const Quad& q) {
  const double f = morse_function(q);
  if (std::abs(f) >= 1.0 - 1e-9) {
    throw BoundaryError("circle action undefined at |f| = " + std::to_string(std::abs(f)));
  }
  const UnitQuaternion target = unit_complex(std::acos(f));
  const UnitQuaternion b1[] = {q.b1()};
  const UnitQuaternion tg[] = {target};
  return conj_by(solve_conjugator(b1, tg).g, q);
}

Quad circle_action(double phi, const Quad& q) {
  const Quad n = gauge_normal_form(q);
  return {n.a1() * unit_complex(phi), n.b1(), n.a2(), n.b2()};
}

// ---------------------------------------------------------------------------
// Flow

namespace {

struct FlowPoint {
  FixedPointCertificate cert;
  Vector12 grad;
  double f = 0.0;
};

FlowPoint evaluate(Puncture p, const FixedPointCertificate& cert) {
  return {cert, grad_fprime(tangent_frame_Mprime(p, cert)).v, morse_function(cert.quad)};
}

// Retract, project and re-symmetrize; nullopt when any of them fails.
std::optional<FlowPoint> stage(Puncture p, const Quad& q, const Vector12& v, const SymmetrizeOptions& sym) {
  try {
    const Quad moved = project_to_variety(retract(q, v), sym.projection);
    return evaluate(p, symmetrize(Involution::SigmaStar, p, moved, sym));
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

FlowResult flow(Puncture p, const FixedPointCertificate& cert, FlowDirection dir, const FlowOptions& opts) {
  const double sign = dir == FlowDirection::Down ? -1.0 : 1.0;
  SymmetrizeOptions sym;
  sym.tol_fixed = opts.tol_fixed;
  sym.projection = {1e-12, 100, 0};

  FlowPoint cur = evaluate(p, cert);
  FlowResult res;
  double h = opts.initial_step;
  int attempts = 0;
  const int max_attempts = 4 * opts.max_steps;
  while (true) {
    res.grad_norm = cur.grad.norm();
    if (res.grad_norm < opts.tol_grad) {
      res.converged = true;
      break;
    }
    if (res.steps >= opts.max_steps || attempts >= max_attempts || h < opts.min_step) break;
    ++attempts;

    const Quad& q = cur.cert.quad;
    const Vector12 k1 = sign * cur.grad;
    const auto s2 = stage(p, q, 0.5 * h * k1, sym);
    std::optional<FlowPoint> s3, s4, next;
    if (s2) s3 = stage(p, q, 0.5 * h * sign * s2->grad, sym);
    if (s3) s4 = stage(p, q, h * sign * s3->grad, sym);
    if (s4) {
      const Vector12 incr = (h / 6.0) * (k1 + 2 * sign * s2->grad + 2 * sign * s3->grad + sign * s4->grad);
      next = stage(p, q, incr, sym);
    }
    // Near a critical circle f is flat to rounding; fall back on |grad| decrease.
    if (!next || sign * (next->f - cur.f) < -1e-14 ||
        (std::abs(next->f - cur.f) < 1e-12 && next->grad.norm() > cur.grad.norm())) {
      h *= 0.5;
      continue;
    }
    cur = *next;
    ++res.steps;
    h = std::min(1.5 * h, opts.max_step);
  }
  res.limit = cur.cert.quad;
  res.f_limit = cur.f;
  return res;
}

// ---------------------------------------------------------------------------
// Family matching and census

namespace {

struct Candidate {
  Family family;
  int branch;
};

constexpr Candidate kCandidates[] = {
    {Family::S1p, 1}, {Family::S2p, 1}, {Family::S2p, -1}, {Family::S3p, 1}};

double fingerprint_sq(const TraceFingerprint& a, const TraceFingerprint& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.t.size(); ++k) s += (a.t[k] - b.t[k]) * (a.t[k] - b.t[k]);
  return s;
}

}  // namespace

FamilyMatch fit_family(Puncture p, Family fam, int branch, const Quad& q) {
  constexpr int kGrid = 64;
  const TraceFingerprint fq = fingerprint(q);
  auto cost = [&](double t) { return fingerprint_sq(fingerprint(critical_point(fam, t, branch, p)), fq); };
  int k_best = 0;
  double c_best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kGrid; ++k) {
    const double v = cost(2 * kPi * k / kGrid);
    if (v < c_best) {
      c_best = v;
      k_best = k;
    }
  }
  // golden-section refinement inside the neighbouring grid cells
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 2 * kPi * (k_best - 1) / kGrid, hi = 2 * kPi * (k_best + 1) / kGrid;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = cost(x1), f2 = cost(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = cost(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = cost(x2);
    }
  }
  FamilyMatch m;
  m.family = fam;
  m.branch = branch;
  m.parameter = std::fmod(0.5 * (lo + hi) + 2 * kPi, 2 * kPi);
  const Quad x = critical_point(fam, m.parameter, branch, p);
  m.fingerprint_gap = fingerprint(x).gap(fq);
  m.class_distance = class_distance(x, q);
  return m;
}

FamilyMatch match_family(Puncture p, const Quad& q, double tol) {
  FamilyMatch best;
  best.fingerprint_gap = std::numeric_limits<double>::infinity();
  for (const Candidate& c : kCandidates) {
    const FamilyMatch m = fit_family(p, c.family, c.branch, q);
    if (m.fingerprint_gap < best.fingerprint_gap) best = m;
  }
  best.matched = best.class_distance < tol;
  return best;
}

namespace {

CensusLimit classify_limit(Puncture p, const FlowResult& fr, double tol_match) {
  CensusLimit lim;
  lim.flow = fr;
  lim.fingerprint = fingerprint(fr.limit);
  lim.match = match_family(p, fr.limit, tol_match);
  return lim;
}

}  // namespace

CensusReport critical_census(Puncture p, int n, std::uint64_t seed, const CensusOptions& opts) {
  CensusReport rep;
  rep.puncture = p;
  rep.n = n;
  rep.samples.resize(static_cast<std::size_t>(std::max(n, 0)));
  parallel_for(n, opts.threads, [&](int k) {
    CensusSample& s = rep.samples[static_cast<std::size_t>(k)];
    s.task = static_cast<std::uint64_t>(k);
    RandomSource rng(derive_seed(seed, s.task));
    try {
      const FixedPointCertificate start = random_fixed_point(p, rng);
      s.f_start = morse_function(start.quad);
      s.down = classify_limit(p, flow(p, start, FlowDirection::Down, opts.flow), opts.tol_match);
      s.up = classify_limit(p, flow(p, start, FlowDirection::Up, opts.flow), opts.tol_match);
      s.started = true;
    } catch (const Error& e) {
      s.error = e.what();
    }
  });

  for (const CensusSample& s : rep.samples) {
    if (!s.started) {
      ++rep.failed_starts;
      continue;
    }
    for (const CensusLimit* lim : {&s.down, &s.up}) {
      if (!lim->flow.converged) ++rep.nonconverged;
      const double f = lim->flow.f_limit;
      const int bin = std::clamp(static_cast<int>((f + 1.0) / 2.0 * 20.0), 0, 19);
      ++rep.histogram[static_cast<std::size_t>(bin)];
      double dev = std::numeric_limits<double>::infinity();
      for (Family fam : kAllFamilies) dev = std::min(dev, std::abs(f - family_value(fam)));
      rep.max_value_deviation = std::max(rep.max_value_deviation, dev);
      const bool value_ok = dev <= opts.tol_value;
      if (!lim->match.matched || !value_ok ||
          std::abs(f - family_value(lim->match.family)) > opts.tol_value) {
        ++rep.unmatched;
      } else {
        ++rep.family_counts[static_cast<std::size_t>(lim->match.family)];
      }
    }
  }
  return rep;
}

Quad s2_torus_point(double a, double b) { return {kJ, kI, unit_complex(a), unit_complex(b)}; }

double s2_torus_distance(const Quad& q) {
  const UnitQuaternion xs[] = {q.a1(), q.b1()};
  const UnitQuaternion ys[] = {kJ, kI};
  const Quad y = conj_by(solve_conjugator(xs, ys).g, q);
  auto angle = [](const UnitQuaternion& x) { return std::atan2(x.x, x.w); };
  return class_distance(q, s2_torus_point(angle(y.a2()), angle(y.b2())));
}

// ---------------------------------------------------------------------------
// Family analysis

std::string_view to_string(RAction a) {
  switch (a) {
    case RAction::RotationByPi:
      return "rotation_by_pi";
    case RAction::Trivial:
      return "trivial";
    case RAction::Unknown:
      return "unknown";
  }
  return "?";
}

std::string_view to_string(BundleAction a) {
  switch (a) {
    case BundleAction::Preserves:
      return "preserves";
    case BundleAction::Reverses:
      return "reverses";
    case BundleAction::NotApplicable:
      return "not_applicable";
    case BundleAction::Unknown:
      return "unknown";
  }
  return "?";
}

namespace {

// Linear action of the conjugated involution on one free slot, in the given basis.
struct SlotAction {
  Eigen::MatrixXd matrix;
  double defect = 0.0;
};

Eigen::VectorXd coords(const std::vector<UnitQuaternion>& basis, const UnitQuaternion& x, double& defect) {
  Eigen::MatrixXd b(4, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t c = 0; c < basis.size(); ++c) b.col(static_cast<Eigen::Index>(c)) = basis[c].vec();
  const Eigen::VectorXd a = b.colPivHouseholderQr().solve(x.vec());
  defect = std::max(defect, (b * a - x.vec()).norm());
  return a;
}

SlotAction slot_action(Puncture p, const Quad& base, int slot, const std::vector<UnitQuaternion>& basis,
                       const std::vector<int>& fixed_slots) {
  const Quad img = sigma_star(p, base);
  std::vector<UnitQuaternion> xs, ys;
  for (int s : fixed_slots) {
    xs.push_back(img[s]);
    ys.push_back(base[s]);
  }
  const ConjugatorFit fit = solve_conjugator(xs, ys);
  SlotAction out;
  out.defect = fit.residual;
  auto act = [&](const UnitQuaternion& x) {
    Quad q = base;
    q[slot] = x;
    return conj_by(fit.g, sigma_star(p, q)[slot]);
  };
  const auto n = static_cast<Eigen::Index>(basis.size());
  out.matrix.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) out.matrix.col(c) = coords(basis, act(basis[static_cast<std::size_t>(c)]), out.defect);
  // linearity on a generic unit combination
  Eigen::VectorXd alpha = Eigen::VectorXd::LinSpaced(n, 0.3, 1.1);
  alpha.normalize();
  Eigen::Vector4d x = Eigen::Vector4d::Zero();
  for (Eigen::Index c = 0; c < n; ++c) x += alpha[c] * basis[static_cast<std::size_t>(c)].vec();
  const Eigen::VectorXd direct = coords(basis, act(UnitQuaternion::normalized(x)), out.defect);
  out.defect = std::max(out.defect, (direct - out.matrix * alpha / x.norm()).norm());
  return out;
}

}  // namespace

ComponentCount fixed_locus_components(Puncture p, Family fam) {
  struct Free {
    int slot;
    std::vector<UnitQuaternion> basis;
  };
  std::vector<Free> free;
  std::vector<int> fixed;
  if (fam == Family::S2p) {
    free = {{2, {kOne, kI}}, {3, {kOne, kI}}};
    fixed = {0, 1};
  } else {
    free = {{0, {kOne, kI, kJ, kK}}};
    fixed = {1, 2, 3};
  }
  // Two base points differing in the free slots, to confirm the action on one
  // free slot does not depend on the others.
  const Quad bases[] = {critical_point(fam, 0.0, 1, p), critical_point(fam, 0.7, -1, p)};
  ComponentCount out;
  out.components = 1;
  for (const Free& fr : free) {
    const SlotAction a0 = slot_action(p, bases[0], fr.slot, fr.basis, fixed);
    const SlotAction a1 = slot_action(p, bases[1], fr.slot, fr.basis, fixed);
    out.linearity_defect = std::max({out.linearity_defect, a0.defect, a1.defect, (a0.matrix - a1.matrix).norm()});
    const auto n = a0.matrix.rows();
    const Eigen::VectorXd sv = (a0.matrix - Eigen::MatrixXd::Identity(n, n)).jacobiSvd().singularValues();
    int d = 0;
    for (Eigen::Index k = 0; k < n; ++k) d += sv[k] < 1e-9 ? 1 : 0;
    // unit sphere of a d-dimensional fixed subspace
    const int comps = d == 0 ? 0 : (d == 1 ? 2 : 1);
    out.components *= comps;
    out.dim += std::max(d - 1, 0);
  }
  return out;
}

namespace {

int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

// Product of overlap orientations around a closed chain of frames.
int loop_orientation(const std::vector<Eigen::MatrixXd>& frames) {
  int s = 1;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const Eigen::MatrixXd& a = frames[k];
    const Eigen::MatrixXd& b = frames[(k + 1) % frames.size()];
    if (a.cols() == 0) return 1;
    s *= sign_of((a.transpose() * b).determinant());
  }
  return s;
}

struct Sample {
  Quad x;
  Eigen::MatrixXd mprime;    // 12 x 3
  Eigen::MatrixXd negative;  // 12 x index
  CriticalClassification cls;
};

}  // namespace

FamilyReport analyze_family(Puncture p, Family fam, const AnalysisOptions& opts) {
  FamilyReport rep;
  rep.puncture = p;
  rep.family = fam;
  const int n = opts.samples;
  const std::vector<int> branches = fam == Family::S2p ? std::vector<int>{1, -1} : std::vector<int>{1};
  rep.samples = n * static_cast<int>(branches.size());
  const double value = family_value(fam);

  bool consistent = true;
  std::array<int, 2> first{-1, -1};
  double min_nonnull = std::numeric_limits<double>::infinity();
  bool mprime_orientable = true, negative_orientable = true;
  int bundle_sign = 0;
  bool bundle_consistent = true;

  for (int branch : branches) {
    std::vector<Sample> samples;
    for (int k = 0; k < n; ++k) {
      const double t = 2 * kPi * k / n;
      Sample s;
      s.x = critical_point(fam, t, branch, p);
      rep.max_constraint_residual = std::max(rep.max_constraint_residual, constraint_residual(s.x).norm());
      const FixedPointCertificate cert = certify_fixed(Involution::SigmaStar, p, s.x);
      rep.max_fixed_residual = std::max(rep.max_fixed_residual, cert.residual);
      const TangentFrame frame = tangent_frame_Mprime(p, cert);
      s.mprime = frame.matrix();
      rep.max_grad_norm = std::max(rep.max_grad_norm, grad_fprime(frame).norm());
      rep.max_value_deviation = std::max(rep.max_value_deviation, std::abs(morse_function(s.x) - value));

      s.cls = classify_in_frame(frame, opts.tol_eig, opts.hessian);
      const std::array<int, 2> c{s.cls.index, s.cls.nullity};
      rep.classifications.push_back(c);
      if (first[0] < 0) first = c;
      consistent = consistent && c == first;
      rep.max_abs_eigenvalue = std::max(rep.max_abs_eigenvalue, s.cls.eigenvalues.cwiseAbs().maxCoeff());

      // null direction against the horizontal circle tangent
      int null_k = 0;
      for (int e = 1; e < 3; ++e) {
        if (std::abs(s.cls.eigenvalues[e]) < std::abs(s.cls.eigenvalues[null_k])) null_k = e;
      }
      for (int e = 0; e < 3; ++e) {
        if (e != null_k) min_nonnull = std::min(min_nonnull, std::abs(s.cls.eigenvalues[e]));
      }
      const Vector12 tangent = s.mprime * (s.mprime.transpose() * critical_tangent(fam, t, branch, p));
      const Vector12 nullv = s.mprime * s.cls.eigenvectors.col(null_k);
      rep.min_null_alignment = std::min(rep.min_null_alignment, std::abs(nullv.dot(tangent)) / tangent.norm());

      s.negative = s.mprime * s.cls.eigenvectors.leftCols(s.cls.index);

      if (fam == Family::S2p) {
        const FixedPointCertificate rcert = certify_fixed(Involution::R, p, s.x);
        rep.max_r_fixed_residual = std::max(rep.max_r_fixed_residual, rcert.residual);
        const Matrix12 dr = involution_differential(Involution::R, p, rcert);
        const Eigen::Vector3d c_e = (s.mprime.transpose() * tangent).normalized();
        // orthonormal complement of the tangent inside the M' frame
        const Eigen::Matrix3d q3 = Eigen::Matrix3d(Eigen::HouseholderQR<Eigen::Vector3d>(c_e).householderQ());
        const Eigen::MatrixXd normal = s.mprime * q3.rightCols(2);
        const Eigen::Matrix2d a = normal.transpose() * dr * normal;
        rep.max_normal_defect = std::max(rep.max_normal_defect, (a + Eigen::Matrix2d::Identity()).norm());
        const double det = (s.mprime.transpose() * dr * s.mprime).determinant();
        rep.max_r_orientation_err = std::max(rep.max_r_orientation_err, std::abs(det - 1.0));
        if (s.cls.index == 1) {
          const Vector12 nv = s.negative.col(0);
          const int sg = sign_of(nv.dot(dr * nv));
          if (bundle_sign == 0) bundle_sign = sg;
          bundle_consistent = bundle_consistent && sg == bundle_sign;
        }
      } else {
        const Quad image = critical_point(fam, t + kPi, branch, p);
        rep.max_rotation_distance = std::max(rep.max_rotation_distance, class_distance(residual_r(s.x), image));
      }
      samples.push_back(std::move(s));
    }

    std::vector<Eigen::MatrixXd> mframes, nframes;
    for (const Sample& s : samples) {
      mframes.push_back(s.mprime);
      nframes.push_back(s.negative);
    }
    mprime_orientable = mprime_orientable && loop_orientation(mframes) == 1;
    negative_orientable = negative_orientable && loop_orientation(nframes) == 1;

    // r on the negative bundle over a rotated circle: compare dr(N_x) with
    // the frame transported from x to r(x) along the circle.
    if (fam != Family::S2p && n % 2 == 0) {
      const int half = n / 2;
      for (int k = 0; k < half; ++k) {
        const Sample& sx = samples[static_cast<std::size_t>(k)];
        const Sample& sy = samples[static_cast<std::size_t>(k + half)];
        if (sx.cls.index == 0) continue;
        int transport = 1;
        for (int m = k; m < k + half; ++m) {
          transport *= sign_of((samples[static_cast<std::size_t>(m)].negative.transpose() *
                                samples[static_cast<std::size_t>(m + 1)].negative)
                                   .determinant());
        }
        const UnitQuaternion u = align_classes(residual_r(sx.x), sy.x).g;
        const Matrix12 d = map_differential([&](const Quad& q) { return conj_by(u, residual_r(q)); }, sx.x);
        const int sg = transport * sign_of((sy.negative.transpose() * d * sx.negative).determinant());
        if (bundle_sign == 0) bundle_sign = sg;
        bundle_consistent = bundle_consistent && sg == bundle_sign;
      }
    }
  }

  if (consistent) {
    rep.index = first[0];
    rep.nullity = first[1];
  }
  rep.min_nonzero_gap = min_nonnull;
  rep.mprime_orientable = mprime_orientable;
  rep.negative_bundle_orientable = negative_orientable;

  if (fam == Family::S2p) {
    rep.r_action = rep.max_r_fixed_residual < kTolFixed ? RAction::Trivial : RAction::Unknown;
  } else {
    rep.r_action = rep.max_rotation_distance < 1e-7 ? RAction::RotationByPi : RAction::Unknown;
  }
  if (rep.index == 0) {
    rep.r_on_negative_bundle = BundleAction::NotApplicable;
  } else if (bundle_consistent && bundle_sign != 0) {
    rep.negative_bundle_sign = bundle_sign;
    rep.r_on_negative_bundle = bundle_sign > 0 ? BundleAction::Preserves : BundleAction::Reverses;
  }
  rep.components = fixed_locus_components(p, fam);
  return rep;
}

CriticalSubmanifold FamilyReport::summary() const {
  CriticalSubmanifold c;
  c.name = family;
  c.f_value = family_value(family);
  c.index = index;
  c.nullity = nullity;
  c.components = components.components;
  c.dim = components.dim;
  c.r_action = r_action;
  c.r_on_negative_bundle = r_on_negative_bundle;
  return c;
}

}  // namespace realmod
