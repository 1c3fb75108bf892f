#include "realmod/spectral.hpp"

#include "realmod/errors.hpp"
#include "realmod/parallel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace realmod {

int E1Page::total_rank() const {
  int t = 0;
  for (const auto& col : ranks)
    for (int r : col) t += r;
  return t;
}

E1Page build_e1(const std::vector<CriticalSubmanifold>& crits) {
  E1Page page;
  int last_index = -1;
  for (const CriticalSubmanifold& c : crits) {
    if (c.dim != 1 || c.components < 1) {
      throw UnsupportedTopology("build_e1: " + std::string(to_string(c.name)) + " has dimension " +
                                std::to_string(c.dim) + " and " + std::to_string(c.components) +
                                " components; only unions of circles are supported");
    }
    if (c.index < 0 || c.index > 2) {
      throw UnsupportedTopology("build_e1: index " + std::to_string(c.index) + " outside 0..2");
    }
    if (c.index < last_index) throw UnsupportedTopology("build_e1: pieces not sorted by index");
    last_index = c.index;
    // H^0 and H^1 of a union of circles both have rank = components.
    for (auto& r : page.ranks[static_cast<std::size_t>(c.index)]) r += c.components;
  }
  return page;
}

std::string_view to_string(DifferentialId d) {
  switch (d) {
    case DifferentialId::D1_00_10:
      return "d1_00_to_10";
    case DifferentialId::D1_01_11:
      return "d1_01_to_11";
    case DifferentialId::D1_10_20:
      return "d1_10_to_20";
    case DifferentialId::D1_11_21:
      return "d1_11_to_21";
    case DifferentialId::D2_01_20:
      return "d2_01_to_20";
  }
  return "?";
}

void DifferentialCertificate::recompute() {
  vanishes = !premises.empty();
  for (const Premise& p : premises) vanishes = vanishes && p.verified;
}

const Premise* DifferentialCertificate::first_failure() const {
  for (const Premise& p : premises)
    if (!p.verified) return &p;
  return nullptr;
}

RActionEvidence gather_evidence(const FamilyReport& s1, const FamilyReport& s2, const FamilyReport& s3) {
  RActionEvidence ev;
  ev.s1_rotation_distance = s1.max_rotation_distance;
  ev.s3_rotation_distance = s3.max_rotation_distance;
  ev.s2_fixed_residual = s2.max_r_fixed_residual;
  ev.s2_normal_defect = s2.max_normal_defect;
  ev.s2_negative_sign = static_cast<int>(s2.negative_bundle_sign);
  ev.s3_negative_sign = static_cast<int>(s3.negative_bundle_sign);
  ev.s2_negative_orientable = s2.negative_bundle_orientable;
  ev.s3_negative_orientable = s3.negative_bundle_orientable;
  ev.mprime_orientable = s1.mprime_orientable && s2.mprime_orientable && s3.mprime_orientable;
  ev.s1_index = s1.index;
  ev.s2_index = s2.index;
  ev.s3_index = s3.index;
  ev.s1_components = s1.components.components;
  ev.s2_components = s2.components.components;
  ev.s3_components = s3.components.components;
  ev.s1_fixed_residual = s1.max_fixed_residual;
  return ev;
}

namespace {

constexpr double kRotationTol = 1e-7;
constexpr double kNormalTol = 1e-4;

Premise premise(std::string name, bool ok, double evidence, std::string detail) {
  return {std::move(name), ok, evidence, std::move(detail)};
}

DifferentialCertificate finish(DifferentialCertificate c) {
  c.recompute();
  return c;
}

// Sign of r* on the Thom class of the S2' negative line: -1 when dr = -I on the normal bundle.
int s2_thom_sign(const RActionEvidence& ev) {
  if (ev.s2_normal_defect < kNormalTol && ev.s2_negative_sign < 0) return -1;
  return ev.s2_negative_sign > 0 ? 1 : 0;
}

}  // namespace

std::vector<DifferentialCertificate> assess_d1(const E1Page& page, const RActionEvidence& ev) {
  std::vector<DifferentialCertificate> out;

  const bool s1_circle = ev.s1_components == 1 && page.rank(0, 0) == 1;
  const bool s3_circle = ev.s3_components == 1 && page.rank(2, 0) == 1;
  const bool r_trivial_s2 = ev.s2_fixed_residual < kTolFixed;
  const int thom2 = s2_thom_sign(ev);
  const Premise reverses =
      premise("r_reverses_s2_negative_bundle", thom2 == -1, ev.s2_normal_defect,
              "||dr|normal + I|| = " + std::to_string(ev.s2_normal_defect) +
                  ", sign on negative line = " + std::to_string(ev.s2_negative_sign));
  const Premise s2_orientable = premise("s2_negative_bundle_orientable", ev.s2_negative_orientable,
                                        ev.s2_negative_orientable ? 1.0 : 0.0, "transport around both circles");

  {
    DifferentialCertificate c;
    c.target = DifferentialId::D1_00_10;
    c.premises.push_back(premise("mprime_nonempty", ev.s1_fixed_residual < kTolFixed, ev.s1_fixed_residual,
                                 "fixed-point residual along S1'"));
    c.premises.push_back(premise("s1_is_minimum", ev.s1_index == 0, ev.s1_index, "index of S1'"));
    c.premises.push_back(premise("s1_connected", s1_circle, ev.s1_components,
                                 "unit of H^0(M') restricts to a generator of E^{0,0}"));
    out.push_back(finish(c));
  }
  {
    DifferentialCertificate c;
    c.target = DifferentialId::D1_01_11;
    const int r_src = ev.s1_rotation_distance < kRotationTol ? 1 : 0;  // rotation by pi has degree 1
    const int thom1 = ev.s1_index == 0 ? 1 : 0;
    const int r_tgt = r_trivial_s2 ? 1 : 0;
    c.twist_sign = r_src * thom1 * thom2 * r_tgt;
    c.premises.push_back(premise("r_rotates_s1", r_src == 1, ev.s1_rotation_distance,
                                 "class_distance(r x(t), x(t + pi)); r* = +1 on H^1(S1')"));
    c.premises.push_back(premise("s1_index_zero", thom1 == 1, ev.s1_index, "trivial Thom class"));
    c.premises.push_back(reverses);
    c.premises.push_back(premise("r_trivial_on_s2", r_tgt == 1, ev.s2_fixed_residual, "r* = +1 on H^1(S2')"));
    c.premises.push_back(s2_orientable);
    c.premises.push_back(premise("anticommutes_with_r", c.twist_sign == -1, c.twist_sign,
                                 "d = -d on a torsion-free group"));
    out.push_back(finish(c));
  }
  {
    DifferentialCertificate c;
    c.target = DifferentialId::D1_10_20;
    const int r_src = r_trivial_s2 ? 1 : 0;
    const int thom3 = ev.s3_negative_sign;
    const int r_tgt = s3_circle ? 1 : 0;
    c.twist_sign = r_src * thom2 * thom3 * r_tgt;
    c.premises.push_back(premise("r_trivial_on_s2", r_src == 1, ev.s2_fixed_residual, "r* = +1 on H^0(S2')"));
    c.premises.push_back(reverses);
    c.premises.push_back(premise("r_preserves_s3_negative_bundle", thom3 == 1, thom3,
                                 "det of dr against the transported negative frame"));
    c.premises.push_back(premise("s3_connected", r_tgt == 1, ev.s3_components, "r* = +1 on H^0(S3')"));
    c.premises.push_back(s2_orientable);
    c.premises.push_back(premise("s3_negative_bundle_orientable", ev.s3_negative_orientable,
                                 ev.s3_negative_orientable ? 1.0 : 0.0, "transport around the circle"));
    c.premises.push_back(premise("anticommutes_with_r", c.twist_sign == -1, c.twist_sign,
                                 "d = -d on a torsion-free group"));
    out.push_back(finish(c));
  }
  {
    DifferentialCertificate c;
    c.target = DifferentialId::D1_11_21;
    c.premises.push_back(premise("s3_is_maximum", ev.s3_index == 2, ev.s3_index, "E^{2,1} sits in degree 3"));
    c.premises.push_back(premise("s3_connected", s3_circle, ev.s3_components, "E^{2,1} has rank 1"));
    c.premises.push_back(premise("s3_negative_bundle_orientable", ev.s3_negative_orientable,
                                 ev.s3_negative_orientable ? 1.0 : 0.0, "transport around the circle"));
    c.premises.push_back(premise("mprime_orientable", ev.mprime_orientable, ev.mprime_orientable ? 1.0 : 0.0,
                                 "frame transport around every critical circle; H^3(M') = Z"));
    out.push_back(finish(c));
  }
  return out;
}

std::vector<DifferentialCertificate> certify_d1(const E1Page& page, const RActionEvidence& ev) {
  auto certs = assess_d1(page, ev);
  for (const auto& c : certs) {
    if (const Premise* f = c.first_failure()) {
      throw PremiseFailure(std::string(to_string(c.target)) + ": premise '" + f->name + "' not verified (" +
                           f->detail + ")");
    }
  }
  return certs;
}

// ---------------------------------------------------------------------------
// R'

bool RPrimeReport::valid() const {
  return supported && max_constraint_residual < 1e-12 && max_fixed_residual < kTolFixed &&
         intersection_count() == 1 && transversality_min_sv > 0.1;
}

namespace {

struct SphereChart {
  UnitQuaternion reversed;  // B1 has no component along this axis
  UnitQuaternion u, v;
};

bool sphere_chart(Puncture p, SphereChart& chart) {
  switch (p) {
    case Puncture::Left:
      chart = {kI, kJ, kK};
      return true;
    case Puncture::Middle:
      chart = {kK, kI, kJ};
      return true;
    case Puncture::Right:
      return false;
  }
  return false;
}

Quad rprime_point(const SphereChart& c, double theta, double psi) {
  const double s = std::sin(theta);
  const UnitQuaternion b1 = UnitQuaternion::normalized(std::cos(theta), s * (std::cos(psi) * c.u.x + std::sin(psi) * c.v.x),
                                                       s * (std::cos(psi) * c.u.y + std::sin(psi) * c.v.y),
                                                       s * (std::cos(psi) * c.u.z + std::sin(psi) * c.v.z));
  return {kOne, b1, kI, kJ};
}

// Smallest singular value of the two sphere directions plus the S1' tangent, in M' coordinates.
double transversality(Puncture p, const SphereChart& chart, const Quad& x, const FamilyMatch& match) {
  const TangentFrame frame = tangent_frame_Mprime(p, certify_fixed(Involution::SigmaStar, p, x));
  const Eigen::MatrixXd e = frame.matrix();

  // Body velocities v of B1 keeping B1 v free of the reversed axis.
  const Eigen::Vector4d axis = chart.reversed.vec();
  const Eigen::Matrix4d lb = left_mul_matrix(x.b1());
  const Eigen::RowVector3d ell = axis.transpose() * lb.rightCols<3>();
  Eigen::JacobiSVD<Eigen::Matrix<double, 1, 3>> svd(ell, Eigen::ComputeFullV);

  Eigen::Matrix3d m;
  for (int c = 0; c < 2; ++c) {
    Vector12 d = Vector12::Zero();
    d.segment<3>(3) = svd.matrixV().col(1 + c);
    m.col(c) = e.transpose() * d;
  }
  // S1' tangent, carried from the fitted representative y = g x g^-1 back to x.
  const Quad y = critical_point(Family::S1p, match.parameter, 1, p);
  const UnitQuaternion g = align_classes(x, y).g;
  const Vector12 ty = critical_tangent(Family::S1p, match.parameter, 1, p);
  Vector12 tx;
  for (int s = 0; s < 4; ++s) tx.segment<3>(3 * s) = adjoint(g.inverse(), Su2Vector(Eigen::Vector3d(ty.segment<3>(3 * s)))).vec();
  m.col(2) = e.transpose() * tx.normalized();
  return m.jacobiSvd().singularValues().minCoeff();
}

}  // namespace

RPrimeReport verify_rprime(Puncture p, int grid_n, int threads) {
  RPrimeReport rep;
  rep.puncture = p;
  rep.grid_n = grid_n;
  SphereChart chart;
  if (!sphere_chart(p, chart) || grid_n < 2) return rep;
  rep.supported = true;

  struct Row {
    int points = 0;
    double residual = 0.0, fixed = 0.0;
    std::vector<std::pair<RPrimeIntersection, Quad>> hits;
  };
  std::vector<Row> rows(static_cast<std::size_t>(grid_n));
  const Quad reference{kOne, -kOne, kI, kJ};

  parallel_for(grid_n, threads, [&](int a) {
    Row& row = rows[static_cast<std::size_t>(a)];
    const double theta = std::numbers::pi * a / (grid_n - 1);
    const bool pole = a == 0 || a == grid_n - 1;
    for (int b = 0; b < (pole ? 1 : grid_n); ++b) {
      const double psi = 2 * std::numbers::pi * b / grid_n;
      const Quad x = rprime_point(chart, theta, psi);
      ++row.points;
      row.residual = std::max(row.residual, constraint_residual(x).norm());
      row.fixed = std::max(row.fixed, certify_fixed(Involution::SigmaStar, p, x).residual);
      if (std::abs(morse_function(x) + 1.0) > 1e-9) continue;
      const FamilyMatch m = fit_family(p, Family::S1p, 1, x);
      if (m.class_distance < 1e-8) {
        row.hits.push_back({{theta, psi, m.parameter, m.class_distance, class_distance(x, reference)}, x});
      }
    }
  });

  std::vector<Quad> found;
  for (const Row& row : rows) {
    rep.points += row.points;
    rep.max_constraint_residual = std::max(rep.max_constraint_residual, row.residual);
    rep.max_fixed_residual = std::max(rep.max_fixed_residual, row.fixed);
    for (const auto& [hit, x] : row.hits) {
      bool duplicate = false;
      for (const Quad& y : found) duplicate = duplicate || class_distance(x, y) < 1e-6;
      if (duplicate) continue;
      found.push_back(x);
      rep.intersections.push_back(hit);
    }
  }
  rep.transversality_min_sv = found.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < found.size(); ++k) {
    FamilyMatch m;
    m.parameter = rep.intersections[k].s1_parameter;
    rep.transversality_min_sv = std::min(rep.transversality_min_sv, transversality(p, chart, found[k], m));
  }
  return rep;
}

DifferentialCertificate assess_d2(const E1Page& page, const RPrimeReport& r) {
  DifferentialCertificate c;
  c.target = DifferentialId::D2_01_20;
  c.premises.push_back(premise("sphere_chart_available", r.supported, r.supported ? 1.0 : 0.0,
                               "puncture " + std::string(to_string(r.puncture))));
  c.premises.push_back(premise("rprime_on_variety", r.supported && r.max_constraint_residual < 1e-12,
                               r.max_constraint_residual, "max constraint residual over the grid"));
  c.premises.push_back(premise("rprime_fixed", r.supported && r.max_fixed_residual < kTolFixed,
                               r.max_fixed_residual, "max fixed-point residual over the grid"));
  c.premises.push_back(premise("single_intersection", r.intersection_count() == 1, r.intersection_count(),
                               "distinct classes of R' on S1'"));
  c.premises.push_back(premise("transverse", r.transversality_min_sv > 0.1, r.transversality_min_sv,
                               "min singular value of the assembled tangent directions"));
  c.premises.push_back(premise("s1_single_circle", page.rank(0, 1) == 1, page.rank(0, 1),
                               "dual of R' restricts to a generator of H^1(S1')"));
  c.recompute();
  return c;
}

DifferentialCertificate certify_d2(const E1Page& page, const RPrimeReport& rprime) {
  DifferentialCertificate c = assess_d2(page, rprime);
  if (const Premise* f = c.first_failure()) {
    throw PremiseFailure(std::string(to_string(c.target)) + ": premise '" + f->name + "' not verified (" + f->detail +
                         ")");
  }
  return c;
}

BettiVector betti(const E1Page& page, const std::vector<DifferentialCertificate>& certs) {
  std::string missing;
  for (DifferentialId d : kAllDifferentials) {
    bool ok = false;
    for (const auto& c : certs) ok = ok || (c.target == d && c.vanishes);
    if (!ok) missing += (missing.empty() ? "" : ", ") + std::string(to_string(d));
  }
  if (!missing.empty()) throw IncompleteCertification("betti: no vanishing certificate for " + missing);
  std::array<int, 4> b{};
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q < 2; ++q) b[static_cast<std::size_t>(p + q)] += page.rank(p, q);
  return {b[0], b[1], b[2], b[3]};
}

bool compare_torus(const BettiVector& b) { return b == BettiVector{1, 3, 3, 1}; }

bool HandleSwapReport::valid() const {
  return samples > 0 && max_intertwining_defect < 1e-14 && max_constraint_defect < 1e-12 &&
         max_fixed_residual < kTolFixed;
}

HandleSwapReport verify_handle_swap(int samples, std::uint64_t seed) {
  HandleSwapReport r;
  r.samples = samples;
  RandomSource rng(seed);
  for (int n = 0; n < samples; ++n) {
    const Quad q = haar_quad(rng);
    r.max_intertwining_defect =
        std::max(r.max_intertwining_defect,
                 distance(sigma_star(Puncture::Right, handle_swap(q)), handle_swap(sigma_star(Puncture::Left, q))));
    const Quad v = random_point(rng);
    r.max_constraint_defect = std::max(
        r.max_constraint_defect, std::abs(constraint_residual(handle_swap(v)).norm() - constraint_residual(v).norm()));
    const FixedPointCertificate c = random_fixed_point(Puncture::Left, rng);
    r.max_fixed_residual = std::max(
        r.max_fixed_residual, certify_fixed(Involution::SigmaStar, Puncture::Right, handle_swap(c.quad)).residual);
  }
  return r;
}

std::vector<DifferentialCertificate> transport_to_right(std::vector<DifferentialCertificate> left,
                                                        const HandleSwapReport& swap) {
  for (auto& c : left) {
    c.premises.push_back(premise("handle_swap_diffeomorphism", swap.valid(), swap.max_intertwining_defect,
                                 "certified for the left puncture, carried over by (A2, B2, A1, B1)"));
    c.recompute();
  }
  return left;
}

}  // namespace realmod
