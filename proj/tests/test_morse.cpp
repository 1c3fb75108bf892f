#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "realmod/errors.hpp"
#include "realmod/morse.hpp"

#include <cmath>
#include <numbers>

using namespace realmod;
using std::numbers::pi;

namespace {

const Quad kS1Point{kOne, -kOne, kI, kJ};
const Quad kS2Point{kJ, kI, kI, kOne};
const Quad kS3Point{kOne, kOne, kI, kJ};

FixedPointCertificate cert_of(Puncture p, const Quad& q) { return certify_fixed(Involution::SigmaStar, p, q); }

// f along the projected curve through q in direction v.
double f_along(const Quad& q, const AmbientTangent& v, double s) {
  return morse_function(project_to_variety(retract(q, Vector12(s * v.v)), {1e-14, 50, 2}));
}

}  // namespace

TEST_CASE("f values at the three critical classes") {
  CHECK(morse_function(kS1Point) == -1.0);
  CHECK(morse_function(kS2Point) == 0.0);
  CHECK(morse_function(kS3Point) == 1.0);
  CHECK(distance(sign_change(kS1Point), kS3Point) == 0.0);
  CHECK(distance(sign_change(kS3Point), kS1Point) == 0.0);
  for (Family f : kAllFamilies) CHECK(family_value(f) == static_cast<int>(f) - 1);
}

TEST_CASE("critical circle parametrizations") {
  const Quad s1 = critical_point(Family::S1p, pi / 3);
  CHECK(distance(s1, Quad{unit_complex(pi / 3), -kOne, kI, kJ}) < 1e-15);
  CHECK(constraint_residual(s1).norm() < 1e-15);
  CHECK(morse_function(s1) == -1.0);
  const Quad s2 = critical_point(Family::S2p, 0.4, 1);
  CHECK(distance(s2, Quad{kJ, kI, kI, unit_complex(0.4)}) < 1e-15);
  CHECK(morse_function(s2) == 0.0);
  CHECK(distance(critical_point(Family::S3p, 0.0), kS3Point) == 0.0);

  for (Puncture p : kAllPunctures) {
    for (Family f : kAllFamilies) {
      for (int branch : {1, -1}) {
        for (int k = 0; k < 16; ++k) {
          const Quad q = critical_point(f, 2 * pi * k / 16, branch, p);
          CHECK(constraint_residual(q).norm() < 1e-15);
          CHECK(cert_of(p, q).residual < 1e-12);
          CHECK(morse_function(q) == doctest::Approx(family_value(f)).epsilon(1e-15));
        }
      }
    }
  }
}

TEST_CASE("circle tangent matches finite differences of the parametrization") {
  for (Family f : kAllFamilies) {
    const double t = 0.9, h = 1e-5;
    const Quad q = critical_point(f, t);
    const Vector12 fd =
        (body_difference(q, critical_point(f, t + h)) - body_difference(q, critical_point(f, t - h))) / (2 * h);
    CHECK((critical_tangent(f, t) - fd).norm() < 1e-8);
  }
}

TEST_CASE("ambient gradient matches finite differences of f") {
  RandomSource rng(1);
  for (int n = 0; n < 100; ++n) {
    const Quad q = haar_quad(rng);
    const AmbientTangent g = ambient_gradient(q);
    for (int c = 0; c < 12; ++c) {
      Vector12 e = Vector12::Zero();
      e[c] = 1e-6;
      const double fd = (morse_function(retract(q, e)) - morse_function(retract(q, Vector12(-e)))) / 2e-6;
      CHECK(std::abs(g.v[c] - fd) < 1e-9);
    }
  }
}

TEST_CASE("gradient of f on M'") {
  CHECK(grad_fprime(Puncture::Left, cert_of(Puncture::Left, kS1Point)).norm() < 1e-9);
  CHECK(grad_fprime(Puncture::Left, cert_of(Puncture::Left, kS2Point)).norm() < 1e-9);

  RandomSource rng(2);
  int tested = 0;
  for (int n = 0; n < 400; ++n) {
    const FixedPointCertificate c = random_fixed_point(Puncture::Left, rng);
    const double f = morse_function(c.quad);
    if (std::abs(f) < 0.1 || std::abs(f) > 0.9) continue;
    ++tested;
    const TangentFrame frame = tangent_frame_Mprime(Puncture::Left, c);
    const AmbientTangent g = grad_fprime(frame);
    CHECK(g.norm() > 1e-4);
    // directional derivatives along the frame
    if (tested <= 40) {
      for (const auto& v : frame.vectors) {
        const double h = 1e-5;
        const double fd = (f_along(c.quad, v, h) - f_along(c.quad, v, -h)) / (2 * h);
        CHECK(std::abs(g.dot(v) - fd) < 1e-7);
      }
    }
  }
  CHECK(tested > 100);
}

TEST_CASE("Hessian signature on the critical circles") {
  for (Puncture p : kAllPunctures) {
    for (Family f : kAllFamilies) {
      for (double t : {0.0, 1.0, 2.5, 4.0}) {
        const Quad q = critical_point(f, t, 1, p);
        const CriticalClassification c = classify_critical(p, cert_of(p, q));
        CHECK(c.index == static_cast<int>(f));
        CHECK(c.nullity == 1);
        CHECK(c.positive == 2 - static_cast<int>(f));
        // curvature along each eigenvector, by an independent second difference
        for (int k = 0; k < 3; ++k) {
          AmbientTangent v;
          for (int a = 0; a < 3; ++a) v.v += c.eigenvectors(a, k) * c.frame.vectors[static_cast<std::size_t>(a)].v;
          const double h = 2e-3;
          const double f0 = morse_function(q);
          const double second = (f_along(q, v, h) - 2 * f0 + f_along(q, v, -h)) / (h * h);
          CHECK(std::abs(second - c.eigenvalues[k]) < 1e-4);
        }
      }
    }
  }
}

TEST_CASE("Hessian rejects non-critical points") {
  RandomSource rng(3);
  FixedPointCertificate c;
  do {
    c = random_fixed_point(Puncture::Left, rng);
  } while (std::abs(morse_function(c.quad)) < 0.2 || std::abs(morse_function(c.quad)) > 0.8);
  CHECK_THROWS_AS(hessian_fprime(Puncture::Left, c), NotCritical);
}

TEST_CASE("circle action") {
  RandomSource rng(4);
  double inv = 0, indep = 0;
  int n = 0;
  while (n < 1000) {
    const Quad q = random_point(rng);
    if (std::abs(morse_function(q)) > 0.99) continue;
    ++n;
    CHECK(class_distance(circle_action(0.0, q), q) < 1e-9);
    const double phi = rng.uniform(-pi, pi);
    const Quad moved = circle_action(phi, q);
    inv = std::max(inv, std::abs(morse_function(moved) - morse_function(q)));
    const UnitQuaternion g = unit_complex(rng.uniform(-pi, pi));
    indep = std::max(indep, class_distance(circle_action(phi, conj_by(g, gauge_normal_form(q))), moved));
  }
  CHECK(inv < 1e-12);
  CHECK(indep < 1e-9);
  CHECK(class_distance(circle_action(pi / 2, circle_action(pi / 2, kS2Point)), circle_action(pi, kS2Point)) < 1e-12);
  CHECK_THROWS_AS(circle_action(0.3, kS1Point), BoundaryError);
  CHECK_THROWS_AS(circle_action(0.3, kS3Point), BoundaryError);
}

TEST_CASE("gradient flow") {
  SUBCASE("stays put on the minimum circle") {
    const FlowResult r = flow(Puncture::Left, cert_of(Puncture::Left, kS1Point), FlowDirection::Down);
    CHECK(r.converged);
    CHECK(r.steps == 0);
    const FlowResult u = flow(Puncture::Left, cert_of(Puncture::Left, kS1Point), FlowDirection::Up);
    CHECK(u.converged);
    CHECK(u.steps == 0);
  }
  SUBCASE("down from a perturbed saddle reaches the minimum") {
    RandomSource rng(5);
    for (int n = 0; n < 10; ++n) {
      const FixedPointCertificate c0 = cert_of(Puncture::Left, kS2Point);
      const TangentFrame frame = tangent_frame_Mprime(Puncture::Left, c0);
      Vector12 v = Vector12::Zero();
      for (const auto& e : frame.vectors) v += 1e-3 * rng.gaussian() * e.v;
      const FixedPointCertificate start = symmetrize(Puncture::Left, project_to_variety(retract(kS2Point, v)));
      const FlowResult r = flow(Puncture::Left, start, FlowDirection::Down);
      CHECK(r.converged);
      CHECK(r.f_limit == doctest::Approx(-1.0).epsilon(1e-9));
    }
  }
  SUBCASE("generic starts go up to the maximum") {
    RandomSource rng(6);
    for (int n = 0; n < 20; ++n) {
      const FlowResult r = flow(Puncture::Left, random_fixed_point(Puncture::Left, rng), FlowDirection::Up);
      CHECK(r.converged);
      const bool at_critical = std::abs(r.f_limit - 1.0) < 1e-6 || std::abs(r.f_limit) < 1e-6;
      CHECK(at_critical);
    }
  }
}

TEST_CASE("family matching") {
  for (Puncture p : kAllPunctures) {
    for (Family f : kAllFamilies) {
      for (int branch : {1, -1}) {
        if (f != Family::S2p && branch < 0) continue;
        for (double t : {0.2, 1.7, 3.3, 5.9}) {
          const Quad q = conj_by(exp_su2({0.3, -1.2, 0.5}), critical_point(f, t, branch, p));
          const FamilyMatch m = match_family(p, q);
          CHECK(m.matched);
          CHECK(m.family == f);
          CHECK(m.class_distance < 1e-8);
        }
      }
    }
    RandomSource rng(7);
    CHECK_FALSE(match_family(p, random_fixed_point(p, rng).quad).matched);
  }
}

TEST_CASE("census is clean and deterministic") {
  for (Puncture p : kAllPunctures) {
    CensusOptions one;
    one.threads = 1;
    CensusOptions four;
    four.threads = 4;
    const CensusReport a = critical_census(p, 40, 99, one);
    const CensusReport b = critical_census(p, 40, 99, four);
    CHECK(a.clean());
    CHECK(a.max_value_deviation < 1e-6);
    CHECK(a.family_counts == b.family_counts);
    CHECK(a.histogram == b.histogram);
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
      CHECK(a.samples[k].down.flow.f_limit == b.samples[k].down.flow.f_limit);
      CHECK(a.samples[k].up.flow.steps == b.samples[k].up.flow.steps);
    }
  }
  const CensusReport single = critical_census(Puncture::Left, 1, 3);
  CHECK(single.samples.size() == 1);
  CHECK(single.clean());
}

TEST_CASE("S2 torus") {
  for (double a : {0.0, 1.0, -2.0})
    for (double b : {0.5, 3.0}) {
      const Quad q = s2_torus_point(a, b);
      CHECK(constraint_residual(q).norm() < 1e-15);
      CHECK(s2_torus_distance(conj_by(exp_su2({1.0, 0.2, -0.4}), q)) < 1e-12);
    }
  CHECK(s2_torus_distance(kS1Point) > 0.1);
  CHECK(s2_torus_distance(kS3Point) > 0.1);
}

TEST_CASE("fixed-locus components") {
  for (Puncture p : kAllPunctures) {
    const ComponentCount s1 = fixed_locus_components(p, Family::S1p);
    const ComponentCount s2 = fixed_locus_components(p, Family::S2p);
    const ComponentCount s3 = fixed_locus_components(p, Family::S3p);
    CHECK(s1.components == 1);
    CHECK(s2.components == 2);
    CHECK(s3.components == 1);
    CHECK(s1.dim == 1);
    CHECK(s2.dim == 1);
    CHECK(s3.dim == 1);
    CHECK(s2.linearity_defect < 1e-12);
  }
}

TEST_CASE("family analysis") {
  for (Puncture p : kAllPunctures) {
    AnalysisOptions opts;
    opts.samples = 8;
    const FamilyReport s1 = analyze_family(p, Family::S1p, opts);
    const FamilyReport s2 = analyze_family(p, Family::S2p, opts);
    const FamilyReport s3 = analyze_family(p, Family::S3p, opts);
    CHECK(s1.index == 0);
    CHECK(s2.index == 1);
    CHECK(s3.index == 2);
    CHECK(s1.r_action == RAction::RotationByPi);
    CHECK(s2.r_action == RAction::Trivial);
    CHECK(s3.r_action == RAction::RotationByPi);
    CHECK(s1.max_rotation_distance < 1e-7);
    CHECK(s2.max_normal_defect < 1e-4);
    CHECK(s2.r_on_negative_bundle == BundleAction::Reverses);
    CHECK(s3.r_on_negative_bundle == BundleAction::Preserves);
    CHECK(s1.min_null_alignment > 0.999);
    const CriticalSubmanifold sum = s2.summary();
    CHECK(sum.components == 2);
    CHECK(sum.f_value == 0.0);
  }
}
