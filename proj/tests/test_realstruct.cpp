#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle.hpp"
#include "realmod/errors.hpp"
#include "realmod/realstruct.hpp"

#include <cmath>
#include <numbers>
#include <variant>

using namespace realmod;
using std::numbers::pi;

namespace {

const Quad kS1Point{kOne, -kOne, kI, kJ};
const Quad kS2Point{kJ, kI, kI, kOne};
const Quad kS3Point{kOne, kOne, kI, kJ};

double up_to_sign(const UnitQuaternion& a, const UnitQuaternion& b) { return std::min(distance(a, b), distance(a, -b)); }

// sigma* written out on 2x2 matrices.
Quad sigma_oracle(Puncture p, const Quad& q) {
  using oracle::inv;
  using oracle::to_mat;
  const oracle::Mat2 A1 = to_mat(q[0]), B1 = to_mat(q[1]), A2 = to_mat(q[2]), B2 = to_mat(q[3]);
  const double s1 = p == Puncture::Right ? -1.0 : 1.0;
  const double s2 = p == Puncture::Left ? -1.0 : 1.0;
  auto back = [](const oracle::Mat2& m) { return UnitQuaternion::normalized(oracle::from_mat(m)); };
  return {back(s1 * B1 * A1 * inv(B1)), back(inv(B1)), back(s2 * B2 * A2 * inv(B2)), back(inv(B2))};
}

}  // namespace

TEST_CASE("puncture names") {
  for (Puncture p : kAllPunctures) CHECK(parse_puncture(to_string(p)) == p);
  CHECK_THROWS_AS(parse_puncture("top"), ConfigError);
}

TEST_CASE("sigma* examples") {
  const Quad s = sigma_star(Puncture::Left, kS3Point);
  CHECK(distance(s, Quad{kOne, kOne, kI, -kJ}) < 1e-15);
  CHECK(distance(conj_by(kI, s), kS3Point) < 1e-15);

  const UnitQuaternion z = unit_complex(0.8), w = unit_complex(-1.3);
  const Quad img = sigma_star(Puncture::Left, Quad{kJ, kI, z, w});
  const Quad expected{kJ, kI, -z.inverse(), w};
  CHECK(class_distance(img, expected) < 1e-12);
}

TEST_CASE("sigma* matches the matrix formulas") {
  RandomSource rng(1);
  for (Puncture p : kAllPunctures) {
    double worst = 0;
    for (int n = 0; n < 1000; ++n) {
      const Quad q = haar_quad(rng);
      worst = std::max(worst, distance(sigma_star(p, q), sigma_oracle(p, q)));
    }
    CHECK(worst < 1e-14);
  }
}

TEST_CASE("sigma* preserves the variety and squares to the identity") {
  RandomSource rng(2);
  for (Puncture p : kAllPunctures) {
    double on = 0, inv = 0;
    for (int n = 0; n < 1000; ++n) {
      const Quad q = random_point(rng);
      on = std::max(on, constraint_residual(sigma_star(p, q)).norm());
      inv = std::max(inv, class_distance(sigma_star(p, sigma_star(p, q)), q));
    }
    CHECK(on < 1e-10);
    CHECK(inv < 1e-12);
  }
}

TEST_CASE("sigma* on generators") {
  const Word a1 = Word::generator(Gen::A1), b1 = Word::generator(Gen::B1), b2 = Word::generator(Gen::B2);
  CHECK(sigma_star_pi1(Puncture::Left, Gen::A1) == a1);
  CHECK(sigma_star_pi1(Puncture::Left, Gen::B1) == b1.inverse());
  CHECK(sigma_star_pi1(Puncture::Left, Gen::B2) == b1.inverse() * b2.inverse() * b1);
  CHECK_THROWS_AS(sigma_star_pi1(Puncture::Middle, Gen::A1), UnsupportedCase);
}

TEST_CASE("word and quadruple formulas agree") {
  CHECK(check_pi1_consistency(kS1Point) < 1e-9);
  RandomSource rng(3);
  double worst = 0;
  for (int n = 0; n < 100; ++n) worst = std::max(worst, check_pi1_consistency(random_point(rng)));
  CHECK(worst < 1e-8);
}

TEST_CASE("residual involution") {
  const UnitQuaternion w = unit_complex(0.6);
  const Quad q{kJ, kI, kI, w};
  const Quad rq = residual_r(q);
  CHECK(distance(rq, Quad{-kJ, kI, kI, w}) == 0.0);
  CHECK(distance(conj_by(kI, rq), q) < 1e-15);
  CHECK(class_distance(residual_r(kS3Point), kS3Point) > 0.1);

  RandomSource rng(4);
  for (int n = 0; n < 1000; ++n) {
    const Quad x = haar_quad(rng);
    CHECK(distance(residual_r(residual_r(x)), x) == 0.0);
  }
}

TEST_CASE("handle swap carries the left real structure to the right one") {
  RandomSource rng(11);
  double worst = 0, on = 0;
  for (int n = 0; n < 1000; ++n) {
    const Quad q = haar_quad(rng);
    const Quad lhs = sigma_oracle(Puncture::Right, handle_swap(q));
    const Quad rhs = handle_swap(sigma_oracle(Puncture::Left, q));
    worst = std::max(worst, distance(lhs, rhs));
    CHECK(distance(handle_swap(handle_swap(q)), q) == 0.0);
  }
  for (int n = 0; n < 100; ++n) on = std::max(on, constraint_residual(handle_swap(random_point(rng))).norm());
  CHECK(worst < 1e-14);
  CHECK(on < 1e-10);
}

TEST_CASE("fixed-point certificates") {
  for (double phi : {0.0, 0.9, 2.0, -2.7}) {
    const Quad q{unit_complex(phi), -kOne, kI, kJ};
    const FixCheck c = is_class_fixed(Involution::SigmaStar, Puncture::Left, q);
    REQUIRE(std::holds_alternative<FixedPointCertificate>(c));
    const auto& cert = std::get<FixedPointCertificate>(c);
    CHECK(cert.valid());
    CHECK(up_to_sign(cert.conjugator, kI) < 1e-12);
  }
  const FixCheck r2 = is_class_fixed(Involution::R, Puncture::Left, Quad{kJ, kI, kI, unit_complex(1.1)});
  REQUIRE(std::holds_alternative<FixedPointCertificate>(r2));
  CHECK(std::get<FixedPointCertificate>(r2).valid());
  CHECK(std::holds_alternative<NotFixed>(is_class_fixed(Involution::R, Puncture::Left, kS3Point)));
}

TEST_CASE("symmetrize") {
  SUBCASE("point already in M'") {
    const FixedPointCertificate c = symmetrize(Puncture::Left, kS2Point);
    CHECK(c.valid());
    CHECK(distance(c.quad, kS2Point) < 1e-14);
  }
  SUBCASE("basin around (j, i, i, 1)") {
    RandomSource rng(5);
    for (int n = 0; n < 20; ++n) {
      Vector12 v;
      for (int k = 0; k < 12; ++k) v[k] = 1e-2 * rng.gaussian();
      const Quad q0 = project_to_variety(retract(kS2Point, v));
      const FixedPointCertificate c = symmetrize(Puncture::Left, q0);
      CHECK(c.residual < 1e-8);
      CHECK(constraint_residual(c.quad).norm() < 1e-10);
    }
  }
  SUBCASE("start far from the fixed locus") {
    RandomSource rng(6);
    int tried = 0;
    for (int n = 0; n < 5000 && tried < 5; ++n) {
      const Quad q = random_point(rng);
      if (fingerprint(q).gap(fingerprint(sigma_star(Puncture::Left, q))) < 1.5) continue;
      ++tried;
      CHECK_THROWS_AS(symmetrize(Puncture::Left, q), NoConvergence);
    }
    CHECK(tried == 5);
  }
}

TEST_CASE("random fixed points") {
  for (Puncture p : kAllPunctures) {
    RandomSource rng(7);
    for (int n = 0; n < 100; ++n) {
      const FixedPointCertificate c = random_fixed_point(p, rng);
      CHECK(c.valid());
      CHECK(constraint_residual(c.quad).norm() < 1e-10);
      CHECK(class_distance(sigma_star(p, c.quad), c.quad) < 1e-8);
    }
  }
}

TEST_CASE("involution differential") {
  SUBCASE("squares to the identity at (1, -1, i, j)") {
    const FixedPointCertificate cert = certify_fixed(Involution::SigmaStar, Puncture::Left, kS1Point);
    const TangentFrame fm = tangent_frame_M(kS1Point);
    const Eigen::MatrixXd tau = involution_in_frame(Involution::SigmaStar, Puncture::Left, cert, fm);
    CHECK((tau * tau - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-4);
  }
  SUBCASE("eigenvalues +-1 with multiplicity 3 each") {
    for (Puncture p : kAllPunctures) {
      RandomSource rng(8);
      for (int n = 0; n < 20; ++n) {
        const FixedPointCertificate cert = random_fixed_point(p, rng);
        const Eigen::MatrixXd tau = involution_in_frame(Involution::SigmaStar, p, cert, tangent_frame_M(cert.quad));
        Eigen::EigenSolver<Eigen::MatrixXd> es(tau);
        int plus = 0, minus = 0;
        for (int k = 0; k < 6; ++k) {
          const std::complex<double> l = es.eigenvalues()[k];
          CHECK(std::abs(l.imag()) < 1e-4);
          plus += std::abs(l - 1.0) < 1e-4 ? 1 : 0;
          minus += std::abs(l + 1.0) < 1e-4 ? 1 : 0;
        }
        CHECK(plus == 3);
        CHECK(minus == 3);
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(6, 6);
        Eigen::FullPivLU<Eigen::MatrixXd> lu_plus(tau - id), lu_minus(tau + id);
        lu_plus.setThreshold(1e-4);
        lu_minus.setThreshold(1e-4);
        CHECK(lu_plus.rank() == 3);
        CHECK(lu_minus.rank() == 3);
      }
    }
  }
  SUBCASE("fixes the tangent of the minimum circle") {
    const double t = 0.7, h = 1e-6;
    const Quad q{unit_complex(t), -kOne, kI, kJ};
    const Vector12 dir = (body_difference(q, Quad{unit_complex(t + h), -kOne, kI, kJ}) -
                          body_difference(q, Quad{unit_complex(t - h), -kOne, kI, kJ})) /
                         (2 * h);
    const FixedPointCertificate cert = certify_fixed(Involution::SigmaStar, Puncture::Left, q);
    const TangentFrame fm = tangent_frame_M(q);
    const Eigen::VectorXd coords = fm.matrix().transpose() * dir;
    const Eigen::MatrixXd tau = involution_in_frame(Involution::SigmaStar, Puncture::Left, cert, fm);
    CHECK((tau * coords - coords).norm() < 1e-5 * coords.norm());
  }
}

TEST_CASE("tangent frame of M'") {
  const auto frame_at = [](Puncture p, const Quad& q) {
    return tangent_frame_Mprime(p, certify_fixed(Involution::SigmaStar, p, q)).size();
  };
  CHECK(frame_at(Puncture::Left, kS1Point) == 3);
  CHECK(frame_at(Puncture::Left, kS2Point) == 3);
  for (Puncture p : kAllPunctures) {
    RandomSource rng(9);
    for (int n = 0; n < 50; ++n) CHECK(tangent_frame_Mprime(p, random_fixed_point(p, rng)).size() == 3);
  }
}

TEST_CASE("fixed points of r lie on (j, i, e^{ia}, e^{ib})") {
  RandomSource rng(10);
  for (int n = 0; n < 50; ++n) {
    const Quad q = random_point(rng);
    const FixedPointCertificate c = search_fixed_point(Involution::R, Puncture::Left, q, rng);
    CHECK(c.valid());
    // A1 and B1 anticommute: both pure, orthogonal
    const UnitQuaternion a = c.quad.a1(), b = c.quad.b1();
    CHECK(std::abs(a.w) < 1e-8);
    CHECK(std::abs(b.w) < 1e-8);
    CHECK(std::abs(a.imag().dot(b.imag())) < 1e-8);
  }
}
