#pragma once

#include "realmod/quat.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace realmod {

/// Generators of the free group pi_1 of the punctured genus-2 surface.
enum class Gen : int { A1 = 0, B1 = 1, A2 = 2, B2 = 3 };

/// A point (A1, B1, A2, B2) of SU(2)^4.
struct Quad {
  std::array<UnitQuaternion, 4> x{};

  Quad() = default;
  Quad(const UnitQuaternion& a1, const UnitQuaternion& b1, const UnitQuaternion& a2, const UnitQuaternion& b2)
      : x{a1, b1, a2, b2} {}

  const UnitQuaternion& a1() const { return x[0]; }
  const UnitQuaternion& b1() const { return x[1]; }
  const UnitQuaternion& a2() const { return x[2]; }
  const UnitQuaternion& b2() const { return x[3]; }
  const UnitQuaternion& operator[](Gen g) const { return x[static_cast<int>(g)]; }
  const UnitQuaternion& operator[](int i) const { return x[i]; }
  UnitQuaternion& operator[](int i) { return x[i]; }
};

/// Componentwise g q g^-1.
Quad conj_by(const UnitQuaternion& g, const Quad& q);

/// Euclidean distance in R^16.
double distance(const Quad& p, const Quad& q);

struct Letter {
  Gen gen;
  int exponent;  // +1 or -1

  bool operator==(const Letter&) const = default;
};

/// Freely reduced word in a1, b1, a2, b2 times an optional central sign.
class Word {
 public:
  Word() = default;
  Word(std::vector<Letter> letters, int sign = 1);

  static Word generator(Gen g, int exponent = 1) { return Word({{g, exponent}}); }
  /// x y x^-1 y^-1.
  static Word commutator(const Word& x, const Word& y);
  /// The boundary curve c = [a1,b1][a2,b2].
  static Word boundary();

  const std::vector<Letter>& letters() const { return letters_; }
  int sign() const { return sign_; }
  Word inverse() const;

  friend Word operator*(const Word& u, const Word& v);
  bool operator==(const Word&) const = default;

 private:
  void reduce();
  std::vector<Letter> letters_;
  int sign_ = 1;
};

UnitQuaternion evaluate_word(const Word& w, const Quad& q);

using Vector12 = Eigen::Matrix<double, 12, 1>;
using Matrix3x12 = Eigen::Matrix<double, 3, 12>;

/// Tangent vector of SU(2)^4 in body coordinates: factor s moves as
/// X_s exp(t v_s). The bi-invariant metric is the Euclidean product on the
/// twelve coordinates.
struct AmbientTangent {
  Vector12 v = Vector12::Zero();

  AmbientTangent() = default;
  explicit AmbientTangent(const Vector12& v_) : v(v_) {}
  AmbientTangent(const Su2Vector& v1, const Su2Vector& u1, const Su2Vector& v2, const Su2Vector& u2);

  Su2Vector slot(int s) const { return {v[3 * s], v[3 * s + 1], v[3 * s + 2]}; }
  double dot(const AmbientTangent& o) const { return v.dot(o.v); }
  double norm() const { return v.norm(); }
};

/// Per-factor X_s exp(v_s).
Quad retract(const Quad& q, const AmbientTangent& t);
Quad retract(const Quad& q, const Vector12& v);

/// Body-frame displacement from p to q: log(p_s^-1 q_s) per factor.
Vector12 body_difference(const Quad& p, const Quad& q);

struct TangentFrame {
  Quad base;
  std::vector<AmbientTangent> vectors;

  std::size_t size() const { return vectors.size(); }
  /// 12 x n matrix whose columns are the frame vectors.
  Eigen::MatrixXd matrix() const;
};

struct TraceFingerprint {
  std::array<double, 14> t{};

  /// Infinity-norm distance.
  double gap(const TraceFingerprint& o) const;
};

/// mu = -[A1,B1][A2,B2]; the variety is mu^-1(1).
UnitQuaternion mu(const Quad& q);

/// log_su2(mu(q)); propagates AntipodeError.
Su2Vector constraint_residual(const Quad& q);

/// Right-translated differential of mu: d/dt mu(q exp(t v)) mu(q)^-1 at t = 0.
Matrix3x12 mu_jacobian(const Quad& q);

/// Right-translated differential of a word evaluation, same convention.
Matrix3x12 word_jacobian(const Word& w, const Quad& q);

struct ProjectOptions {
  double tol = 1e-10;
  int max_iter = 100;
  /// Extra Newton steps after reaching `tol`, kept only while they reduce the residual.
  int polish_steps = 0;
};

struct ProjectResult {
  Quad quad;
  int iterations = 0;
  double residual = 0.0;
};

/// Gauss-Newton with minimum-norm steps on log(mu), retracting per factor,
/// with backtracking on the residual norm. Throws NoConvergence/AntipodeError.
ProjectResult project_to_variety_detailed(const Quad& q0, const ProjectOptions& opts = {});
Quad project_to_variety(const Quad& q0, const ProjectOptions& opts = {});

/// Haar 4-tuple projected onto the variety; up to 10 attempts.
Quad random_point(RandomSource& rng);
Quad haar_quad(RandomSource& rng);

/// Infinitesimal conjugation by i, j, k, orthonormalized. Throws DegenerateGauge.
std::vector<AmbientTangent> gauge_directions(const Quad& q);

/// Orthonormal basis of ker(d mu) orthogonal to the gauge orbit (6 vectors).
TangentFrame tangent_frame_M(const Quad& q);

TraceFingerprint fingerprint(const Quad& q);

struct ClassAlignment {
  UnitQuaternion g;       // g p g^-1 ~ q
  double distance = 0.0;  // |g p g^-1 - q|
};

ClassAlignment align_classes(const Quad& p, const Quad& q);
double class_distance(const Quad& p, const Quad& q);

bool is_irreducible(const Quad& q);

/// Modified Gram-Schmidt (two passes) of `candidates` against the columns of
/// `basis`, keeping candidates whose projected norm exceeds `drop_below`.
std::vector<Vector12> gram_schmidt(const std::vector<Vector12>& basis, const std::vector<Vector12>& candidates,
                                   double drop_below = 1e-8);

}  // namespace realmod
