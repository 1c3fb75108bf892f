#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <span>

namespace realmod {

/// Pure-imaginary quaternion x i + y j + z k, i.e. an element of su(2).
struct Su2Vector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Su2Vector() = default;
  constexpr Su2Vector(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}
  explicit Su2Vector(const Eigen::Vector3d& v) : x(v[0]), y(v[1]), z(v[2]) {}

  Eigen::Vector3d vec() const { return {x, y, z}; }
  double dot(const Su2Vector& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const;

  Su2Vector operator+(const Su2Vector& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Su2Vector operator-(const Su2Vector& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Su2Vector operator-() const { return {-x, -y, -z}; }
  Su2Vector operator*(double s) const { return {x * s, y * s, z * s}; }
};

/// An element of SU(2) stored as a unit quaternion w + x i + y j + z k.
///
/// Products track how many multiplications have happened since the last
/// normalization and renormalize once the chain exceeds kMaxChain, which
/// keeps |q| = 1 to ~1e-15 without normalizing on every multiply.
class UnitQuaternion {
 public:
  static constexpr std::uint8_t kMaxChain = 8;

  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr UnitQuaternion() = default;

  /// Exact components; the caller guarantees unit norm (used for constants).
  static constexpr UnitQuaternion exact(double w, double x, double y, double z) {
    UnitQuaternion q;
    q.w = w;
    q.x = x;
    q.y = y;
    q.z = z;
    return q;
  }
  /// Normalizes an arbitrary nonzero 4-vector.
  static UnitQuaternion normalized(double w, double x, double y, double z);
  static UnitQuaternion normalized(const Eigen::Vector4d& v) {
    return normalized(v[0], v[1], v[2], v[3]);
  }

  Eigen::Vector4d vec() const { return {w, x, y, z}; }
  Su2Vector imag() const { return {x, y, z}; }
  double norm() const;

  UnitQuaternion inverse() const;
  UnitQuaternion operator-() const;

  std::uint8_t chain() const { return chain_; }

 private:
  friend UnitQuaternion mul(const UnitQuaternion& a, const UnitQuaternion& b);
  std::uint8_t chain_ = 0;
};

inline constexpr UnitQuaternion kOne = UnitQuaternion::exact(1, 0, 0, 0);
inline constexpr UnitQuaternion kI = UnitQuaternion::exact(0, 1, 0, 0);
inline constexpr UnitQuaternion kJ = UnitQuaternion::exact(0, 0, 1, 0);
inline constexpr UnitQuaternion kK = UnitQuaternion::exact(0, 0, 0, 1);

UnitQuaternion mul(const UnitQuaternion& a, const UnitQuaternion& b);
inline UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) { return mul(a, b); }

/// g x g^-1.
UnitQuaternion conj_by(const UnitQuaternion& g, const UnitQuaternion& x);

/// a b a^-1 b^-1.
UnitQuaternion commutator(const UnitQuaternion& a, const UnitQuaternion& b);

/// Trace of the SU(2) matrix, 2 Re(q).
inline double trace(const UnitQuaternion& q) { return 2.0 * q.w; }

/// Euclidean distance between the 4-vectors.
double distance(const UnitQuaternion& a, const UnitQuaternion& b);

/// Adjoint action g v g^-1 on su(2) (rotation by twice the angle of g).
Su2Vector adjoint(const UnitQuaternion& g, const Su2Vector& v);
Eigen::Matrix3d adjoint_matrix(const UnitQuaternion& g);

UnitQuaternion exp_su2(const Su2Vector& v);

/// Principal logarithm, |v| in [0, pi). Throws AntipodeError when |w + 1| < 1e-9.
Su2Vector log_su2(const UnitQuaternion& q);

/// e^{i angle}.
UnitQuaternion unit_complex(double angle);

/// Left/right multiplication matrices: L(a) b = a b and R(b) a = a b on 4-vectors.
Eigen::Matrix4d left_mul_matrix(const UnitQuaternion& a);
Eigen::Matrix4d right_mul_matrix(const UnitQuaternion& b);

/// Seeded 64-bit generator shared by every sampler. Streams for parallel
/// tasks are derived as seed XOR (index * odd constant) so results do not
/// depend on scheduling.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  double gaussian() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  RandomSource derive(std::uint64_t task_index) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t task_index);

/// Haar-uniform element of SU(2).
UnitQuaternion haar_sample(RandomSource& rng);

struct ConjugatorFit {
  UnitQuaternion g;
  double residual = 0.0;  // smallest singular value of the stacked system
};

/// Least-squares g with g xs[k] = ys[k] g, from the least singular vector of
/// the stacked 4n x 4 linear system (R(x_k) - L(y_k)) g = 0.
ConjugatorFit solve_conjugator(std::span<const UnitQuaternion> xs, std::span<const UnitQuaternion> ys);

}  // namespace realmod
