#include "realmod/quat.hpp"

#include "realmod/errors.hpp"

#include <Eigen/SVD>

#include <cassert>
#include <cmath>

namespace realmod {

double Su2Vector::norm() const { return std::sqrt(x * x + y * y + z * z); }

UnitQuaternion UnitQuaternion::normalized(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  assert(n > 0.0);
  return exact(w / n, x / n, y / n, z / n);
}

double UnitQuaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

UnitQuaternion UnitQuaternion::inverse() const {
  UnitQuaternion q = exact(w, -x, -y, -z);
  q.chain_ = chain_;
  return q;
}

UnitQuaternion UnitQuaternion::operator-() const {
  UnitQuaternion q = exact(-w, -x, -y, -z);
  q.chain_ = chain_;
  return q;
}

UnitQuaternion mul(const UnitQuaternion& a, const UnitQuaternion& b) {
  UnitQuaternion r = UnitQuaternion::exact(a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
                                           a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
                                           a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
                                           a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w);
  const int chain = a.chain_ + b.chain_ + 1;
  if (chain > UnitQuaternion::kMaxChain) {
    r = UnitQuaternion::normalized(r.w, r.x, r.y, r.z);
  } else {
    r.chain_ = static_cast<std::uint8_t>(chain);
  }
  return r;
}

UnitQuaternion conj_by(const UnitQuaternion& g, const UnitQuaternion& x) { return g * x * g.inverse(); }

UnitQuaternion commutator(const UnitQuaternion& a, const UnitQuaternion& b) {
  return a * b * a.inverse() * b.inverse();
}

double distance(const UnitQuaternion& a, const UnitQuaternion& b) { return (a.vec() - b.vec()).norm(); }

Eigen::Matrix3d adjoint_matrix(const UnitQuaternion& g) {
  const double w = g.w, x = g.x, y = g.y, z = g.z;
  Eigen::Matrix3d m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),   //
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return m;
}

Su2Vector adjoint(const UnitQuaternion& g, const Su2Vector& v) { return Su2Vector(adjoint_matrix(g) * v.vec()); }

UnitQuaternion exp_su2(const Su2Vector& v) {
  const double t = v.norm();
  if (t < 1e-8) {
    // cos t and sin t / t to fourth order
    const double t2 = t * t;
    const double c = 1.0 - t2 / 2.0 + t2 * t2 / 24.0;
    const double s = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    return UnitQuaternion::normalized(c, s * v.x, s * v.y, s * v.z);
  }
  const double s = std::sin(t) / t;
  return UnitQuaternion::exact(std::cos(t), s * v.x, s * v.y, s * v.z);
}

Su2Vector log_su2(const UnitQuaternion& q) {
  if (std::abs(q.w + 1.0) < 1e-9) {
    throw AntipodeError("log_su2: argument is -1, logarithm branch undefined");
  }
  const double s = q.imag().norm();
  if (s < 1e-8 && q.w > 0.0) {
    // t / sin t with t ~ s
    const double s2 = s * s;
    const double k = 1.0 + s2 / 6.0 + 3.0 * s2 * s2 / 40.0;
    return q.imag() * k;
  }
  const double t = std::atan2(s, q.w);
  return q.imag() * (t / s);
}

UnitQuaternion unit_complex(double angle) { return UnitQuaternion::exact(std::cos(angle), std::sin(angle), 0, 0); }

Eigen::Matrix4d left_mul_matrix(const UnitQuaternion& a) {
  Eigen::Matrix4d m;
  m << a.w, -a.x, -a.y, -a.z,  //
      a.x, a.w, -a.z, a.y,     //
      a.y, a.z, a.w, -a.x,     //
      a.z, -a.y, a.x, a.w;
  return m;
}

Eigen::Matrix4d right_mul_matrix(const UnitQuaternion& b) {
  Eigen::Matrix4d m;
  m << b.w, -b.x, -b.y, -b.z,  //
      b.x, b.w, b.z, -b.y,     //
      b.y, -b.z, b.w, b.x,     //
      b.z, b.y, -b.x, b.w;
  return m;
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t task_index) {
  return base_seed ^ (task_index * 0x9E3779B97F4A7C15ULL);
}

RandomSource RandomSource::derive(std::uint64_t task_index) const {
  return RandomSource(derive_seed(seed_, task_index));
}

UnitQuaternion haar_sample(RandomSource& rng) {
  for (;;) {
    const double w = rng.gaussian(), x = rng.gaussian(), y = rng.gaussian(), z = rng.gaussian();
    if (w * w + x * x + y * y + z * z > 1e-24) return UnitQuaternion::normalized(w, x, y, z);
  }
}

ConjugatorFit solve_conjugator(std::span<const UnitQuaternion> xs, std::span<const UnitQuaternion> ys) {
  assert(xs.size() == ys.size() && !xs.empty());
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd system(4 * n, 4);
  for (Eigen::Index k = 0; k < n; ++k) {
    system.block<4, 4>(4 * k, 0) = right_mul_matrix(xs[k]) - left_mul_matrix(ys[k]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(system, Eigen::ComputeFullV);
  ConjugatorFit fit;
  fit.g = UnitQuaternion::normalized(svd.matrixV().col(3));
  fit.residual = svd.singularValues()[3];
  return fit;
}

}  // namespace realmod
