#pragma once

#include "realmod/repvar.hpp"

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <string_view>
#include <variant>

namespace realmod {

/// Which real circle of the surface carries the puncture.
enum class Puncture { Left, Middle, Right };

inline constexpr Puncture kAllPunctures[] = {Puncture::Left, Puncture::Middle, Puncture::Right};

std::string_view to_string(Puncture p);
Puncture parse_puncture(std::string_view name);  // throws ConfigError

/// The two involutions of the moduli space handled here.
enum class Involution { SigmaStar, R };

inline constexpr double kTolFixed = 1e-8;
inline constexpr double kBasinGap = 0.5;

/// Quadruple-level real structure for the given puncture position.
Quad sigma_star(Puncture p, const Quad& q);

/// sigma_* on pi_1 generators (left puncture only; throws UnsupportedCase otherwise).
Word sigma_star_pi1(Puncture p, Gen g);

/// Class distance between the word-level and quadruple-level sigma*.
double check_pi1_consistency(const Quad& q);

/// (-A1, B1, A2, B2).
Quad residual_r(const Quad& q);

/// (A2, B2, A1, B1). Preserves the variety and conjugates the left-puncture
/// sigma* into the right-puncture one.
Quad handle_swap(const Quad& q);

Quad apply_involution(Involution kind, Puncture p, const Quad& q);

/// Witness that `quad` is class-fixed: conjugator * map(quad) * conjugator^-1 ~ quad.
struct FixedPointCertificate {
  Quad quad;
  UnitQuaternion conjugator;
  double residual = std::numeric_limits<double>::infinity();

  bool valid(double tol = kTolFixed) const { return residual < tol; }
};

struct NotFixed {
  double fingerprint_gap = 0.0;
};

using FixCheck = std::variant<FixedPointCertificate, NotFixed>;

/// Unconditional conjugator fit of map(q) onto q.
FixedPointCertificate certify_fixed(Involution kind, Puncture p, const Quad& q);

/// Fingerprint screen, then conjugator recovery when the fingerprints agree to 1e-6.
FixCheck is_class_fixed(Involution kind, Puncture p, const Quad& q);

struct SymmetrizeOptions {
  double tol_fixed = kTolFixed;
  /// Starts whose fingerprint gap to their image exceeds this are rejected.
  double basin_gap = kBasinGap;
  int max_iter = 200;
  ProjectOptions projection{};
};

/// Alternating geodesic-midpoint / variety-projection iteration onto the
/// class-fixed locus of the involution. Throws NoConvergence.
FixedPointCertificate symmetrize(Involution kind, Puncture p, const Quad& q0, const SymmetrizeOptions& opts = {});
inline FixedPointCertificate symmetrize(Puncture p, const Quad& q0, const SymmetrizeOptions& opts = {}) {
  return symmetrize(Involution::SigmaStar, p, q0, opts);
}

/// Random point of the real moduli space: a Haar start driven by Gauss-Newton
/// onto {mu = 1, i sigma*(q) = q i} (every fixed class has a representative
/// with conjugator i), then certified by symmetrize.
FixedPointCertificate random_fixed_point(Puncture p, RandomSource& rng);

/// Gauss-Newton on {mu(q) = 1, u map(q) = q u} over q, and over u too when
/// `free_conjugator`. Returns the solved quadruple; throws NoConvergence.
Quad solve_twisted_fixed_system(Involution kind, Puncture p, const Quad& q0, const UnitQuaternion& u0,
                                bool free_conjugator);

/// Fixed-point search from an arbitrary variety point: the conjugator starts
/// at the best alignment of map(q0) onto q0 and is solved jointly with q,
/// then the result is polished by symmetrize. Further conjugator starts are
/// drawn from `rng` when the first one stalls.
FixedPointCertificate search_fixed_point(Involution kind, Puncture p, const Quad& q0, RandomSource& rng);

using Matrix12 = Eigen::Matrix<double, 12, 12>;

/// Body-frame differential of q' -> g map(q') g^-1 at a fixed point, by central
/// differences along exp-retracted curves.
Matrix12 involution_differential(Involution kind, Puncture p, const FixedPointCertificate& cert, double step = 1e-5);

/// Differential of an arbitrary quadruple map at q, in body coordinates at q
/// and at map(q).
Matrix12 map_differential(const std::function<Quad(const Quad&)>& map, const Quad& q, double step = 1e-5);

/// The involution on T M at the fixed point, written in the tangent_frame_M basis.
Eigen::MatrixXd involution_in_frame(Involution kind, Puncture p, const FixedPointCertificate& cert,
                                    const TangentFrame& frame_m);

/// d sigma* at the certificate point applied to v, projected to tangent_frame_M.
AmbientTangent linearized_involution(Puncture p, const FixedPointCertificate& cert, const AmbientTangent& v);

/// Orthonormal basis of the +1 eigenspace of the linearized involution
/// (3 vectors). Throws RankError.
TangentFrame tangent_frame_Mprime(Puncture p, const FixedPointCertificate& cert);

}  // namespace realmod
