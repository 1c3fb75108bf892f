#pragma once

#include "realmod/realstruct.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace realmod {

/// f(q) = tr(B1)/2.
double morse_function(const Quad& q);

/// (A1, -B1, A2, B2); sends f to -f.
Quad sign_change(const Quad& q);

enum class Family { S1p, S2p, S3p };

inline constexpr Family kAllFamilies[] = {Family::S1p, Family::S2p, Family::S3p};

std::string_view to_string(Family f);

/// Critical value of the family: -1, 0, 1.
double family_value(Family f);

/// Point of a critical circle. For the left puncture:
///   S1p(t) = (e^{it}, -1, i, j), S2p(+-, t) = (j, i, +-i, e^{it}), S3p(t) = (e^{it}, 1, i, j).
/// The middle and right punctures use the analogous circles of their own
/// real structure. `branch` (+1 or -1) only matters for S2p.
Quad critical_point(Family fam, double t, int branch = 1, Puncture p = Puncture::Left);

/// Derivative of critical_point in t, in body coordinates.
Vector12 critical_tangent(Family fam, double t, int branch = 1, Puncture p = Puncture::Left);

/// Gradient of f on SU(2)^4 in body coordinates (B1 slot only).
AmbientTangent ambient_gradient(const Quad& q);

/// Gradient of f restricted to M', as an ambient vector.
AmbientTangent grad_fprime(Puncture p, const FixedPointCertificate& cert);
AmbientTangent grad_fprime(const TangentFrame& frame_mprime);

struct HessianOptions {
  double step = 1e-4;
  double tol_grad = 1e-7;
};

/// Second differences of f along retracted curves in the tangent_frame_Mprime
/// basis, symmetrized. Throws NotCritical.
Eigen::Matrix3d hessian_fprime(Puncture p, const FixedPointCertificate& cert, const HessianOptions& opts = {});
Eigen::Matrix3d hessian_fprime(const TangentFrame& frame_mprime, const HessianOptions& opts = {});

struct CriticalClassification {
  int index = 0;
  int nullity = 0;
  int positive = 0;
  double threshold = 0.0;
  Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();  // ascending
  Eigen::Matrix3d eigenvectors = Eigen::Matrix3d::Zero();  // frame coordinates, columns
  TangentFrame frame;
};

/// Eigenvalue signs of the Hessian with threshold tol_eig * spectral radius (floor 1e-8).
CriticalClassification classify_critical(Puncture p, const FixedPointCertificate& cert, double tol_eig = 1e-5,
                                         const HessianOptions& opts = {});

/// Conjugate of q with B1 = e^{i beta}, beta in (0, pi). Throws BoundaryError at |f| >= 1 - 1e-9.
Quad gauge_normal_form(const Quad& q);

/// (A1 e^{i phi}, B1, A2, B2) in gauge normal form. Throws BoundaryError.
Quad circle_action(double phi, const Quad& q);

enum class FlowDirection { Down, Up };

struct FlowOptions {
  double tol_grad = 1e-7;
  int max_steps = 10000;
  double initial_step = 0.1;
  double max_step = 4.0;
  double min_step = 1e-9;
  double tol_fixed = 1e-10;
};

struct FlowResult {
  Quad limit;
  double f_limit = 0.0;
  int steps = 0;
  bool converged = false;
  double grad_norm = 0.0;
};

/// RK4 for -+grad f' with projection and re-symmetrization at every stage,
/// step halving whenever f moves the wrong way.
FlowResult flow(Puncture p, const FixedPointCertificate& cert, FlowDirection dir, const FlowOptions& opts = {});

struct FamilyMatch {
  Family family = Family::S1p;
  int branch = 1;
  double parameter = 0.0;
  double fingerprint_gap = 0.0;
  double class_distance = 0.0;
  bool matched = false;
};

/// Best fit of q along one critical circle: fingerprint least squares over the
/// circle parameter, then the class distance at the fitted parameter.
FamilyMatch fit_family(Puncture p, Family fam, int branch, const Quad& q);

/// Best fit of q among the three critical circles by fingerprint, then class distance.
FamilyMatch match_family(Puncture p, const Quad& q, double tol = 1e-5);

struct CensusOptions {
  FlowOptions flow{};
  double tol_match = 1e-5;
  double tol_value = 1e-6;
  int threads = 0;  // 0: hardware concurrency
};

struct CensusLimit {
  FlowResult flow;
  FamilyMatch match;
  TraceFingerprint fingerprint;
};

struct CensusSample {
  std::uint64_t task = 0;
  bool started = false;
  std::string error;
  double f_start = 0.0;
  CensusLimit down;
  CensusLimit up;
};

struct CensusReport {
  Puncture puncture = Puncture::Left;
  int n = 0;
  std::vector<CensusSample> samples;
  std::array<int, 3> family_counts{};
  std::array<int, 20> histogram{};  // f_limit over [-1, 1]
  int failed_starts = 0;
  int nonconverged = 0;
  int unmatched = 0;
  double max_value_deviation = 0.0;

  bool clean() const { return failed_starts == 0 && nonconverged == 0 && unmatched == 0; }
};

/// n symmetrized random starts, flowed both ways, limits matched to the known
/// families. Task k draws from RandomSource(derive_seed(seed, k)).
CensusReport critical_census(Puncture p, int n, std::uint64_t seed, const CensusOptions& opts = {});

/// (j, i, e^{ia}, e^{ib}): the torus of critical points of f at level 0 in M.
Quad s2_torus_point(double a, double b);

/// Class distance from q to the nearest point of the S2 torus; q is
/// conjugated so that (A1, B1) = (j, i) and A2, B2 are read off from there.
double s2_torus_distance(const Quad& q);

enum class RAction { RotationByPi, Trivial, Unknown };
enum class BundleAction { Preserves, Reverses, NotApplicable, Unknown };

std::string_view to_string(RAction a);
std::string_view to_string(BundleAction a);

struct CriticalSubmanifold {
  Family name = Family::S1p;
  double f_value = 0.0;
  int index = 0;
  int nullity = 0;
  int components = 1;
  int dim = 1;
  RAction r_action = RAction::Unknown;
  BundleAction r_on_negative_bundle = BundleAction::Unknown;
};

/// Fixed locus of sigma* inside the family's critical set of M, from the
/// linear action on the free slots.
struct ComponentCount {
  int components = 0;
  int dim = 0;
  double linearity_defect = 0.0;
};

ComponentCount fixed_locus_components(Puncture p, Family fam);

struct AnalysisOptions {
  int samples = 32;
  double tol_eig = 1e-5;
  HessianOptions hessian{};
};

/// Numerical evidence gathered along the samples of one family (both S2p circles).
struct FamilyReport {
  Puncture puncture = Puncture::Left;
  Family family = Family::S1p;
  int samples = 0;

  double max_constraint_residual = 0.0;
  double max_fixed_residual = 0.0;
  double max_grad_norm = 0.0;
  double max_value_deviation = 0.0;

  std::vector<std::array<int, 2>> classifications;  // (index, nullity) per sample
  int index = -1;                                   // -1 when not constant
  int nullity = -1;
  double min_null_alignment = 1.0;  // |cos| between null vector and circle tangent
  double max_abs_eigenvalue = 0.0;
  double min_nonzero_gap = 0.0;  // smallest |eigenvalue| among the non-null ones

  // r action
  double max_rotation_distance = 0.0;  // S1p, S3p: class_distance(r x(t), x(t + pi))
  double max_r_fixed_residual = 0.0;   // S2p
  RAction r_action = RAction::Unknown;

  double max_normal_defect = 0.0;    // S2p: ||dr|_normal + I||
  double max_r_orientation_err = 0.0;  // S2p: |det(dr on T M') - 1|
  double negative_bundle_sign = 0.0;   // sign of r on the negative bundle (0: not applicable)
  BundleAction r_on_negative_bundle = BundleAction::Unknown;

  bool negative_bundle_orientable = false;  // transport around every circle returns with +1
  bool mprime_orientable = false;

  ComponentCount components;

  CriticalSubmanifold summary() const;
};

FamilyReport analyze_family(Puncture p, Family fam, const AnalysisOptions& opts = {});

}  // namespace realmod
