#pragma once

#include "realmod/morse.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace realmod {

/// First page of the Morse-Bott spectral sequence of f'. Column p holds the
/// critical pieces of index p; row q is H^q of the piece.
struct E1Page {
  std::array<std::array<int, 2>, 3> ranks{};
  /// Filtration cut points between the critical values.
  std::array<double, 4> thresholds{-1.5, -0.5, 0.5, 1.5};

  int rank(int p, int q) const { return ranks[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)]; }
  int total_rank() const;
};

/// Pieces must be disjoint unions of circles with index 0..2. Throws UnsupportedTopology.
E1Page build_e1(const std::vector<CriticalSubmanifold>& crits);

enum class DifferentialId { D1_00_10, D1_01_11, D1_10_20, D1_11_21, D2_01_20 };

inline constexpr DifferentialId kAllDifferentials[] = {DifferentialId::D1_00_10, DifferentialId::D1_01_11,
                                                       DifferentialId::D1_10_20, DifferentialId::D1_11_21,
                                                       DifferentialId::D2_01_20};

/// "d1_00_to_10" etc.
std::string_view to_string(DifferentialId d);

struct Premise {
  std::string name;
  bool verified = false;
  double evidence = 0.0;
  std::string detail;
};

struct DifferentialCertificate {
  DifferentialId target = DifferentialId::D1_00_10;
  std::vector<Premise> premises;
  /// (r* on source) x (Thom signs) x (r* on target) for the anticommutation
  /// arguments, 0 for the others.
  int twist_sign = 0;
  bool vanishes = false;

  /// vanishes = every premise verified.
  void recompute();
  const Premise* first_failure() const;
};

/// Numbers the d1 sign calculus consumes, gathered from the three family reports.
struct RActionEvidence {
  double s1_rotation_distance = 0.0;
  double s3_rotation_distance = 0.0;
  double s2_fixed_residual = 0.0;
  double s2_normal_defect = 0.0;  // ||dr|_normal + I||
  int s2_negative_sign = 0;       // r on the negative line of S2'
  int s3_negative_sign = 0;       // r on the negative plane of S3', after transport
  bool s2_negative_orientable = false;
  bool s3_negative_orientable = false;
  bool mprime_orientable = false;
  int s1_index = -1, s2_index = -1, s3_index = -1;
  int s1_components = 0, s2_components = 0, s3_components = 0;
  double s1_fixed_residual = 0.0;
};

RActionEvidence gather_evidence(const FamilyReport& s1, const FamilyReport& s2, const FamilyReport& s3);

/// The four d1 certificates with premises evaluated; never throws.
std::vector<DifferentialCertificate> assess_d1(const E1Page& page, const RActionEvidence& ev);

/// As assess_d1, but throws PremiseFailure naming the first unverified premise.
std::vector<DifferentialCertificate> certify_d1(const E1Page& page, const RActionEvidence& ev);

struct RPrimeIntersection {
  double theta = 0.0;
  double psi = 0.0;
  double s1_parameter = 0.0;
  double class_distance = 0.0;  // to the fitted S1' point
  double reference_distance = 0.0;  // to the class of (1, -1, i, j)
};

/// Sweep of the sphere R' = {(1, B1, i, j)} with B1 = cos t + sin t (cos s u + sin s v),
/// where u, v span the pure quaternions orthogonal to the axis the real
/// structure reverses (i for left, k for middle).
struct RPrimeReport {
  Puncture puncture = Puncture::Left;
  bool supported = false;
  int grid_n = 0;
  int points = 0;
  double max_constraint_residual = 0.0;
  double max_fixed_residual = 0.0;
  std::vector<RPrimeIntersection> intersections;
  double transversality_min_sv = 0.0;

  int intersection_count() const { return static_cast<int>(intersections.size()); }
  bool valid() const;
};

/// Grid sweep of R' (rows in parallel). Unsupported punctures give a report
/// with supported = false.
RPrimeReport verify_rprime(Puncture p, int grid_n, int threads = 0);

/// d2: E^{0,1} -> E^{2,0}. Never throws.
DifferentialCertificate assess_d2(const E1Page& page, const RPrimeReport& rprime);

/// Throws PremiseFailure when the intersection is not a single transverse point.
DifferentialCertificate certify_d2(const E1Page& page, const RPrimeReport& rprime);

/// Numerical check that handle_swap carries M' of the left puncture onto M'
/// of the right one: sigma*_right(swap q) = swap(sigma*_left q) and swap
/// keeps q on the variety.
struct HandleSwapReport {
  int samples = 0;
  double max_intertwining_defect = 0.0;
  double max_constraint_defect = 0.0;  // | |res(swap q)| - |res(q)| |
  double max_fixed_residual = 0.0;     // certificate residual of swap(q) for q in M'_left

  bool valid() const;
};

HandleSwapReport verify_handle_swap(int samples, std::uint64_t seed);

/// Left-puncture certificates restated for the right puncture: each gains the
/// premise that handle_swap is a diffeomorphism of the real moduli spaces.
std::vector<DifferentialCertificate> transport_to_right(std::vector<DifferentialCertificate> left,
                                                        const HandleSwapReport& swap);

struct BettiVector {
  int b0 = 0, b1 = 0, b2 = 0, b3 = 0;

  bool operator==(const BettiVector&) const = default;
  int euler_characteristic() const { return b0 - b1 + b2 - b3; }
};

/// Anti-diagonal sums of a collapsed page. Throws IncompleteCertification when
/// a differential lacks a vanishing certificate.
BettiVector betti(const E1Page& page, const std::vector<DifferentialCertificate>& certs);

/// True iff b = (1, 3, 3, 1).
bool compare_torus(const BettiVector& b);

}  // namespace realmod
