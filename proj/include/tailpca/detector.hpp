#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tailpca/date.hpp"
#include "tailpca/returns.hpp"
#include "tailpca/spectra.hpp"

namespace tailpca {

struct DetectorConfig {
  /// Number of smallest-eigenvalue components to scan.
  std::size_t trailing_count = 6;
  /// When set, scan every component with eigenvalue below this value instead
  /// of a fixed count.
  std::optional<double> eigenvalue_ceiling;
  /// Count mode only: trailing components whose eigenvalue exceeds this are
  /// not near-constant and are skipped. Infinity disables the filter.
  double max_eigenvalue = 0.15;
  double abs_threshold = 0.2;
  double rel_threshold = 0.25;
  std::size_t min_group_size = 2;
  /// Members whose loading vectors over the detecting components have
  /// |cos| >= collinear_cos share a sign pattern up to a flip.
  double collinear_cos = 0.9;
  /// A split into subgroups stands only if every cross-subgroup |cos| is at
  /// most this.
  double orthogonal_cos = 0.2;

  /// Throws ConfigError.
  void validate() const;
};

struct Loading {
  std::size_t asset;
  double value;
};

struct PairSign {
  std::string a;
  std::string b;
  /// +1 positively correlated, -1 negatively correlated.
  int sign = 0;
  /// False when single-component signs disagree across detecting PCs.
  bool consistent = true;
  /// True when no detecting PC has both members significant and the sign
  /// comes from their joint loadings over all detecting PCs.
  bool from_subspace = false;
};

/// Assets tied by a near-constant linear relationship.
///
/// Per-member vectors are indexed like `members`; per-component vectors like
/// `detecting_pcs`.
struct RelationshipGroup {
  std::vector<std::string> members;
  std::vector<std::size_t> member_indices;
  std::vector<std::size_t> detecting_pcs;
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> loadings;
  std::vector<std::vector<int>> sign_patterns;
  std::vector<double> max_abs_loading;
  std::vector<PairSign> implied_signs;
  bool inconsistent = false;
  /// Overlapping structure that sign patterns could not separate.
  bool merged = false;

  double smallest_eigenvalue() const;
};

struct Detection {
  std::vector<std::size_t> scanned_pcs;
  std::vector<double> scanned_eigenvalues;
  /// Trailing components over max_eigenvalue.
  std::vector<std::size_t> skipped_pcs;
  std::vector<double> skipped_eigenvalues;
  std::vector<RelationshipGroup> groups;
};

/// Ranks (1-based, largest first) of the components to scan, smallest
/// eigenvalue first. Throws ConfigError if trailing_count >= p.
std::vector<std::size_t> select_trailing_pcs(const EigenDecomposition& ed,
                                             const DetectorConfig& cfg,
                                             std::vector<std::size_t>* skipped = nullptr);

/// Assets i with |a_ki| >= max(abs_threshold, rel_threshold * max_j |a_kj|),
/// in asset order.
std::vector<Loading> significant_loadings(const EigenDecomposition& ed,
                                          std::size_t rank,
                                          const DetectorConfig& cfg);

/// Groups sorted by smallest detecting eigenvalue, then by first member.
Detection detect(const EigenDecomposition& ed, const DetectorConfig& cfg);

struct WindowDetection {
  std::size_t start = 0;
  Date start_date;
  std::size_t observations = 0;
  std::size_t assets = 0;
  std::vector<std::string> dropped;
  bool rank_deficient = false;
  bool skipped = false;
  std::vector<std::string> warnings;
  Detection detection;
};

/// Runs correlation, eigendecomposition and detection on each window of
/// `window` return observations, advancing by `step`. Windows may be
/// evaluated on `threads` workers; output is in window order regardless.
std::vector<WindowDetection> rolling_detect(const ReturnPanel& rp,
                                            std::size_t window,
                                            std::size_t step,
                                            const DetectorConfig& cfg,
                                            unsigned threads = 1);

}  // namespace tailpca
