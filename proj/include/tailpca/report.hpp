#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tailpca/detector.hpp"
#include "tailpca/returns.hpp"
#include "tailpca/spectra.hpp"

namespace tailpca {

struct EigenRow {
  std::size_t rank;
  double eigenvalue;
};

/// The `last_k` smallest eigenvalues, smallest first.
std::vector<EigenRow> eigen_table(const EigenDecomposition& ed,
                                  std::size_t last_k);
void write_eigen_table(std::ostream& out, std::span<const EigenRow> rows);

struct BiplotPoint {
  std::string ticker;
  double x;
  double y;
  /// Index into the detection's groups, or -1.
  int group = -1;
};

struct BiplotSheet {
  std::size_t pc_a;
  std::size_t pc_b;
  double eigenvalue_a;
  double eigenvalue_b;
  std::vector<BiplotPoint> points;
};

BiplotSheet biplot_sheet(const EigenDecomposition& ed, std::size_t pc_a,
                         std::size_t pc_b,
                         std::span<const RelationshipGroup> groups);
/// `ticker,x,y,group`
void write_biplot_csv(std::ostream& out, const BiplotSheet& sheet);
/// SVG 1.1 scatter of the loadings. Each point carries its exact coordinates
/// in data attributes.
std::string render_biplot_svg(const BiplotSheet& sheet);

struct TrackOptions {
  /// Members drawn against a right-hand axis with its own scale.
  std::vector<std::string> secondary_axis;
};

struct PriceTracks {
  std::vector<Date> dates;
  std::vector<std::string> members;
  /// dates x members adjusted prices.
  Eigen::MatrixXd prices;
  std::vector<bool> secondary;
};

/// Throws std::invalid_argument for fewer than two members or a member that
/// is not in the panel.
PriceTracks price_tracks(const ReturnPanel& rp, const RelationshipGroup& group,
                         const TrackOptions& options = {});
/// `date,<member>...`
void write_tracks_csv(std::ostream& out, const PriceTracks& tracks);
std::string render_tracks_svg(const PriceTracks& tracks);

std::string biplot_file_stem(std::size_t pc_a, std::size_t pc_b);

}  // namespace tailpca
