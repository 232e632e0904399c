#include "tailpca/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace tailpca {

namespace {

// Okabe-Ito palette; every group also gets its own marker shape so figures
// survive greyscale printing.
constexpr std::array<const char*, 7> kColors{"#0072B2", "#D55E00", "#009E73", "#CC79A7",
                                             "#E69F00", "#56B4E9", "#000000"};
constexpr std::array<const char*, 4> kDashes{"", "6,3", "2,2", "8,3,2,3"};

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

std::string svg_open(int width, int height) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:tp=\"urn:tailpca:data\" "
      "version=\"1.1\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
      width, height);
}

// Marker centred on (cx, cy); shapes cycle independently of colours.
std::string marker(int group, double cx, double cy, const std::string& attrs) {
  const char* color = kColors[static_cast<std::size_t>(group) % kColors.size()];
  const double r = 5.0;
  switch (group % 6) {
    case 0:
      return fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" {}/>", num(cx), num(cy),
                         num(r), color, attrs);
    case 1:
      return fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" {}/>",
                         num(cx - r), num(cy - r), num(2 * r), num(2 * r), color, attrs);
    case 2:
      return fmt::format("<polygon points=\"{},{} {},{} {},{}\" fill=\"{}\" {}/>", num(cx),
                         num(cy - r), num(cx + r), num(cy + r), num(cx - r), num(cy + r), color,
                         attrs);
    case 3:
      return fmt::format("<polygon points=\"{},{} {},{} {},{} {},{}\" fill=\"{}\" {}/>", num(cx),
                         num(cy - r), num(cx + r), num(cy), num(cx), num(cy + r), num(cx - r),
                         num(cy), color, attrs);
    case 4:
      return fmt::format("<polygon points=\"{},{} {},{} {},{}\" fill=\"{}\" {}/>", num(cx - r),
                         num(cy - r), num(cx + r), num(cy - r), num(cx), num(cy + r), color,
                         attrs);
    default:
      return fmt::format(
          "<path d=\"M{},{} L{},{} M{},{} L{},{}\" stroke=\"{}\" stroke-width=\"2\" fill=\"none\" "
          "{}/>",
          num(cx - r), num(cy - r), num(cx + r), num(cy + r), num(cx - r), num(cy + r),
          num(cx + r), num(cy - r), color, attrs);
  }
}

// Round up to a multiple of 0.1 so axes have tidy limits.
double loading_extent(const BiplotSheet& sheet) {
  double m = 0.0;
  for (const auto& p : sheet.points) m = std::max({m, std::abs(p.x), std::abs(p.y)});
  return std::max(0.1, std::ceil(m * 10.0 - 1e-9) / 10.0);
}

struct Range {
  double lo;
  double hi;
};

Range padded_range(const Eigen::MatrixXd& prices, const std::vector<bool>& secondary,
                   bool want_secondary) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index c = 0; c < prices.cols(); ++c) {
    if (secondary[static_cast<std::size_t>(c)] != want_secondary) continue;
    lo = std::min(lo, prices.col(c).minCoeff());
    hi = std::max(hi, prices.col(c).maxCoeff());
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  const double pad = hi > lo ? 0.05 * (hi - lo) : std::max(1.0, 0.05 * std::abs(hi));
  return {lo - pad, hi + pad};
}

}  // namespace

std::vector<EigenRow> eigen_table(const EigenDecomposition& ed, std::size_t last_k) {
  if (last_k < 1 || last_k > ed.size()) {
    throw std::invalid_argument(
        fmt::format("last_k {} outside 1..{}", last_k, ed.size()));
  }
  std::vector<EigenRow> rows;
  for (std::size_t r = ed.size(); r > ed.size() - last_k; --r) {
    rows.push_back({r, ed.eigenvalue(r)});
  }
  return rows;
}

void write_eigen_table(std::ostream& out, std::span<const EigenRow> rows) {
  out << "rank,eigenvalue\n";
  for (const auto& r : rows) out << fmt::format("{},{}\n", r.rank, r.eigenvalue);
}

std::string biplot_file_stem(std::size_t pc_a, std::size_t pc_b) {
  return fmt::format("biplot_pc{}_pc{}", pc_a, pc_b);
}

BiplotSheet biplot_sheet(const EigenDecomposition& ed, std::size_t pc_a, std::size_t pc_b,
                         std::span<const RelationshipGroup> groups) {
  if (pc_a == pc_b) throw std::invalid_argument("biplot needs two distinct components");
  const auto a = ed.loading(pc_a);
  const auto b = ed.loading(pc_b);
  BiplotSheet sheet{pc_a, pc_b, ed.eigenvalue(pc_a), ed.eigenvalue(pc_b), {}};
  for (std::size_t i = 0; i < ed.size(); ++i) {
    BiplotPoint pt{ed.tickers[i], a(static_cast<Eigen::Index>(i)),
                   b(static_cast<Eigen::Index>(i)), -1};
    for (std::size_t g = 0; g < groups.size() && pt.group < 0; ++g) {
      const auto& m = groups[g].members;
      if (std::find(m.begin(), m.end(), ed.tickers[i]) != m.end()) pt.group = static_cast<int>(g);
    }
    sheet.points.push_back(std::move(pt));
  }
  return sheet;
}

void write_biplot_csv(std::ostream& out, const BiplotSheet& sheet) {
  out << "ticker,x,y,group\n";
  for (const auto& p : sheet.points) {
    out << fmt::format("{},{},{},{}\n", p.ticker, p.x, p.y, p.group);
  }
}

std::string render_biplot_svg(const BiplotSheet& sheet) {
  constexpr int kWidth = 560;
  constexpr int kHeight = 560;
  constexpr double kLeft = 80.0;
  constexpr double kTop = 40.0;
  constexpr double kSide = 440.0;

  const double extent = loading_extent(sheet);
  auto sx = [&](double x) { return kLeft + (x + extent) / (2.0 * extent) * kSide; };
  auto sy = [&](double y) { return kTop + (extent - y) / (2.0 * extent) * kSide; };

  std::string svg = svg_open(kWidth, kHeight);
  svg += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                     "font-size=\"15\">Loadings on PC {} and PC {}</text>\n",
                     num(kLeft + kSide / 2), sheet.pc_a, sheet.pc_b);
  svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
                     "stroke=\"#000000\"/>\n",
                     num(kLeft), num(kTop), num(kSide), num(kSide));
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#999999\" "
                     "stroke-dasharray=\"4,3\"/>\n",
                     num(sx(0.0)), num(kTop), num(kTop + kSide));
  svg += fmt::format("<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"#999999\" "
                     "stroke-dasharray=\"4,3\"/>\n",
                     num(sy(0.0)), num(kLeft), num(kLeft + kSide));
  for (int k = -2; k <= 2; ++k) {
    const double v = extent * k / 2.0;
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                       "font-size=\"11\">{:.2f}</text>\n",
                       num(sx(v)), num(kTop + kSide + 16), v);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" "
                       "font-size=\"11\">{:.2f}</text>\n",
                       num(kLeft - 6), num(sy(v) + 4), v);
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                     "font-size=\"13\">PC {} (\xce\xbb = {:.4g})</text>\n",
                     num(kLeft + kSide / 2), num(kTop + kSide + 42), sheet.pc_a,
                     sheet.eigenvalue_a);
  svg += fmt::format("<text x=\"{0}\" y=\"{1}\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                     "font-size=\"13\" transform=\"rotate(-90 {0} {1})\">PC {2} "
                     "(\xce\xbb = {3:.4g})</text>\n",
                     num(kLeft - 48), num(kTop + kSide / 2), sheet.pc_b, sheet.eigenvalue_b);

  // Background points first so highlighted members draw on top.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& p : sheet.points) {
      const bool highlighted = p.group >= 0;
      if (highlighted != (pass == 1)) continue;
      const std::string attrs =
          fmt::format("tp:ticker=\"{}\" tp:x=\"{}\" tp:y=\"{}\"", escape(p.ticker), p.x, p.y);
      if (!highlighted) {
        svg += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"#808080\" {}/>\n",
                           num(sx(p.x)), num(sy(p.y)), attrs);
        continue;
      }
      svg += marker(p.group, sx(p.x), sy(p.y), attrs) + "\n";
      svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" "
                         "font-size=\"12\">{}</text>\n",
                         num(sx(p.x) + 7), num(sy(p.y) - 7), escape(p.ticker));
    }
  }
  svg += "</svg>\n";
  return svg;
}

PriceTracks price_tracks(const ReturnPanel& rp, const RelationshipGroup& group,
                         const TrackOptions& options) {
  if (group.members.size() < 2) {
    throw std::invalid_argument("price tracks need a group of at least two members");
  }
  PriceTracks tracks;
  tracks.dates = rp.price_dates;
  tracks.members = group.members;
  tracks.prices.resize(static_cast<Eigen::Index>(rp.price_dates.size()),
                       static_cast<Eigen::Index>(group.members.size()));
  for (std::size_t m = 0; m < group.members.size(); ++m) {
    const auto it = std::find(rp.tickers.begin(), rp.tickers.end(), group.members[m]);
    if (it == rp.tickers.end()) {
      throw std::invalid_argument(
          fmt::format("group member `{}` is not in the panel", group.members[m]));
    }
    const auto row = static_cast<Eigen::Index>(it - rp.tickers.begin());
    tracks.prices.col(static_cast<Eigen::Index>(m)) = rp.adjusted_prices.row(row).transpose();
    const auto& sec = options.secondary_axis;
    tracks.secondary.push_back(std::find(sec.begin(), sec.end(), group.members[m]) != sec.end());
  }
  return tracks;
}

void write_tracks_csv(std::ostream& out, const PriceTracks& tracks) {
  out << "date";
  for (const auto& m : tracks.members) out << ',' << m;
  out << '\n';
  for (std::size_t t = 0; t < tracks.dates.size(); ++t) {
    out << format_date(tracks.dates[t]);
    for (Eigen::Index m = 0; m < tracks.prices.cols(); ++m) {
      out << fmt::format(",{}", tracks.prices(static_cast<Eigen::Index>(t), m));
    }
    out << '\n';
  }
}

std::string render_tracks_svg(const PriceTracks& tracks) {
  constexpr int kWidth = 860;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 70.0;
  constexpr double kTop = 40.0;
  constexpr double kPlotW = kWidth - kLeft - kRight;
  constexpr double kPlotH = 300.0;

  const bool any_secondary =
      std::find(tracks.secondary.begin(), tracks.secondary.end(), true) != tracks.secondary.end();
  const Range left = padded_range(tracks.prices, tracks.secondary, false);
  const Range right = padded_range(tracks.prices, tracks.secondary, true);
  const std::size_t n = tracks.dates.size();
  auto sx = [&](std::size_t t) {
    return kLeft + (n > 1 ? static_cast<double>(t) / static_cast<double>(n - 1) : 0.5) * kPlotW;
  };
  auto sy = [&](double v, const Range& r) {
    return kTop + (r.hi - v) / (r.hi - r.lo) * kPlotH;
  };

  std::string title = "Adjusted prices:";
  for (const auto& m : tracks.members) title += " " + m;
  const int height = 390 + 16 * static_cast<int>(tracks.members.size());
  std::string svg = svg_open(kWidth, height);
  svg += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                     "font-size=\"15\">{}</text>\n",
                     num(kLeft + kPlotW / 2), escape(title));
  svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
                     "stroke=\"#000000\"/>\n",
                     num(kLeft), num(kTop), num(kPlotW), num(kPlotH));
  for (int k = 0; k <= 4; ++k) {
    const double v = left.lo + (left.hi - left.lo) * k / 4.0;
    svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" "
                       "font-size=\"11\">{:.2f}</text>\n",
                       num(kLeft - 6), num(sy(v, left) + 4), v);
    if (any_secondary) {
      const double w = right.lo + (right.hi - right.lo) * k / 4.0;
      svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"start\" "
                         "font-family=\"sans-serif\" font-size=\"11\">{:.2f}</text>\n",
                         num(kLeft + kPlotW + 6), num(sy(w, right) + 4), w);
    }
  }
  if (n > 0) {
    for (std::size_t t : {std::size_t{0}, (n - 1) / 2, n - 1}) {
      svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" "
                         "font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                         num(sx(t)), num(kTop + kPlotH + 16), format_date(tracks.dates[t]));
    }
  }

  for (std::size_t m = 0; m < tracks.members.size(); ++m) {
    const bool sec = tracks.secondary[m];
    const Range& r = sec ? right : left;
    const char* color = kColors[m % kColors.size()];
    const char* dash = kDashes[m % kDashes.size()];
    std::string points;
    for (std::size_t t = 0; t < n; ++t) {
      if (t > 0) points += ' ';
      points += num(sx(t)) + "," +
                num(sy(tracks.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m)), r));
    }
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"{} "
                       "tp:ticker=\"{}\" tp:axis=\"{}\" points=\"{}\"/>\n",
                       color, *dash ? fmt::format(" stroke-dasharray=\"{}\"", dash) : "",
                       escape(tracks.members[m]), sec ? "right" : "left", points);
    const double ly = kTop + kPlotH + 36 + 16.0 * static_cast<double>(m);
    svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" "
                       "stroke-width=\"2\"{}/>\n",
                       num(kLeft), num(ly), num(kLeft + 30), num(ly), color,
                       *dash ? fmt::format(" stroke-dasharray=\"{}\"", dash) : "");
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" "
                       "font-size=\"12\">{}{}</text>\n",
                       num(kLeft + 36), num(ly + 4), escape(tracks.members[m]),
                       sec ? " (right axis)" : "");
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace tailpca
