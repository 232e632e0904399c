#include "tailpca/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "tailpca/errors.hpp"

namespace tailpca {

namespace {

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root wins so that roots are stable under union order.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

  /// Sets in order of their smallest element; members ascending.
  std::vector<std::vector<std::size_t>> sets(std::span<const std::size_t> items) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> roots;
    for (std::size_t x : items) {
      const std::size_t r = find(x);
      auto it = std::find(roots.begin(), roots.end(), r);
      if (it == roots.end()) {
        roots.push_back(r);
        out.push_back({x});
      } else {
        out[static_cast<std::size_t>(it - roots.begin())].push_back(x);
      }
    }
    return out;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Significance of every asset on every scanned component.
struct ScanState {
  const EigenDecomposition& ed;
  std::vector<std::size_t> ranks;
  std::vector<std::vector<bool>> significant;  // [pc][asset]

  double loading(std::size_t pc, std::size_t asset) const {
    return ed.loadings(static_cast<Eigen::Index>(asset),
                       static_cast<Eigen::Index>(ranks[pc] - 1));
  }

  std::size_t count_in(std::size_t pc, std::span<const std::size_t> members) const {
    return static_cast<std::size_t>(std::count_if(
        members.begin(), members.end(), [&](std::size_t a) { return significant[pc][a]; }));
  }

  /// Scanned components on which at least two of `members` are significant.
  std::vector<std::size_t> detecting(std::span<const std::size_t> members) const {
    std::vector<std::size_t> pcs;
    for (std::size_t k = 0; k < ranks.size(); ++k) {
      if (count_in(k, members) >= 2) pcs.push_back(k);
    }
    return pcs;
  }

  double abs_cos(std::size_t a, std::size_t b, std::span<const std::size_t> pcs) const {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t k : pcs) {
      const double x = loading(k, a);
      const double y = loading(k, b);
      dot += x * y;
      na += x * x;
      nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::abs(dot) / std::sqrt(na * nb);
  }
};

struct Partition {
  std::vector<std::vector<std::size_t>> subgroups;
  bool merged = false;
};

// Splits a co-significance component into subgroups whose members share a
// sign pattern up to a flip, i.e. whose loading vectors over the detecting
// components are collinear. Members without a collinear partner are kept
// together. The split stands only if the subgroups are mutually orthogonal.
Partition partition(const ScanState& scan, const std::vector<std::size_t>& component,
                    const DetectorConfig& cfg) {
  const auto pcs = scan.detecting(component);

  DisjointSets classes(scan.ed.size());
  for (std::size_t x = 0; x < component.size(); ++x) {
    for (std::size_t y = x + 1; y < component.size(); ++y) {
      if (scan.abs_cos(component[x], component[y], pcs) >= cfg.collinear_cos) {
        classes.unite(component[x], component[y]);
      }
    }
  }

  Partition out;
  std::vector<std::size_t> remainder;
  for (auto& cls : classes.sets(component)) {
    if (cls.size() >= 2) {
      out.subgroups.push_back(std::move(cls));
    } else {
      remainder.push_back(cls.front());
    }
  }
  if (!remainder.empty()) out.subgroups.push_back(std::move(remainder));
  if (out.subgroups.size() < 2) return {{component}, false};

  bool accept = true;
  for (const auto& sub : out.subgroups) {
    if (sub.size() < 2 || scan.detecting(sub).empty()) accept = false;
  }
  for (std::size_t s = 0; accept && s < out.subgroups.size(); ++s) {
    for (std::size_t u = s + 1; accept && u < out.subgroups.size(); ++u) {
      for (std::size_t a : out.subgroups[s]) {
        for (std::size_t b : out.subgroups[u]) {
          if (scan.abs_cos(a, b, pcs) > cfg.orthogonal_cos) accept = false;
        }
      }
    }
  }
  if (!accept) return {{component}, true};

  std::sort(out.subgroups.begin(), out.subgroups.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

RelationshipGroup build_group(const ScanState& scan, const std::vector<std::size_t>& members,
                              bool merged) {
  const auto pcs = scan.detecting(members);
  RelationshipGroup g;
  g.merged = merged;
  g.member_indices = members;
  for (std::size_t k : pcs) {
    g.detecting_pcs.push_back(scan.ranks[k]);
    g.eigenvalues.push_back(scan.ed.eigenvalue(scan.ranks[k]));
  }
  for (std::size_t a : members) {
    g.members.push_back(scan.ed.tickers[a]);
    std::vector<double> row;
    std::vector<int> pattern;
    double max_abs = 0.0;
    for (std::size_t k : pcs) {
      const double v = scan.loading(k, a);
      row.push_back(v);
      pattern.push_back(scan.significant[k][a] ? sign_of(v) : 0);
      max_abs = std::max(max_abs, std::abs(v));
    }
    g.loadings.push_back(std::move(row));
    g.sign_patterns.push_back(std::move(pattern));
    g.max_abs_loading.push_back(max_abs);
  }

  for (std::size_t x = 0; x < members.size(); ++x) {
    for (std::size_t y = x + 1; y < members.size(); ++y) {
      const std::size_t a = members[x];
      const std::size_t b = members[y];
      PairSign ps{scan.ed.tickers[a], scan.ed.tickers[b]};
      std::vector<int> per_pc;
      double co_sum = 0.0;
      double all_sum = 0.0;
      for (std::size_t k : pcs) {
        const double prod = scan.loading(k, a) * scan.loading(k, b);
        all_sum += prod;
        if (scan.significant[k][a] && scan.significant[k][b]) {
          per_pc.push_back(-sign_of(prod));
          co_sum += prod;
        }
      }
      if (per_pc.empty()) {
        ps.from_subspace = true;
        ps.sign = -sign_of(all_sum);
      } else {
        ps.consistent = std::all_of(per_pc.begin(), per_pc.end(),
                                    [&](int s) { return s == per_pc.front(); });
        ps.sign = ps.consistent ? per_pc.front() : -sign_of(co_sum);
      }
      if (!ps.consistent) g.inconsistent = true;
      g.implied_signs.push_back(std::move(ps));
    }
  }
  return g;
}

}  // namespace

void DetectorConfig::validate() const {
  if (trailing_count < 1) throw ConfigError("trailing_count must be at least 1");
  if (eigenvalue_ceiling && std::isnan(*eigenvalue_ceiling)) {
    throw ConfigError("eigenvalue_ceiling must be a number");
  }
  if (!(max_eigenvalue > 0.0)) throw ConfigError("max_eigenvalue must be positive");
  if (!(abs_threshold > 0.0 && abs_threshold <= 1.0)) {
    throw ConfigError(fmt::format("abs_threshold {} outside (0, 1]", abs_threshold));
  }
  if (!(rel_threshold > 0.0 && rel_threshold <= 1.0)) {
    throw ConfigError(fmt::format("rel_threshold {} outside (0, 1]", rel_threshold));
  }
  if (min_group_size < 2) throw ConfigError("min_group_size must be at least 2");
  if (!(collinear_cos > 0.0 && collinear_cos <= 1.0)) {
    throw ConfigError(fmt::format("collinear_cos {} outside (0, 1]", collinear_cos));
  }
  if (!(orthogonal_cos >= 0.0 && orthogonal_cos < collinear_cos)) {
    throw ConfigError(fmt::format("orthogonal_cos {} outside [0, collinear_cos)",
                                  orthogonal_cos));
  }
}

double RelationshipGroup::smallest_eigenvalue() const {
  return eigenvalues.empty() ? 0.0 : *std::min_element(eigenvalues.begin(), eigenvalues.end());
}

std::vector<std::size_t> select_trailing_pcs(const EigenDecomposition& ed,
                                             const DetectorConfig& cfg,
                                             std::vector<std::size_t>* skipped) {
  const std::size_t p = ed.size();
  std::vector<std::size_t> ranks;
  if (cfg.eigenvalue_ceiling) {
    for (std::size_t r = p; r >= 1; --r) {
      if (ed.eigenvalue(r) < *cfg.eigenvalue_ceiling) ranks.push_back(r);
    }
    return ranks;
  }
  if (cfg.trailing_count >= p) {
    throw ConfigError(fmt::format("trailing_count {} must be smaller than the {} assets",
                                  cfg.trailing_count, p));
  }
  for (std::size_t r = p; r > p - cfg.trailing_count; --r) {
    if (ed.eigenvalue(r) <= cfg.max_eigenvalue) {
      ranks.push_back(r);
    } else if (skipped != nullptr) {
      skipped->push_back(r);
    }
  }
  return ranks;
}

std::vector<Loading> significant_loadings(const EigenDecomposition& ed, std::size_t rank,
                                          const DetectorConfig& cfg) {
  const auto col = ed.loading(rank);
  const double threshold = std::max(cfg.abs_threshold, cfg.rel_threshold * col.cwiseAbs().maxCoeff());
  std::vector<Loading> out;
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    if (std::abs(col(i)) >= threshold) out.push_back({static_cast<std::size_t>(i), col(i)});
  }
  return out;
}

Detection detect(const EigenDecomposition& ed, const DetectorConfig& cfg) {
  cfg.validate();
  Detection out;
  ScanState scan{ed, select_trailing_pcs(ed, cfg, &out.skipped_pcs), {}};
  out.scanned_pcs = scan.ranks;
  for (std::size_t r : out.scanned_pcs) out.scanned_eigenvalues.push_back(ed.eigenvalue(r));
  for (std::size_t r : out.skipped_pcs) out.skipped_eigenvalues.push_back(ed.eigenvalue(r));

  const std::size_t p = ed.size();
  DisjointSets graph(p);
  for (std::size_t rank : scan.ranks) {
    std::vector<bool> flags(p, false);
    const auto sig = significant_loadings(ed, rank, cfg);
    for (const auto& l : sig) {
      flags[l.asset] = true;
      graph.unite(sig.front().asset, l.asset);
    }
    scan.significant.push_back(std::move(flags));
  }

  std::vector<std::size_t> assets(p);
  std::iota(assets.begin(), assets.end(), std::size_t{0});
  for (const auto& component : graph.sets(assets)) {
    if (component.size() < cfg.min_group_size) continue;
    auto parts = partition(scan, component, cfg);
    for (const auto& sub : parts.subgroups) {
      if (sub.size() < cfg.min_group_size) continue;
      out.groups.push_back(build_group(scan, sub, parts.merged));
    }
  }

  std::stable_sort(out.groups.begin(), out.groups.end(), [](const auto& a, const auto& b) {
    const double la = a.smallest_eigenvalue();
    const double lb = b.smallest_eigenvalue();
    if (la != lb) return la < lb;
    return a.member_indices.front() < b.member_indices.front();
  });
  return out;
}

}  // namespace tailpca
