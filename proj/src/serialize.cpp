#include "tailpca/serialize.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "tailpca/errors.hpp"

namespace tailpca {

namespace {

nlohmann::json tool_block() { return {{"name", "tailpca"}, {"version", TAILPCA_VERSION}}; }

nlohmann::json components(const std::vector<std::size_t>& ranks,
                          const std::vector<double>& eigenvalues) {
  auto out = nlohmann::json::array();
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    out.push_back({{"rank", ranks[k]}, {"eigenvalue", eigenvalues[k]}});
  }
  return out;
}

nlohmann::json groups_json(const std::vector<RelationshipGroup>& groups) {
  auto out = nlohmann::json::array();
  for (std::size_t g = 0; g < groups.size(); ++g) out.push_back(to_json(groups[g], g + 1));
  return out;
}

void write_group_rows(std::ostream& out, const std::string& prefix, std::size_t id,
                      const RelationshipGroup& g) {
  for (std::size_t m = 0; m < g.members.size(); ++m) {
    for (std::size_t k = 0; k < g.detecting_pcs.size(); ++k) {
      out << fmt::format("{}{},{},{},{},{}\n", prefix, id, g.members[m], g.detecting_pcs[k],
                         g.loadings[m][k], g.eigenvalues[k]);
    }
  }
}

}  // namespace

nlohmann::json to_json(const DetectorConfig& cfg) {
  nlohmann::json j;
  j["trailing_count"] = cfg.trailing_count;
  j["eigenvalue_ceiling"] =
      cfg.eigenvalue_ceiling ? nlohmann::json(*cfg.eigenvalue_ceiling) : nlohmann::json(nullptr);
  j["max_eigenvalue"] =
      std::isinf(cfg.max_eigenvalue) ? nlohmann::json(nullptr) : nlohmann::json(cfg.max_eigenvalue);
  j["abs_threshold"] = cfg.abs_threshold;
  j["rel_threshold"] = cfg.rel_threshold;
  j["min_group_size"] = cfg.min_group_size;
  j["collinear_cos"] = cfg.collinear_cos;
  j["orthogonal_cos"] = cfg.orthogonal_cos;
  return j;
}

DetectorConfig detector_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{
      "trailing_count", "eigenvalue_ceiling", "max_eigenvalue", "abs_threshold",
      "rel_threshold",  "min_group_size",     "collinear_cos",  "orthogonal_cos"};
  if (!j.is_object()) throw ConfigError("detector config must be a JSON object");
  DetectorConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.contains(key)) throw ConfigError(fmt::format("unknown config key `{}`", key));
    }
    cfg.trailing_count = j.value("trailing_count", cfg.trailing_count);
    if (j.contains("eigenvalue_ceiling") && !j["eigenvalue_ceiling"].is_null()) {
      cfg.eigenvalue_ceiling = j["eigenvalue_ceiling"].get<double>();
    }
    if (j.contains("max_eigenvalue")) {
      cfg.max_eigenvalue = j["max_eigenvalue"].is_null()
                               ? std::numeric_limits<double>::infinity()
                               : j["max_eigenvalue"].get<double>();
    }
    cfg.abs_threshold = j.value("abs_threshold", cfg.abs_threshold);
    cfg.rel_threshold = j.value("rel_threshold", cfg.rel_threshold);
    cfg.min_group_size = j.value("min_group_size", cfg.min_group_size);
    cfg.collinear_cos = j.value("collinear_cos", cfg.collinear_cos);
    cfg.orthogonal_cos = j.value("orthogonal_cos", cfg.orthogonal_cos);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed detector config: {}", e.what()));
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const RelationshipGroup& g, std::size_t id) {
  nlohmann::json j;
  j["id"] = id;
  j["members"] = g.members;
  j["detecting_pcs"] = g.detecting_pcs;
  j["eigenvalues"] = g.eigenvalues;
  j["loadings"] = nlohmann::json::array();
  for (std::size_t m = 0; m < g.members.size(); ++m) {
    j["loadings"].push_back({{"ticker", g.members[m]},
                             {"values", g.loadings[m]},
                             {"sign_pattern", g.sign_patterns[m]},
                             {"max_abs_loading", g.max_abs_loading[m]}});
  }
  j["implied_signs"] = nlohmann::json::array();
  for (const auto& ps : g.implied_signs) {
    j["implied_signs"].push_back({{"a", ps.a},
                                  {"b", ps.b},
                                  {"sign", ps.sign},
                                  {"consistent", ps.consistent},
                                  {"basis", ps.from_subspace ? "subspace" : "component"}});
  }
  j["flags"] = {{"inconsistent", g.inconsistent}, {"merged", g.merged}};
  return j;
}

nlohmann::json detection_report(const EigenDecomposition& ed, const Detection& detection,
                                const DetectorConfig& cfg) {
  nlohmann::json j;
  j["tool"] = tool_block();
  j["config"] = to_json(cfg);
  j["n_assets"] = ed.size();
  j["scanned_pcs"] = components(detection.scanned_pcs, detection.scanned_eigenvalues);
  j["skipped_pcs"] = components(detection.skipped_pcs, detection.skipped_eigenvalues);
  j["groups"] = groups_json(detection.groups);
  return j;
}

nlohmann::json rolling_report(std::span<const WindowDetection> windows, std::size_t window,
                              std::size_t step, const DetectorConfig& cfg) {
  nlohmann::json j;
  j["tool"] = tool_block();
  j["config"] = to_json(cfg);
  j["window"] = window;
  j["step"] = step;
  j["windows"] = nlohmann::json::array();
  for (const auto& w : windows) {
    j["windows"].push_back({{"start_index", w.start},
                            {"start_date", format_date(w.start_date)},
                            {"observations", w.observations},
                            {"assets", w.assets},
                            {"rank_deficient", w.rank_deficient},
                            {"skipped", w.skipped},
                            {"dropped", w.dropped},
                            {"warnings", w.warnings},
                            {"scanned_pcs", components(w.detection.scanned_pcs,
                                                       w.detection.scanned_eigenvalues)},
                            {"groups", groups_json(w.detection.groups)}});
  }
  return j;
}

void write_detection_csv(std::ostream& out, const Detection& detection) {
  out << "group_id,ticker,pc_rank,loading,eigenvalue\n";
  for (std::size_t g = 0; g < detection.groups.size(); ++g) {
    write_group_rows(out, "", g + 1, detection.groups[g]);
  }
}

void write_rolling_csv(std::ostream& out, std::span<const WindowDetection> windows) {
  out << "window_start,group_id,ticker,pc_rank,loading,eigenvalue\n";
  for (const auto& w : windows) {
    const auto prefix = format_date(w.start_date) + ",";
    for (std::size_t g = 0; g < w.detection.groups.size(); ++g) {
      write_group_rows(out, prefix, g + 1, w.detection.groups[g]);
    }
  }
}

}  // namespace tailpca
