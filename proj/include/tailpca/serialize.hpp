#pragma once

#include <iosfwd>
#include <span>

#include "json.hpp"
#include "tailpca/detector.hpp"

namespace tailpca {

nlohmann::json to_json(const DetectorConfig& cfg);
/// Throws ConfigError on unknown keys or bad values.
DetectorConfig detector_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RelationshipGroup& group, std::size_t id);
/// Detection report: config echo, scanned components and groups.
nlohmann::json detection_report(const EigenDecomposition& ed,
                                const Detection& detection,
                                const DetectorConfig& cfg);
nlohmann::json rolling_report(std::span<const WindowDetection> windows,
                              std::size_t window, std::size_t step,
                              const DetectorConfig& cfg);

/// `group_id,ticker,pc_rank,loading,eigenvalue`
void write_detection_csv(std::ostream& out, const Detection& detection);
/// `window_start,group_id,ticker,pc_rank,loading,eigenvalue`
void write_rolling_csv(std::ostream& out,
                       std::span<const WindowDetection> windows);

}  // namespace tailpca
