#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kanppo {

/// One training-iteration record. Serialized column order is fixed by
/// kMetricsHeader and is a stable contract for plot-data and tests.
struct MetricsRow {
  std::uint64_t seed = 0;
  long long env_step = 0;
  double mean_return = 0.0;  // mean over the last 10 completed episodes
  double l_clip = 0.0;
  double l_vf = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double wall_seconds = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "seed,env_step,mean_return,l_clip,l_vf,entropy,approx_kl,clip_fraction,wall_seconds";

/// Shortest round-trip decimal rendering (std::to_chars), so identical runs
/// produce identical bytes.
std::string format_double(double v);

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);

/// Parses a CSV produced by metrics_to_csv; throws ConfigError on a bad
/// header or malformed row.
std::vector<MetricsRow> metrics_from_csv(const std::string& text);

}  // namespace kanppo
