#include "kanppo/metrics.hpp"

#include <charconv>
#include <sstream>

#include "kanppo/errors.hpp"

namespace kanppo {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
  std::string out = kMetricsHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.env_step);
    for (double v : {r.mean_return, r.l_clip, r.l_vf, r.entropy, r.approx_kl,
                     r.clip_fraction, r.wall_seconds}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("metrics CSV: bad numeric field '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<MetricsRow> metrics_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("metrics CSV: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) {
    throw ConfigError("metrics CSV: unexpected header '" + line + "'");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 9) throw ConfigError("metrics CSV: expected 9 fields per row");
    MetricsRow r;
    r.seed = static_cast<std::uint64_t>(std::stoull(f[0]));
    r.env_step = std::stoll(f[1]);
    r.mean_return = parse_double(f[2]);
    r.l_clip = parse_double(f[3]);
    r.l_vf = parse_double(f[4]);
    r.entropy = parse_double(f[5]);
    r.approx_kl = parse_double(f[6]);
    r.clip_fraction = parse_double(f[7]);
    r.wall_seconds = parse_double(f[8]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace kanppo
