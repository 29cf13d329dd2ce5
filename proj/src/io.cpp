#include "zpd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <optional>

#include <fmt/format.h>

#include <json.hpp>
#include "zpd/error.hpp"

namespace zpd::io {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  out.push_back(field);
  return out;
}

double parse_double(const std::string& text, std::size_t line_no, const std::string& column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
    fail(ErrorKind::parse, fmt::format("line {}: bad number '{}' in column {}", line_no, text, column));
  return v;
}

std::optional<double> parse_optional(const std::string& text, std::size_t line_no, const std::string& column) {
  if (text.empty()) return std::nullopt;
  return parse_double(text, line_no, column);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, fmt::format("cannot open '{}'", path));
  return in;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

}  // namespace

std::string num(double v) { return fmt::format("{:.10g}", v); }

std::vector<RolloutRecord> read_rollouts(std::istream& in) {
  std::vector<RolloutRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    RolloutRecord rec;
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw std::invalid_argument("expected an object");
      if (!j.contains("problem_id") || !j["problem_id"].is_string())
        throw std::invalid_argument("missing string field problem_id");
      if (!j.contains("outcomes") || !j["outcomes"].is_array())
        throw std::invalid_argument("missing array field outcomes");
      rec.problem_id = j["problem_id"].get<std::string>();
      for (const auto& o : j["outcomes"]) {
        if (!o.is_boolean()) throw std::invalid_argument("outcomes must be booleans");
        rec.outcomes.push_back(o.get<bool>());
      }
      rec.validate();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::parse, fmt::format("line {}: {}", line_no, e.what()));
    } catch (const std::exception& e) {
      fail(ErrorKind::parse, fmt::format("line {}: {}", line_no, e.what()));
    }
    if (!seen.insert(rec.problem_id).second)
      fail(ErrorKind::parse, fmt::format("line {}: duplicate problem_id '{}'", line_no, rec.problem_id));
    out.push_back(std::move(rec));
  }
  if (out.empty()) fail(ErrorKind::insufficient_data, "no records");
  return out;
}

std::vector<RolloutRecord> load_rollouts(const std::string& path) {
  auto in = open_input(path);
  return read_rollouts(in);
}

void write_rollouts(std::ostream& out, std::span<const RolloutRecord> records) {
  for (const auto& r : records) {
    nlohmann::json j;
    j["problem_id"] = r.problem_id;
    j["outcomes"] = nlohmann::json::array();
    for (bool b : r.outcomes) j["outcomes"].push_back(b);
    out << j.dump() << '\n';
  }
}

std::vector<GradientRecord> read_gradients(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(ErrorKind::insufficient_data, "empty gradient file");
  ++line_no;
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "problem_id" || header[1] != "pass_rate")
    fail(ErrorKind::parse, "line 1: expected header problem_id,pass_rate,g0,...");
  const std::size_t dim = header.size() - 2;
  std::vector<GradientRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size())
      fail(ErrorKind::parse, fmt::format("line {}: expected {} fields, got {}", line_no, header.size(), fields.size()));
    GradientRecord rec;
    rec.problem_id = fields[0];
    rec.pass_rate = parse_double(fields[1], line_no, "pass_rate");
    if (rec.pass_rate < 0.0 || rec.pass_rate > 1.0)
      fail(ErrorKind::parse, fmt::format("line {}: pass_rate {} outside [0, 1]", line_no, fields[1]));
    rec.gradient.reserve(dim);
    for (std::size_t d = 0; d < dim; ++d) rec.gradient.push_back(parse_double(fields[d + 2], line_no, header[d + 2]));
    out.push_back(std::move(rec));
  }
  if (out.empty()) fail(ErrorKind::insufficient_data, "no gradient records");
  return out;
}

std::vector<GradientRecord> load_gradients(const std::string& path) {
  auto in = open_input(path);
  return read_gradients(in);
}

void write_gradients(std::ostream& out, std::span<const GradientRecord> records) {
  const std::size_t dim = records.empty() ? 0 : records.front().gradient.size();
  out << "problem_id,pass_rate";
  for (std::size_t d = 0; d < dim; ++d) out << ",g" << d;
  out << '\n';
  for (const auto& r : records) {
    require(r.problem_id.find(',') == std::string::npos, ErrorKind::domain,
            fmt::format("problem_id '{}' contains a comma", r.problem_id));
    require(r.gradient.size() == dim, ErrorKind::domain, "gradients differ in dimension");
    out << r.problem_id << ',' << num(r.pass_rate);
    for (double g : r.gradient) out << ',' << num(g);
    out << '\n';
  }
}

void write_profile(std::ostream& out, const SnrProfile& profile) {
  out << "bin_lo,bin_hi,mean_p,count,snr,snr_norm,theory_norm\n";
  for (const auto& b : profile.bins) {
    out << fmt::format("{},{},{},{},{},{},{}\n", num(b.lo), num(b.hi), opt(b.mean_p), b.count, opt(b.snr),
                       opt(b.snr_norm), opt(b.theory_norm));
  }
}

SnrProfile read_profile(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(ErrorKind::insufficient_data, "empty profile file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "bin_lo,bin_hi,mean_p,count,snr,snr_norm,theory_norm")
    fail(ErrorKind::parse, "line 1: expected header bin_lo,bin_hi,mean_p,count,snr,snr_norm,theory_norm");
  SnrProfile profile;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv(line);
    if (f.size() != 7) fail(ErrorKind::parse, fmt::format("line {}: expected 7 fields, got {}", line_no, f.size()));
    SnrBin b;
    b.lo = parse_double(f[0], line_no, "bin_lo");
    b.hi = parse_double(f[1], line_no, "bin_hi");
    b.mean_p = parse_optional(f[2], line_no, "mean_p");
    const double count = parse_double(f[3], line_no, "count");
    if (count < 0 || count != std::floor(count))
      fail(ErrorKind::parse, fmt::format("line {}: count must be a nonnegative integer", line_no));
    b.count = static_cast<std::size_t>(count);
    b.snr = parse_optional(f[4], line_no, "snr");
    b.snr_norm = parse_optional(f[5], line_no, "snr_norm");
    b.theory_norm = parse_optional(f[6], line_no, "theory_norm");
    b.degenerate = b.count > 0 && !b.snr;
    profile.bins.push_back(b);
  }
  if (profile.bins.empty()) fail(ErrorKind::insufficient_data, "no profile rows");
  return profile;
}

SnrProfile load_profile(const std::string& path) {
  auto in = open_input(path);
  return read_profile(in);
}

std::vector<SnrPoint> profile_points(const SnrProfile& profile) {
  std::vector<SnrPoint> out;
  for (const auto& b : profile.bins)
    if (b.mean_p && b.snr) out.push_back({*b.mean_p, *b.snr * *b.snr});
  return out;
}

void write_metrics(std::ostream& out, const sim::SimMetrics& metrics) {
  out << "step,stage,mean_p,low,med,high,retention,loss,weights_version\n";
  for (const auto& c : metrics.checkpoints) {
    const auto& fr = c.histogram.fractions;
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", c.step, c.stage, num(c.mean_p), num(fr.at(0)), num(fr.at(1)),
                       num(fr.at(2)), num(c.retention), num(c.loss), c.weights_version);
  }
}

}  // namespace zpd::io
