#include "swarm_edge/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <string>

#include <json.hpp>

#include "swarm_edge/errors.hpp"

namespace swarm_edge {
namespace {

std::string fmt_real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
T parse_field(std::string_view field, std::size_t line, const char* name) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(std::string("invalid ") + name + " '" + std::string(field) + "'", line);
  }
  return value;
}

nlohmann::ordered_json real_or_null(double x) {
  return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
}

}  // namespace

double weight_divergence(std::span<const ParamVec> workers) {
  if (workers.empty()) throw ConfigError("weight_divergence needs at least one vector");
  const ParamVec mean = mean_of(workers);
  const double denom = std::max(norm2(mean), 1e-12);
  double acc = 0.0;
  for (const auto& w : workers) acc += std::sqrt(squared_distance(w, mean)) / denom;
  return acc / static_cast<double>(workers.size());
}

double fit_rate(std::span<const std::pair<double, double>> errors, double t_lo,
                double t_hi) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, e] : errors) {
    if (t < t_lo || t > t_hi) continue;
    if (!(t > 0.0)) throw ConfigError("fit_rate: rounds must be positive");
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw ConfigError("fit_rate: non-positive error at t=" + fmt_real(t));
    }
    pts.emplace_back(std::log(t), std::log(e));
  }
  if (pts.size() < 10) throw ConfigError("fit_rate: fewer than 10 points in range");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (sxx == 0.0) throw ConfigError("fit_rate: degenerate round range");
  return sxy / sxx;
}

SummaryReport summarize(const MetricsTable& table, double target_accuracy) {
  SummaryReport report;
  for (Algo algo : {Algo::kDsl, Algo::kFl, Algo::kPso}) {
    // rep -> rows in round order
    std::map<int, std::vector<const MetricsRow*>> by_rep;
    for (const auto& row : table) {
      if (row.algo == algo) by_rep[row.rep].push_back(&row);
    }
    if (by_rep.empty()) continue;
    AlgoSummary s;
    s.algo = algo;
    const double reps = static_cast<double>(by_rep.size());

    std::vector<double> finals;
    std::map<int, std::pair<double, double>> curve;  // round -> (sum loss, sum acc)
    std::map<int, int> counts;
    for (auto& [rep, rows] : by_rep) {
      std::sort(rows.begin(), rows.end(),
                [](const MetricsRow* a, const MetricsRow* b) { return a->round < b->round; });
      const MetricsRow& last = *rows.back();
      finals.push_back(last.test_acc);
      s.scalar_reports += static_cast<double>(last.scalar_reports) / reps;
      s.vector_uses += static_cast<double>(last.vector_uses) / reps;
      s.energy += last.energy / reps;
      for (const MetricsRow* r : rows) {
        curve[r->round].first += r->train_loss;
        curve[r->round].second += r->test_acc;
        counts[r->round] += 1;
      }
    }
    double mean = 0.0;
    for (double f : finals) mean += f;
    mean /= static_cast<double>(finals.size());
    double var = 0.0;
    for (double f : finals) var += (f - mean) * (f - mean);
    s.final_acc_mean = mean;
    s.final_acc_std = finals.size() > 1 ? std::sqrt(var / static_cast<double>(finals.size() - 1)) : 0.0;
    if (std::isnan(mean)) s.final_acc_std = std::numeric_limits<double>::quiet_NaN();

    std::vector<std::pair<double, double>> loss_curve;
    for (const auto& [round, sums] : curve) {
      const double n = counts[round];
      loss_curve.emplace_back(round, sums.first / n);
      if (!s.rounds_to_target && sums.second / n >= target_accuracy) {
        s.rounds_to_target = round;
      }
    }
    try {
      s.slope = fit_rate(loss_curve, 10.0, std::numeric_limits<double>::infinity());
    } catch (const ConfigError&) {
      s.slope = std::numeric_limits<double>::quiet_NaN();
    }
    report.algos.push_back(s);
  }
  return report;
}

void write_metrics_csv(const MetricsTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write metrics file: " + path.string());
  out << kMetricsHeader << '\n';
  for (const auto& r : table) {
    out << r.round << ',' << to_string(r.algo) << ',' << r.rep << ','
        << fmt_real(r.train_loss) << ',' << fmt_real(r.test_acc) << ','
        << fmt_real(r.best_score) << ',' << fmt_real(r.weight_div) << ','
        << r.scalar_reports << ',' << r.vector_uses << ',' << fmt_real(r.energy) << ','
        << r.blacklist << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

MetricsTable read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics file: " + path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw ParseError("unexpected metrics header", line_no);
  }
  MetricsTable table;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 11) throw ParseError("expected 11 columns", line_no);
    MetricsRow r;
    r.round = parse_field<int>(f[0], line_no, "round");
    try {
      r.algo = parse_algo(f[1]);
    } catch (const ConfigError&) {
      throw ParseError("invalid algo '" + std::string(f[1]) + "'", line_no);
    }
    r.rep = parse_field<int>(f[2], line_no, "rep");
    r.train_loss = parse_field<double>(f[3], line_no, "train_loss");
    r.test_acc = parse_field<double>(f[4], line_no, "test_acc");
    r.best_score = parse_field<double>(f[5], line_no, "best_score");
    r.weight_div = parse_field<double>(f[6], line_no, "weight_div");
    r.scalar_reports = parse_field<std::uint64_t>(f[7], line_no, "scalar_reports");
    r.vector_uses = parse_field<std::uint64_t>(f[8], line_no, "vector_uses");
    r.energy = parse_field<double>(f[9], line_no, "energy");
    r.blacklist = parse_field<std::uint64_t>(f[10], line_no, "blacklist");
    table.push_back(r);
  }
  return table;
}

void write_summary_json(const SummaryReport& report, const std::filesystem::path& path) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& s : report.algos) {
    nlohmann::ordered_json entry;
    entry["final_acc_mean"] = real_or_null(s.final_acc_mean);
    entry["final_acc_std"] = real_or_null(s.final_acc_std);
    entry["slope"] = real_or_null(s.slope);
    entry["rounds_to_target"] = s.rounds_to_target
                                    ? nlohmann::ordered_json(*s.rounds_to_target)
                                    : nlohmann::ordered_json(nullptr);
    entry["scalar_reports"] = s.scalar_reports;
    entry["vector_uses"] = s.vector_uses;
    entry["energy"] = s.energy;
    doc[std::string(to_string(s.algo))] = std::move(entry);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write summary file: " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace swarm_edge
