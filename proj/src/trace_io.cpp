#include "ramsey/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

namespace ramsey {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw CsvError("cannot format number");
  return std::string(buf, ptr);
}

double parse_number(std::string_view text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw CsvError("not a number: '" + std::string(text) + "'");
  return value;
}

namespace {

std::int64_t parse_int(std::string_view text) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw CsvError("not an integer: '" + std::string(text) + "'");
  return value;
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    fields.emplace_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

std::string join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += fields[i];
  }
  return line;
}

void expect_header(const CsvTable& table, std::string_view header) {
  if (join(table.header) != header) throw CsvError("unexpected header: " + join(table.header));
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw CsvError("missing column '" + std::string(name) + "'");
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw CsvError("empty table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != table.header.size())
      throw CsvError("line " + std::to_string(line_no) + ": expected " +
                     std::to_string(table.header.size()) + " fields, got " + std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void write_csv(std::ostream& out, const CsvTable& table) {
  out << join(table.header) << '\n';
  for (const auto& row : table.rows) out << join(row) << '\n';
}

std::vector<TraceRow> trace_rows(const RunTrace& trace) {
  std::vector<TraceRow> rows;
  rows.reserve(trace.epochs.size());
  for (const auto& r : trace.epochs) {
    TraceRow row;
    row.run_id = trace.run_id;
    row.epoch = r.epoch;
    row.protocol = std::string(to_string(trace.protocol));
    row.tau_us = r.setting.tau_us();
    row.m_s = r.m_s;
    row.n_s = r.n_s;
    row.n_b_win = r.n_b_window;
    row.m_b_win = r.m_b_window;
    row.cum_sequences = r.cumulative_sequences;
    row.t_lab_s = std::chrono::duration<double>(r.t_lab).count();
    row.t_calc_s = r.t_calc_s;
    row.posterior = r.posterior;
    const auto s = sensitivity(r.posterior[static_cast<int>(Param::omega0)].sigma, row.t_lab_s);
    row.sigma_b_t = s.sigma_b_t;
    row.eta2_t2s = s.eta2;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_trace_csv(std::ostream& out, std::span<const RunTrace> traces) {
  out << kTraceHeader << '\n';
  constexpr std::array<Param, 4> column_order{Param::omega0, Param::a, Param::c, Param::t2};
  for (const auto& trace : traces) {
    for (const auto& row : trace_rows(trace)) {
      out << row.run_id << ',' << row.epoch << ',' << row.protocol << ',' << format_number(row.tau_us)
          << ',' << row.m_s << ',' << row.n_s << ',' << row.n_b_win << ',' << row.m_b_win << ','
          << row.cum_sequences << ',' << format_number(row.t_lab_s) << ',' << format_number(row.t_calc_s);
      for (Param p : column_order) {
        const auto& m = row.posterior[static_cast<int>(p)];
        out << ',' << format_number(m.mean) << ',' << format_number(m.sigma);
      }
      out << ',' << format_number(row.sigma_b_t) << ',' << format_number(row.eta2_t2s) << '\n';
    }
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  expect_header(table, kTraceHeader);
  constexpr std::array<Param, 4> column_order{Param::omega0, Param::a, Param::c, Param::t2};
  std::vector<TraceRow> rows;
  for (const auto& f : table.rows) {
    TraceRow row;
    row.run_id = static_cast<std::size_t>(parse_int(f[0]));
    row.epoch = static_cast<std::size_t>(parse_int(f[1]));
    row.protocol = f[2];
    row.tau_us = parse_number(f[3]);
    row.m_s = parse_int(f[4]);
    row.n_s = parse_int(f[5]);
    row.n_b_win = parse_int(f[6]);
    row.m_b_win = parse_int(f[7]);
    row.cum_sequences = parse_int(f[8]);
    row.t_lab_s = parse_number(f[9]);
    row.t_calc_s = parse_number(f[10]);
    for (std::size_t i = 0; i < column_order.size(); ++i) {
      auto& m = row.posterior[static_cast<int>(column_order[i])];
      m.mean = parse_number(f[11 + 2 * i]);
      m.sigma = parse_number(f[12 + 2 * i]);
    }
    row.sigma_b_t = parse_number(f[19]);
    row.eta2_t2s = parse_number(f[20]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_batch_csv(std::ostream& out, const BatchSummary& summary) {
  out << kBatchHeader << '\n';
  auto emit = [&](std::string_view axis, const std::vector<BatchPoint>& points) {
    for (const auto& p : points) {
      out << axis << ',' << format_number(p.x) << ',' << format_number(p.mean_sigma) << ','
          << format_number(p.p05_sigma) << ',' << format_number(p.p95_sigma) << ','
          << format_number(p.error_std) << ',' << format_number(p.mean_eta2) << '\n';
    }
  };
  emit("sequences", summary.by_sequences);
  emit("lab_time_s", summary.by_lab_time);
}

std::vector<BatchRow> read_batch_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  expect_header(table, kBatchHeader);
  std::vector<BatchRow> rows;
  for (const auto& f : table.rows) {
    if (f[0] != "sequences" && f[0] != "lab_time_s") throw CsvError("unknown batch axis '" + f[0] + "'");
    BatchRow row;
    row.axis = f[0];
    row.point = {parse_number(f[1]), parse_number(f[2]), parse_number(f[3]),
                 parse_number(f[4]), parse_number(f[5]), parse_number(f[6])};
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_cloud_csv(std::ostream& out, const ParticleCloud& cloud) {
  for (const auto& u : cloud.unknowns()) out << to_string(u.param) << ',';
  out << "weight\n";
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    for (std::size_t u = 0; u < cloud.unknowns().size(); ++u) out << format_number(cloud.coordinate(u)[j]) << ',';
    out << format_number(cloud.weights()[j]) << '\n';
  }
}

CloudSnapshot read_cloud_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  if (table.header.empty() || table.header.back() != "weight") throw CsvError("cloud table needs a weight column");
  CloudSnapshot snap;
  for (std::size_t i = 0; i + 1 < table.header.size(); ++i) {
    bool found = false;
    for (Param p : kAllParams) {
      if (table.header[i] == to_string(p)) {
        snap.unknowns.push_back(p);
        found = true;
      }
    }
    if (!found) throw CsvError("unknown cloud column '" + table.header[i] + "'");
  }
  snap.coordinates.resize(snap.unknowns.size());
  for (const auto& f : table.rows) {
    for (std::size_t i = 0; i < snap.unknowns.size(); ++i) snap.coordinates[i].push_back(parse_number(f[i]));
    snap.weights.push_back(parse_number(f.back()));
  }
  return snap;
}

void write_utility_csv(std::ostream& out, const RunTrace& trace, const SettingGrid& grid) {
  out << "epoch,tau_us,utility\n";
  for (std::size_t e = 0; e < trace.utilities.size(); ++e) {
    const auto& u = trace.utilities[e].utility;
    for (std::size_t k = 0; k < u.size(); ++k)
      out << e << ',' << format_number(grid.tau_us(k)) << ',' << format_number(u[k]) << '\n';
  }
}

}  // namespace ramsey
