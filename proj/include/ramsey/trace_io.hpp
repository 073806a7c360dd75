#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ramsey/batch.hpp"
#include "ramsey/particles.hpp"
#include "ramsey/runner.hpp"

namespace ramsey {

// Shortest round-trip decimal form; "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double value);
double parse_number(std::string_view text);

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Comma-separated table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);
void write_csv(std::ostream& out, const CsvTable& table);

// One exported trace row.
struct TraceRow {
  std::size_t run_id = 0;
  std::size_t epoch = 0;
  std::string protocol;
  double tau_us = 0.0;
  std::int64_t m_s = 0;
  std::int64_t n_s = 0;
  std::int64_t n_b_win = 0;
  std::int64_t m_b_win = 0;
  std::int64_t cum_sequences = 0;
  double t_lab_s = 0.0;
  double t_calc_s = 0.0;
  std::array<Moments, 4> posterior{};  // indexed by Param
  double sigma_b_t = 0.0;
  double eta2_t2s = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

inline constexpr std::string_view kTraceHeader =
    "run_id,epoch,protocol,tau_us,m_s,n_s,n_b_win,m_b_win,cum_sequences,t_lab_s,t_calc_s,"
    "omega_mean,omega_sigma,a_mean,a_sigma,c_mean,c_sigma,t2_mean,t2_sigma,sigma_B_T,eta2_T2s";

std::vector<TraceRow> trace_rows(const RunTrace& trace);
void write_trace_csv(std::ostream& out, std::span<const RunTrace> traces);
std::vector<TraceRow> read_trace_csv(std::istream& in);

inline constexpr std::string_view kBatchHeader =
    "axis,x,mean_sigma,p05_sigma,p95_sigma,error_std,mean_eta2";

struct BatchRow {
  std::string axis;  // "sequences" or "lab_time_s"
  BatchPoint point;
};

void write_batch_csv(std::ostream& out, const BatchSummary& summary);
std::vector<BatchRow> read_batch_csv(std::istream& in);

// One particle per row: the unknown coordinates then the weight.
void write_cloud_csv(std::ostream& out, const ParticleCloud& cloud);

struct CloudSnapshot {
  std::vector<Param> unknowns;
  std::vector<std::vector<double>> coordinates;  // per unknown
  std::vector<double> weights;
};

CloudSnapshot read_cloud_csv(std::istream& in);

// Rows of (epoch, tau_us, utility).
void write_utility_csv(std::ostream& out, const RunTrace& trace, const SettingGrid& grid);

}  // namespace ramsey
