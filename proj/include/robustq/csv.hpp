#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "robustq/bench.hpp"
#include "robustq/diagnostics.hpp"

namespace robustq {

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

/// trajectory,iter,samples,error
void write_drql_trace_csv(std::ostream& out, const std::vector<TraceRecord>& rows);
/// trajectory,epoch,inner_iter,samples,error
void write_vrql_trace_csv(std::ostream& out, const std::vector<TraceRecord>& rows);
/// Picks the schema matching the algorithm family.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& rows,
                     Algorithm algorithm);
/// n,cell_s,cell_a,bias,var,stderr_bias,stderr_var
void write_bias_variance_csv(std::ostream& out, const BiasVarianceTable& table);
/// gamma,horizon,eps,mean_samples,trajectories
void write_sweep_csv(std::ostream& out, const std::vector<HorizonSweepRow>& rows);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Plain comma-separated reader (no quoting).
CsvTable read_csv(std::istream& in);

}  // namespace robustq
