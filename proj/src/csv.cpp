#include "robustq/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace robustq {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

namespace {

std::string error_field(const TraceRecord& row) {
  return row.error ? format_double(*row.error) : std::string();
}

}  // namespace

void write_drql_trace_csv(std::ostream& out, const std::vector<TraceRecord>& rows) {
  out << "trajectory,iter,samples,error\n";
  for (const auto& r : rows) {
    out << r.trajectory << ',' << r.iteration << ',' << r.samples << ',' << error_field(r) << '\n';
  }
}

void write_vrql_trace_csv(std::ostream& out, const std::vector<TraceRecord>& rows) {
  out << "trajectory,epoch,inner_iter,samples,error\n";
  for (const auto& r : rows) {
    out << r.trajectory << ',' << r.epoch << ',' << r.inner_iter << ',' << r.samples << ','
        << error_field(r) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& rows,
                     Algorithm algorithm) {
  if (is_variance_reduced(algorithm)) {
    write_vrql_trace_csv(out, rows);
  } else {
    write_drql_trace_csv(out, rows);
  }
}

void write_bias_variance_csv(std::ostream& out, const BiasVarianceTable& table) {
  out << "n,cell_s,cell_a,bias,var,stderr_bias,stderr_var\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.bias.size(); ++c) {
      out << row.n << ',' << c / table.n_actions << ',' << c % table.n_actions << ','
          << format_double(row.bias[c]) << ',' << format_double(row.variance[c]) << ','
          << format_double(row.stderr_bias[c]) << ',' << format_double(row.stderr_variance[c])
          << '\n';
    }
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<HorizonSweepRow>& rows) {
  out << "gamma,horizon,eps,mean_samples,trajectories\n";
  for (const auto& r : rows) {
    out << format_double(r.gamma) << ',' << format_double(r.horizon) << ','
        << format_double(r.eps) << ',' << format_double(r.mean_samples) << ',' << r.trajectories
        << '\n';
  }
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size()) {
        throw std::runtime_error("read_csv: row has " + std::to_string(fields.size()) +
                                 " fields, header has " + std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

}  // namespace robustq
