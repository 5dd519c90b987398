#pragma once

#include "nmpc/mpc_loop.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace nmpc::tools {

/// `step,time,x1..xn,u1..um,stage_cost,event,m_n,alpha_local,warning,update_j`
std::string trace_header(int state_dim, int control_dim);

/// One row per applied control, doubles printed with 17 significant digits.
std::string trace_csv(const ExecutionLog& log);

/// Totals recoverable from a trace; also computable straight from a log.
struct TraceTotals {
    int rows = 0;
    double closed_loop_cost = 0.0;
    std::vector<int> schedule;         ///< block starts
    std::vector<int> block_lengths;    ///< m_n per block
    std::vector<int> update_instants;  ///< block starts plus splice instants
    int violations = 0;
    int warnings = 0;
    int splices = 0;

    friend bool operator==(const TraceTotals&, const TraceTotals&) = default;
};

TraceTotals read_trace_csv(std::istream& in);
TraceTotals trace_totals(const ExecutionLog& log);

/// Writes to `path + ".tmp"` and renames over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace nmpc::tools
