#include "nmpc_tools/trace_csv.hpp"

#include "nmpc_tools/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace nmpc::tools {

namespace {

std::string real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

struct RowAnnotation {
    bool event = false;
    int m = 0;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    int warning = 0;
    int update_j = 0;
};

}  // namespace

std::string trace_header(int state_dim, int control_dim) {
    std::string h = "step,time";
    for (int i = 1; i <= state_dim; ++i) h += ",x" + std::to_string(i);
    for (int i = 1; i <= control_dim; ++i) h += ",u" + std::to_string(i);
    h += ",stage_cost,event,m_n,alpha_local,warning,update_j";
    return h;
}

std::string trace_csv(const ExecutionLog& log) {
    const int nx = static_cast<int>(log.equilibrium_state.size());
    const int nu = log.steps.empty() ? 1 : static_cast<int>(log.steps.front().control.size());

    std::map<int, RowAnnotation> notes;
    for (const EventRecord& ev : log.events) {
        RowAnnotation& head = notes[ev.start];
        head.event = true;
        head.m = ev.m;
        head.alpha = ev.certified_alpha;
        head.warning = ev.warning ? 2 : (ev.violation ? 1 : 0);
        for (const UpdateAttempt& u : ev.updates) {
            if (!u.applied) continue;
            RowAnnotation& row = notes[ev.start + u.j];
            row.update_j = u.j;
            row.alpha = u.check.alpha_local;
        }
    }

    std::string out = trace_header(nx, nu) + "\n";
    for (const StepRecord& row : log.steps) {
        const RowAnnotation note = notes.count(row.step) ? notes.at(row.step) : RowAnnotation{};
        out += std::to_string(row.step);
        out += "," + real(row.step * log.sampling_period);
        for (Eigen::Index i = 0; i < row.state.size(); ++i) out += "," + real(row.state[i]);
        for (Eigen::Index i = 0; i < row.control.size(); ++i) out += "," + real(row.control[i]);
        out += "," + real(row.stage_cost);
        out += note.event ? ",1" : ",0";
        out += "," + std::to_string(note.m);
        out += "," + real(note.alpha);
        out += "," + std::to_string(note.warning);
        out += "," + std::to_string(note.update_j);
        out += "\n";
    }
    return out;
}

TraceTotals read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trace is empty");
    const std::vector<std::string> header = split(line);
    if (header.size() < 9 || header[0] != "step" || header[1] != "time" || header.back() != "update_j") {
        throw std::runtime_error("not a trace CSV (unexpected header)");
    }
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* name : {"stage_cost", "event", "m_n", "warning"}) {
        if (!col.count(name)) throw std::runtime_error(std::string("trace lacks column ") + name);
    }

    TraceTotals t;
    std::set<int> instants;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = split(line);
        if (cells.size() != header.size()) throw std::runtime_error("ragged trace row: " + line);
        const int step = std::stoi(cells[0]);
        ++t.rows;
        t.closed_loop_cost += std::strtod(cells[col["stage_cost"]].c_str(), nullptr);
        if (cells[col["event"]] == "1") {
            t.schedule.push_back(step);
            t.block_lengths.push_back(std::stoi(cells[col["m_n"]]));
            instants.insert(step);
            const int code = std::stoi(cells[col["warning"]]);
            if (code >= 1) ++t.violations;
            if (code == 2) ++t.warnings;
        }
        if (std::stoi(cells[col["update_j"]]) > 0) {
            ++t.splices;
            instants.insert(step);
        }
    }
    t.update_instants.assign(instants.begin(), instants.end());
    return t;
}

TraceTotals trace_totals(const ExecutionLog& log) {
    TraceTotals t;
    t.rows = static_cast<int>(log.steps.size());
    t.closed_loop_cost = closed_loop_cost(log);
    for (const EventRecord& ev : log.events) {
        t.schedule.push_back(ev.start);
        t.block_lengths.push_back(ev.m);
        if (ev.violation || ev.warning) ++t.violations;
        if (ev.warning) ++t.warnings;
    }
    t.splices = log.splice_count();
    t.update_instants = log.update_instants();
    // the trailing schedule entry marks the end of the last block, which has no row
    if (!log.events.empty()) {
        const int end = log.schedule.back();
        std::erase(t.update_instants, end);
    }
    return t;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

}  // namespace nmpc::tools
