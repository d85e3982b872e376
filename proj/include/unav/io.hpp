#pragma once

#include <string>
#include <vector>

#include "unav/sim.hpp"

namespace unav {

// Instance document: {"map": <path>, "seed": <u32>, "starts": [[x,y],...],
// "goals": [[x,y],...]}. Relative map paths are resolved against the
// instance file's directory on load.
ScenarioInstance load_instance(const std::string& path);
void save_instance(const ScenarioInstance& instance, const std::string& path);

// Config document mirroring RunConfig; every field optional, absent fields
// keep the values already present in `base`.
RunConfig load_config(const std::string& path, const RunConfig& base);
RunConfig config_from_json_text(const std::string& text, const RunConfig& base);

std::string result_to_json(const RunResult& result);
void save_result(const RunResult& result, const std::string& path);

// Header `t,agent,x,y,goal,status`, one row per agent per recorded step.
void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

// Resolves `path` relative to the directory containing `reference_file`
// unless `path` is absolute.
std::string resolve_relative(const std::string& path, const std::string& reference_file);

}  // namespace unav
