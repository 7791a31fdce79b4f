#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bhlr/experiments.hpp"

namespace bhlr::cli {

// Exact CSV header of scan tables.
extern const char* const kCsvHeader;

// Strict reader: unknown keys and type mismatches raise ConfigError naming the
// field path (e.g. "lightcone.distances[2]").
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

// Throws std::invalid_argument on an empty record list. Floats use %.17g;
// absent optional fields are left empty.
void emit_csv(const std::vector<ScanRecord>& records, const std::string& path);
std::vector<ScanRecord> read_csv(const std::string& path);
// Keys keep insertion order; floats are written in shortest round-trip form.
void emit_json(const nlohmann::ordered_json& j, const std::string& path);

// Entry point behind the bhlr binary. Returns 0 when every check passes, 1 on
// any FAIL, 2 on configuration or usage errors.
int run(int argc, char** argv);

}  // namespace bhlr::cli
