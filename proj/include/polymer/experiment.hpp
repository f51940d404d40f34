#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace polymer {

inline constexpr const char* kArtifactVersion = "polymer/0.1.0";

// Key-value experiment configuration: TOML-style `key = value` lines plus
// command-line overrides. Seeds are mandatory everywhere; there is no
// wall-clock default.
struct ExperimentConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double dflt) const;
  int get_int(const std::string& key) const;
  int get_int_or(const std::string& key, int dflt) const;
  uint64_t get_u64(const std::string& key) const;
  bool get_bool_or(const std::string& key, bool dflt) const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
// "key=value" override
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

struct Verdict {
  std::string name;
  bool pass;
  std::string detail;
};

struct RunRecord {
  nlohmann::json config_echo;
  std::string artifact_version;
  double wall_ms = 0;
  nlohmann::json results;
  std::vector<Verdict> verdicts;
  std::string csv;  // plot-ready rows (x,y,stderr,series); empty when n/a

  bool all_pass() const;
};

nlohmann::json run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

// validates the config (listing every violated field) and dispatches on kind
RunRecord run_experiment(const ExperimentConfig& cfg);

// independent runs with seeds derived from the base seed; parallelised
// across runs (POLYMER_WORKERS bounds the thread count)
std::vector<RunRecord> sweep_experiment(const ExperimentConfig& base, const std::string& axis,
                                        const std::vector<std::string>& values);

// consolidated plot data for a sweep
std::string sweep_csv(const std::vector<RunRecord>& records, const std::string& axis,
                      const std::vector<std::string>& values);

// temp-file-then-rename write
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::vector<std::string> split_list(const std::string& csv_list);

}  // namespace polymer
