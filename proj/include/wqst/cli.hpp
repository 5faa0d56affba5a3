#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace wqst::cli {

// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitConfig = 2,
  kExitStageInput = 3,
  kExitModule = 4,
};

// Flat key=value configuration. Known keys start from their defaults;
// `hp.<model>.<name>`, `grid.<model>.<name>` and `synth.<field>` are open
// families validated where they are used.
class RunConfig {
 public:
  RunConfig();

  // Lines "key = value"; '#' starts a comment. Throws ConfigError.
  void load_file(const std::filesystem::path& path);
  // "key=value". Throws ConfigError.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  // Comma-separated list, trimmed, empty items dropped.
  std::vector<std::string> get_list(const std::string& key) const;
  // Keys with the given prefix, prefix stripped.
  std::map<std::string, std::string> with_prefix(const std::string& prefix) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  std::filesystem::path output_dir() const { return get("output_dir"); }
  // Configured path for `key`, or the synth-stage file of that role when unset.
  std::filesystem::path input_path(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

// manifests/<stage>.json: version, UTC timestamp, seed, resolved config and
// FNV-1a hashes of every input and output file.
void write_manifest(const RunConfig& cfg, const std::string& stage,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs);

// Full command line entry point; returns the process exit status.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace wqst::cli
