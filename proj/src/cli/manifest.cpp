#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "wqst/cli.hpp"
#include "wqst/error.hpp"
#include "wqst/version.hpp"

namespace wqst::cli {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot hash " + path.string());
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= kFnvPrime;
    }
  }
  return h;
}

void write_manifest(const RunConfig& cfg, const std::string& stage,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs) {
  nlohmann::ordered_json j;
  j["stage"] = stage;
  j["version"] = kVersion;
  j["timestamp"] = utc_now();
  j["seed"] = static_cast<std::uint64_t>(cfg.get_int("seed"));
  j["config"] = cfg.values();
  auto hashes = [](const std::vector<std::filesystem::path>& files) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& f : files) {
      nlohmann::ordered_json e;
      e["path"] = f.string();
      e["fnv1a64"] = std::filesystem::exists(f) ? hex64(fnv1a64_file(f)) : "missing";
      a.push_back(std::move(e));
    }
    return a;
  };
  j["inputs"] = hashes(inputs);
  j["outputs"] = hashes(outputs);
  const auto dir = cfg.output_dir() / "manifests";
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / (stage + ".json"), std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write manifest for " + stage);
  out << j.dump(2) << '\n';
}

}  // namespace wqst::cli
