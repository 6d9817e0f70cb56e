#pragma once

// Batch front end. Method strings name a backend and optional overrides:
//
//   [dehret:|retdeh:]name[,key=value]*      e.g.  dehret:rsr,n=75,sprays=20
//
// Every run writes a key=value manifest next to its output that is enough to
// replay it bit for bit (`rdh replay <manifest>`).

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdh/duality.hpp"

namespace rdh::cli {

enum ExitCode : int { kOk = 0, kNumeric = 1, kIo = 2, kUsage = 64 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Composition { none, dehret, retdeh };

struct MethodSpec {
  Composition composition = Composition::none;
  std::string name;
  std::map<std::string, std::string> params;  ///< fully resolved, defaults included

  /// Canonical string with every parameter spelled out, sorted by key.
  std::string canonical() const;
};

/// Parses and validates a method string, filling in defaults. Stochastic
/// backends take `default_seed` unless the string sets `seed=` itself.
/// Throws UsageError on unknown methods, unknown keys or malformed values.
MethodSpec parse_method(const std::string& text, std::uint64_t default_seed = 0);

/// Names accepted by parse_method (without composition prefixes).
std::vector<std::string> method_names();

Enhancer make_enhancer(const MethodSpec& spec);

/// Seed used when --seed is absent: RDH_SEED from the environment, else 0.
std::uint64_t default_seed_from_env();

/// Ordered key=value record of a run.
struct RunManifest {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;  ///< throws UsageError if missing
  bool has(const std::string& key) const;
  std::vector<std::string> get_all(const std::string& key) const;

  void write(const std::filesystem::path& path) const;
  static RunManifest read(const std::filesystem::path& path);
};

/// Manifest path written alongside an output file.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

/// Entry point shared by the executable and the tests; argv[0] excluded.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rdh::cli
