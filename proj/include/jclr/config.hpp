#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "jclr/synth.hpp"
#include "jclr/trainer.hpp"

namespace jclr {

/// Flat key/value configuration document with dotted section names. Unknown
/// keys are rejected; every key has a documented default. Values come from an
/// optional file ("key = value" lines, '#' comments) overlaid with
/// command-line "key=value" overrides.
class PipelineConfig {
 public:
  PipelineConfig();

  void load_file(const std::filesystem::path& path);
  void apply_override(const std::string& assignment);  // "key=value"
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// FNV-1a hash over the canonical key=value listing, hex-encoded.
  std::string fingerprint() const;
  /// Canonical listing, one "key = value" per line, sorted by key.
  std::string dump() const;

  CityConfig city_config() const;
  TrainConfig train_config() const;
  AugmentConfig augment_config() const;

 private:
  std::map<std::string, std::string> values_;    // current values
  std::map<std::string, std::string> defaults_;  // known keys with defaults
};

}  // namespace jclr
