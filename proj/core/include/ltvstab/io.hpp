#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ltvstab/channel.hpp"
#include "ltvstab/system_model.hpp"

namespace ltvstab {

/// Parsed form of a system description file:
///   { "kind": "periodic" | "sequence" | "builtin",
///     "A": [[row, ...], ...] or a list of such matrices (one per step),
///     "B": same shape rules,
///     "partition": [N1, N2]   (optional),
///     "builtin": "example1" | "example2",
///     "dt": 0.1 }
/// Matrices are row-major arrays of arrays of finite numbers. A single matrix
/// given for a multi-step kind is broadcast to every step.
struct SystemDescription {
  std::string kind;
  std::vector<Matrix> a_steps;
  std::vector<Matrix> b_steps;
  std::optional<Partition> partition;
  std::string builtin;
  double dt = 0.1;

  SystemModel build() const;
};

SystemDescription parse_system_description(const std::string& json_text);
SystemDescription load_system_description(const std::filesystem::path& path);
/// Normalized JSON echo of the description (stable field order).
std::string system_description_to_json(const SystemDescription& desc, int indent = -1);

/// Channel description: { "kind": "bernoulli", "p": 0.11 },
/// { "kind": "gaussian", "mean": 1, "variance": 0.2 },
/// { "kind": "uniform", "lo": 0.9, "hi": 1.1 },
/// { "kind": "two_point", "v1": 0, "v2": 2, "q": 0.5 },
/// { "kind": "deterministic", "value": 1 }.
ChannelModel parse_channel(const std::string& json_text);
ChannelModel load_channel(const std::filesystem::path& path);
std::string channel_to_json(const ChannelModel& ch, int indent = -1);

/// Locale-independent decimal formatting with 17 significant digits; used for
/// every CSV field so outputs are bit-identical across platforms.
std::string format_numeric(double value);
std::string format_numeric(Index value);

/// Minimal CSV emitter: '.' decimal point, ',' separator, LF line endings,
/// mandatory header row.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& fields);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ltvstab
