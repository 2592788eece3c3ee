#include "ltvstab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ltvstab/builtins.hpp"
#include "ltvstab/errors.hpp"

namespace ltvstab {

namespace {

using json = nlohmann::ordered_json;

json parse_or_throw(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError(std::string("malformed JSON in ") + what);
  return j;
}

double require_number(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number()) {
    throw ConfigError(std::string("missing or non-numeric field '") + field + "'");
  }
  const double v = j[field].get<double>();
  if (!std::isfinite(v)) throw ConfigError(std::string("field '") + field + "' is not finite");
  return v;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw ConfigError("field '" + field + "' must be a row-major array of arrays");
  }
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ConfigError("field '" + field + "' has ragged rows");
    }
    for (Index c = 0; c < cols; ++c) {
      const auto& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number()) throw ConfigError("field '" + field + "' has a non-numeric entry");
      const double v = cell.get<double>();
      if (!std::isfinite(v)) throw ConfigError("field '" + field + "' has a non-finite entry");
      m(r, c) = v;
    }
  }
  return m;
}

// Accepts either one matrix (broadcast to every step) or a list of matrices.
std::vector<Matrix> matrices_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError("field '" + field + "' must be a matrix or a list of matrices");
  }
  if (j.front().is_array() && !j.front().empty() && j.front().front().is_number()) {
    return {matrix_from_json(j, field)};
  }
  std::vector<Matrix> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(matrix_from_json(j[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

SystemModel SystemDescription::build() const {
  if (kind == "builtin") return builtin_system(builtin, dt);
  std::vector<Matrix> a = a_steps;
  std::vector<Matrix> b = b_steps;
  if (a.empty() || b.empty()) throw ConfigError("system description has empty 'A' or 'B'");
  const std::size_t steps = std::max(a.size(), b.size());
  if (a.size() == 1 && steps > 1) a.assign(steps, a.front());
  if (b.size() == 1 && steps > 1) b.assign(steps, b.front());
  if (a.size() != b.size()) throw ConfigError("'A' and 'B' list lengths differ");
  if (kind == "periodic") return SystemModel::periodic(std::move(a), std::move(b), partition);
  if (kind == "sequence") return SystemModel::sequence(std::move(a), std::move(b), partition);
  throw ConfigError("unknown system kind '" + kind + "'");
}

SystemDescription parse_system_description(const std::string& json_text) {
  const json j = parse_or_throw(json_text, "system description");
  SystemDescription desc;
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("system description needs a string field 'kind'");
  }
  desc.kind = j["kind"].get<std::string>();
  if (desc.kind == "builtin") {
    if (!j.contains("builtin") || !j["builtin"].is_string()) {
      throw ConfigError("builtin system description needs a string field 'builtin'");
    }
    desc.builtin = j["builtin"].get<std::string>();
    if (j.contains("dt")) desc.dt = require_number(j, "dt");
    return desc;
  }
  if (desc.kind != "periodic" && desc.kind != "sequence") {
    throw ConfigError("field 'kind' must be periodic, sequence, or builtin");
  }
  if (!j.contains("A")) throw ConfigError("system description is missing 'A'");
  if (!j.contains("B")) throw ConfigError("system description is missing 'B'");
  desc.a_steps = matrices_from_json(j["A"], "A");
  desc.b_steps = matrices_from_json(j["B"], "B");
  if (j.contains("partition")) {
    const auto& part = j["partition"];
    if (!part.is_array() || part.size() != 2 || !part[0].is_number_integer() ||
        !part[1].is_number_integer()) {
      throw ConfigError("field 'partition' must be [N1, N2]");
    }
    desc.partition = Partition{part[0].get<Index>(), part[1].get<Index>()};
  }
  return desc;
}

SystemDescription load_system_description(const std::filesystem::path& path) {
  return parse_system_description(read_file(path));
}

std::string system_description_to_json(const SystemDescription& desc, int indent) {
  json j;
  j["kind"] = desc.kind;
  if (desc.kind == "builtin") {
    j["builtin"] = desc.builtin;
    j["dt"] = desc.dt;
  } else {
    json a = json::array();
    for (const Matrix& m : desc.a_steps) a.push_back(matrix_to_json(m));
    json b = json::array();
    for (const Matrix& m : desc.b_steps) b.push_back(matrix_to_json(m));
    j["A"] = std::move(a);
    j["B"] = std::move(b);
    if (desc.partition) {
      j["partition"] = json::array({desc.partition->n_antistable, desc.partition->n_stable});
    }
  }
  return j.dump(indent);
}

ChannelModel parse_channel(const std::string& json_text) {
  const json j = parse_or_throw(json_text, "channel description");
  if (!j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("channel description needs a string field 'kind'");
  }
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "bernoulli") return ChannelModel::bernoulli(require_number(j, "p"));
  if (kind == "gaussian") {
    return ChannelModel::gaussian(require_number(j, "mean"), require_number(j, "variance"));
  }
  if (kind == "uniform") {
    return ChannelModel::uniform(require_number(j, "lo"), require_number(j, "hi"));
  }
  if (kind == "two_point") {
    return ChannelModel::two_point(require_number(j, "v1"), require_number(j, "v2"),
                                   require_number(j, "q"));
  }
  if (kind == "deterministic") return ChannelModel::deterministic(require_number(j, "value"));
  throw ConfigError("unknown channel kind '" + kind + "'");
}

ChannelModel load_channel(const std::filesystem::path& path) {
  return parse_channel(read_file(path));
}

std::string channel_to_json(const ChannelModel& ch, int indent) {
  json j;
  const auto& p = ch.params();
  switch (ch.kind()) {
    case ChannelModel::Kind::kBernoulli:
      j["kind"] = "bernoulli";
      j["p"] = p[0];
      break;
    case ChannelModel::Kind::kGaussian:
      j["kind"] = "gaussian";
      j["mean"] = p[0];
      j["variance"] = p[1];
      break;
    case ChannelModel::Kind::kUniform:
      j["kind"] = "uniform";
      j["lo"] = p[0];
      j["hi"] = p[1];
      break;
    case ChannelModel::Kind::kTwoPoint:
      j["kind"] = "two_point";
      j["v1"] = p[0];
      j["v2"] = p[1];
      j["q"] = p[2];
      break;
    case ChannelModel::Kind::kDeterministic:
      j["kind"] = "deterministic";
      j["value"] = p[0];
      break;
  }
  return j.dump(indent);
}

std::string format_numeric(double value) {
  char buffer[64];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

std::string format_numeric(Index value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

struct CsvWriter::Impl {
  std::ofstream out;
};

CsvWriter::CsvWriter(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->out.open(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!impl_->out) throw ConfigError("cannot write '" + path.string() + "'");
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::header(const std::vector<std::string>& columns) { raw_row(columns); }

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (double v : values) fields.push_back(format_numeric(v));
  raw_row(fields);
}

void CsvWriter::raw_row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) impl_->out << ',';
    impl_->out << fields[i];
  }
  impl_->out << '\n';
}

}  // namespace ltvstab
