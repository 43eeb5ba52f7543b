#include "ice/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "ice/error.hpp"
#include "text.hpp"

namespace ice {

std::optional<std::size_t> ParameterSchema::find_level(
    std::string_view level) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == level) return i;
  }
  return std::nullopt;
}

void validate_schema(std::span<const ParameterSchema> parameters) {
  std::unordered_set<std::string> names;
  for (const auto& p : parameters) {
    if (p.name.empty()) throw DataError("parameter name is empty");
    if (!names.insert(p.name).second) {
      throw DataError("duplicate parameter name '" + p.name + "'", {}, p.name);
    }
    if (p.levels.size() < 2) {
      throw DataError("parameter '" + p.name + "' has fewer than 2 levels", {},
                      p.name);
    }
    if (p.levels.size() > kMaxLevels) {
      throw DataError("parameter '" + p.name + "' has " +
                          std::to_string(p.levels.size()) +
                          " distinct levels; the limit is " +
                          std::to_string(kMaxLevels),
                      {}, p.name);
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& level : p.levels) {
      if (level.empty()) {
        throw DataError("parameter '" + p.name + "' has an empty level name", {},
                        p.name);
      }
      if (!seen.insert(level).second) {
        throw DataError("parameter '" + p.name + "' repeats level '" + level +
                            "'",
                        {}, p.name);
      }
    }
  }
}

LevelIndex build_index(std::span<const ParameterSchema> parameters,
                       std::vector<std::vector<LevelCode>> codes,
                       std::size_t row_count) {
  if (codes.size() != parameters.size()) {
    throw DataError("level code columns do not match the parameter count");
  }
  LevelIndex index;
  index.masks.resize(parameters.size());
  for (std::size_t p = 0; p < parameters.size(); ++p) {
    if (codes[p].size() != row_count) {
      throw DataError("level code column length mismatch", {},
                      parameters[p].name);
    }
    auto& masks = index.masks[p];
    masks.assign(parameters[p].level_count(), RowMask(row_count));
    for (std::size_t r = 0; r < row_count; ++r) {
      const LevelCode code = codes[p][r];
      if (code >= masks.size()) {
        throw DataError("level code out of range", r + 1, parameters[p].name);
      }
      masks[code].set(r);
    }
  }
  index.codes = std::move(codes);
  return index;
}

LevelIndex build_index(std::span<const ParameterSchema> parameters,
                       const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::unordered_map<std::string_view, LevelCode>> lookup(
      parameters.size());
  for (std::size_t p = 0; p < parameters.size(); ++p) {
    for (std::size_t l = 0; l < parameters[p].levels.size(); ++l) {
      lookup[p].emplace(parameters[p].levels[l], static_cast<LevelCode>(l));
    }
  }
  std::vector<std::vector<LevelCode>> codes(parameters.size());
  for (auto& column : codes) column.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != parameters.size()) {
      throw DataError("row has " + std::to_string(rows[r].size()) +
                          " categorical cells, expected " +
                          std::to_string(parameters.size()),
                      r + 1);
    }
    for (std::size_t p = 0; p < parameters.size(); ++p) {
      const auto value = text::trim(rows[r][p]);
      const auto it = lookup[p].find(value);
      if (it == lookup[p].end()) {
        throw DataError("unknown level '" + std::string(value) +
                            "' for parameter '" + parameters[p].name + "'",
                        r + 1, parameters[p].name);
      }
      codes[p][r] = it->second;
    }
  }
  return build_index(parameters, std::move(codes), rows.size());
}

Dataset::Dataset(std::vector<ParameterSchema> parameters,
                 std::string target_name, std::vector<double> target,
                 LevelIndex index)
    : parameters_(std::move(parameters)),
      target_name_(std::move(target_name)),
      target_(std::move(target)),
      index_(std::move(index)) {
  validate_schema(parameters_);
  for (std::size_t r = 0; r < target_.size(); ++r) {
    if (!std::isfinite(target_[r])) {
      throw DataError("target value is not finite", r + 1, target_name_);
    }
  }
  if (index_.masks.size() != parameters_.size() ||
      index_.codes.size() != parameters_.size()) {
    throw DataError("level index does not match the parameter list");
  }
  for (std::size_t p = 0; p < parameters_.size(); ++p) {
    if (index_.masks[p].size() != parameters_[p].level_count() ||
        index_.codes[p].size() != target_.size()) {
      throw DataError("level index shape mismatch", {}, parameters_[p].name);
    }
    for (const auto& mask : index_.masks[p]) {
      if (mask.size() != target_.size()) {
        throw DataError("level mask length mismatch", {}, parameters_[p].name);
      }
    }
  }
}

Dataset Dataset::from_codes(std::vector<ParameterSchema> parameters,
                            std::string target_name, std::vector<double> target,
                            std::vector<std::vector<LevelCode>> codes) {
  validate_schema(parameters);
  auto index = build_index(parameters, std::move(codes), target.size());
  return Dataset(std::move(parameters), std::move(target_name),
                 std::move(target), std::move(index));
}

std::optional<std::size_t> Dataset::find_parameter(std::string_view name) const {
  for (std::size_t p = 0; p < parameters_.size(); ++p) {
    if (parameters_[p].name == name) return p;
  }
  return std::nullopt;
}

std::size_t Dataset::parameter_index(std::string_view name) const {
  if (auto p = find_parameter(name)) return *p;
  throw SchemaError("unknown parameter '" + std::string(name) + "'");
}

std::size_t Dataset::level_index(std::size_t p, std::string_view level) const {
  if (auto l = parameter(p).find_level(level)) return *l;
  throw SchemaError("unknown level '" + std::string(level) +
                    "' for parameter '" + parameter(p).name + "'");
}

std::size_t Dataset::configuration_space_size() const noexcept {
  std::size_t total = 1;
  for (const auto& p : parameters_) {
    if (total > std::numeric_limits<std::size_t>::max() / p.level_count()) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= p.level_count();
  }
  return total;
}

std::vector<std::vector<std::string>> parse_csv_records(std::istream& source) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool record_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    record_started = false;
  };

  char c = 0;
  while (source.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (source.peek() == '"') {
          source.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started || text::trim(field).empty()) {
          field.clear();
          in_quotes = true;
          field_started = true;
          record_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        record_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (record_started || field_started || !field.empty()) end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
        record_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field", records.size());
  if (record_started || field_started || !field.empty()) end_record();
  return records;
}

Dataset load_csv(std::istream& source, const std::string& target_column) {
  auto records = parse_csv_records(source);
  if (records.empty()) throw DataError("CSV input is empty");

  std::vector<std::string> header;
  for (const auto& name : records.front()) {
    header.emplace_back(text::trim(name));
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : header) {
    if (name.empty()) throw DataError("CSV header has an empty column name", 0);
    if (!seen.insert(name).second) {
      throw DataError("duplicate header name '" + name + "'", 0, name);
    }
  }
  std::optional<std::size_t> target_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == target_column) target_col = c;
  }
  if (!target_col) {
    throw DataError("target column '" + target_column + "' not found", 0,
                    target_column);
  }

  std::vector<ParameterSchema> parameters;
  std::vector<std::size_t> param_cols;
  std::vector<std::unordered_map<std::string, LevelCode>> lookup;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == *target_col) continue;
    parameters.push_back(ParameterSchema{header[c], {}, false});
    param_cols.push_back(c);
  }
  lookup.resize(parameters.size());

  const std::size_t n = records.size() - 1;
  std::vector<double> target(n);
  std::vector<std::vector<LevelCode>> codes(parameters.size(),
                                            std::vector<LevelCode>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    const std::size_t row = r + 1;
    if (rec.size() != header.size()) {
      throw DataError("row has " + std::to_string(rec.size()) +
                          " fields, expected " + std::to_string(header.size()),
                      row);
    }
    const auto value = text::parse_double(rec[*target_col]);
    if (!value) {
      throw DataError("non-numeric target value '" +
                          std::string(text::trim(rec[*target_col])) + "'",
                      row, target_column);
    }
    if (!std::isfinite(*value)) {
      throw DataError("target value is not finite", row, target_column);
    }
    target[r] = *value;
    for (std::size_t p = 0; p < parameters.size(); ++p) {
      const std::string cell(text::trim(rec[param_cols[p]]));
      if (cell.empty()) {
        throw DataError("missing value", row, parameters[p].name);
      }
      auto [it, inserted] = lookup[p].try_emplace(
          cell, static_cast<LevelCode>(
                    std::min(parameters[p].levels.size(), kMaxLevels)));
      if (inserted) {
        if (parameters[p].levels.size() >= kMaxLevels) {
          throw DataError("parameter '" + parameters[p].name +
                              "' has more than " + std::to_string(kMaxLevels) +
                              " distinct levels",
                          row, parameters[p].name);
        }
        parameters[p].levels.push_back(cell);
      }
      codes[p][r] = it->second;
    }
  }

  validate_schema(parameters);
  auto index = build_index(parameters, std::move(codes), n);
  return Dataset(std::move(parameters), target_column, std::move(target),
                 std::move(index));
}

Dataset load_csv_file(const std::string& path, const std::string& target_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load_csv(in, target_column);
}

namespace {

void write_field(std::ostream& out, const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) {
    out << value;
    return;
  }
  out << '"';
  for (char c : value) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

void write_csv(const Dataset& dataset, std::ostream& out) {
  for (const auto& p : dataset.parameters()) {
    write_field(out, p.name);
    out << ',';
  }
  write_field(out, dataset.target_name());
  out << '\n';
  char buf[64];
  const auto target = dataset.target();
  for (std::size_t r = 0; r < dataset.row_count(); ++r) {
    for (std::size_t p = 0; p < dataset.parameter_count(); ++p) {
      write_field(out, dataset.parameter(p).levels[dataset.level_of(p, r)]);
      out << ',';
    }
    // Shortest round-trip representation keeps reloads bit-identical.
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), target[r]);
    out.write(buf, ptr - buf);
    out << '\n';
  }
}

}  // namespace ice
