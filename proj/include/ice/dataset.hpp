#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ice/row_mask.hpp"

namespace ice {

/// Index of a level within its parameter. Parameters have at most 64 levels,
/// so a byte is enough and a selected-level set fits in one 64-bit word.
using LevelCode = std::uint8_t;

inline constexpr std::size_t kMaxLevels = 64;

/// One categorical parameter: its name and ordered level vocabulary.
struct ParameterSchema {
  std::string name;
  std::vector<std::string> levels;
  bool ordinal = false;

  std::size_t level_count() const noexcept { return levels.size(); }
  std::optional<std::size_t> find_level(std::string_view level) const;

  bool operator==(const ParameterSchema&) const = default;
};

/// Throws DataError unless names are non-empty, levels are unique and
/// non-empty, and the level count is within [2, kMaxLevels].
void validate_schema(std::span<const ParameterSchema> parameters);

/// Per-(parameter, level) row bitmasks plus the per-row level codes they were
/// built from. masks[p][l] has bit r set iff row r has level l of parameter p.
struct LevelIndex {
  std::vector<std::vector<RowMask>> masks;
  std::vector<std::vector<LevelCode>> codes;  // codes[p][row]

  bool operator==(const LevelIndex&) const = default;
};

/// Single pass over a row-major table of level names. Cells are compared
/// after trimming surrounding whitespace. Throws DataError naming the row,
/// parameter and value for any cell outside the parameter's level set.
LevelIndex build_index(std::span<const ParameterSchema> parameters,
                       const std::vector<std::vector<std::string>>& rows);

/// Same index built from already-encoded column-major level codes.
LevelIndex build_index(std::span<const ParameterSchema> parameters,
                       std::vector<std::vector<LevelCode>> codes,
                       std::size_t row_count);

/// Immutable table of categorical parameters and one numeric target, with the
/// one-hot row index. Safe for concurrent readers.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<ParameterSchema> parameters, std::string target_name,
          std::vector<double> target, LevelIndex index);

  /// Builds the index from column-major level codes.
  static Dataset from_codes(std::vector<ParameterSchema> parameters,
                            std::string target_name, std::vector<double> target,
                            std::vector<std::vector<LevelCode>> codes);

  std::size_t row_count() const noexcept { return target_.size(); }
  std::size_t parameter_count() const noexcept { return parameters_.size(); }

  const std::vector<ParameterSchema>& parameters() const noexcept {
    return parameters_;
  }
  const ParameterSchema& parameter(std::size_t p) const {
    return parameters_.at(p);
  }
  const std::string& target_name() const noexcept { return target_name_; }
  std::span<const double> target() const noexcept { return target_; }

  const RowMask& level_mask(std::size_t p, std::size_t level) const {
    return index_.masks.at(p).at(level);
  }
  LevelCode level_of(std::size_t p, std::size_t row) const {
    return index_.codes[p][row];
  }
  std::span<const LevelCode> level_column(std::size_t p) const {
    return index_.codes.at(p);
  }

  std::optional<std::size_t> find_parameter(std::string_view name) const;
  /// Throws SchemaError for unknown names.
  std::size_t parameter_index(std::string_view name) const;
  std::size_t level_index(std::size_t p, std::string_view level) const;

  /// Product of level counts, saturating at SIZE_MAX.
  std::size_t configuration_space_size() const noexcept;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<ParameterSchema> parameters_;
  std::string target_name_;
  std::vector<double> target_;
  LevelIndex index_;
};

/// Reads a header-bearing RFC-4180 CSV. Every column except target_column is
/// categorical; levels keep first-appearance order.
Dataset load_csv(std::istream& source, const std::string& target_column);
Dataset load_csv_file(const std::string& path, const std::string& target_column);

/// Writes the dataset back as CSV, parameters first, target last.
void write_csv(const Dataset& dataset, std::ostream& out);

/// Splits CSV text into records of fields. Quoted fields may contain commas,
/// doubled quotes and line breaks. Exposed for tests.
std::vector<std::vector<std::string>> parse_csv_records(std::istream& source);

}  // namespace ice
