#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cubicml/decimal.hpp"
#include "cubicml/rng.hpp"

namespace cubicml {

enum class DimensionKind { categorical, stepped_integer, stepped_decimal, boolean_flag };

// Reporting-only marker; carries no behavior.
enum class RoleTag { architecture, parallelism, infra, other };

std::string_view to_string(DimensionKind kind);
std::string_view to_string(RoleTag role);

// One tunable axis of a search space.  Every kind exposes a finite ordered
// value set addressed by index: declaration order for categoricals, ascending
// for stepped kinds, (false, true) for booleans.
class Dimension {
 public:
  static Dimension categorical(std::string name, std::vector<std::string> labels,
                               RoleTag role = RoleTag::other);
  static Dimension stepped_integer(std::string name, std::int64_t min, std::int64_t max,
                                   std::int64_t step, RoleTag role = RoleTag::other);
  static Dimension stepped_decimal(std::string name, Decimal min, Decimal max, Decimal step,
                                   RoleTag role = RoleTag::other);
  static Dimension boolean(std::string name, RoleTag role = RoleTag::other);

  const std::string& name() const { return name_; }
  DimensionKind kind() const { return kind_; }
  RoleTag role() const { return role_; }
  std::uint32_t value_count() const { return value_count_; }

  // Canonical string form of the value at index ("NO_SHARD", "1024", "0.77",
  // "true").  Inverse of index_of.
  std::string label_at(std::uint32_t index) const;
  std::uint32_t index_of(std::string_view label) const;

  // Typed accessors; throw when the kind does not match.
  std::int64_t int_at(std::uint32_t index) const;
  Decimal decimal_at(std::uint32_t index) const;
  bool bool_at(std::uint32_t index) const;
  // Numeric value for stepped kinds only.
  double numeric_at(std::uint32_t index) const;

  const std::vector<std::string>& labels() const;
  std::int64_t int_min() const;
  std::int64_t int_step() const;

 private:
  Dimension() = default;

  std::string name_;
  DimensionKind kind_ = DimensionKind::categorical;
  RoleTag role_ = RoleTag::other;
  std::uint32_t value_count_ = 0;
  std::vector<std::string> labels_;
  std::int64_t int_min_ = 0;
  std::int64_t int_max_ = 0;
  std::int64_t int_step_ = 1;
  Decimal dec_min_;
  Decimal dec_max_;
  Decimal dec_step_;
};

// A point in a space: one value index per dimension, in dimension order, plus
// a back-reference identifying which space produced it.
struct ConfigPoint {
  std::string space_name;
  std::int64_t space_version = 0;
  std::vector<std::uint32_t> indices;

  friend bool operator==(const ConfigPoint&, const ConfigPoint&) = default;
};

// Exact product of per-dimension value counts.  `digits` always holds the
// decimal string; `value` is set when the product fits in 64 bits.
struct Cardinality {
  std::string digits;
  std::optional<std::uint64_t> value;
};

class SearchSpace {
 public:
  SearchSpace(std::string name, std::int64_t version, std::vector<Dimension> dimensions);

  const std::string& name() const { return name_; }
  std::int64_t version() const { return version_; }
  const std::vector<Dimension>& dimensions() const { return dimensions_; }
  std::size_t dimension_count() const { return dimensions_.size(); }
  const Dimension& dimension(std::size_t i) const;
  std::size_t dimension_index(std::string_view name) const;

  Cardinality cardinality() const;

  ConfigPoint sample_uniform(Rng& rng) const;
  ConfigPoint sample_uniform(std::uint64_t seed) const;

  // Builds a point from name → canonical label pairs; every dimension must
  // appear exactly once.
  ConfigPoint config_from_labels(
      const std::vector<std::pair<std::string, std::string>>& assignments) const;

  // Typed reads of a single assignment.
  const std::string& label_value(const ConfigPoint& config, std::string_view dim_name) const;
  std::int64_t int_value(const ConfigPoint& config, std::string_view dim_name) const;
  Decimal decimal_value(const ConfigPoint& config, std::string_view dim_name) const;
  bool bool_value(const ConfigPoint& config, std::string_view dim_name) const;

  // Throws unless the point carries this space's name/version and its indices
  // are all in range.
  void check_config(const ConfigPoint& config) const;

 private:
  std::string name_;
  std::int64_t version_ = 0;
  std::vector<Dimension> dimensions_;
};

// Parses the structured space document (see docs/file-formats in the README).
SearchSpace parse_space(const std::string& text);
SearchSpace load_space(const std::filesystem::path& file);

// Config <-> JSON object text ({"dim": value, ...}); values typed per kind.
std::string config_to_json(const SearchSpace& space, const ConfigPoint& config);
ConfigPoint config_from_json(const SearchSpace& space, const std::string& text);

// Stable 64-bit identity of a config within its space.
std::uint64_t config_hash(const ConfigPoint& config);

// Visits every config in lexicographic index order.  Cost is the full
// cardinality; callers gate on it first.
void for_each_config(const SearchSpace& space,
                     const std::function<void(const ConfigPoint&)>& fn);

// --- one-hot encoding ---------------------------------------------------

struct OnehotLayout {
  std::vector<std::uint32_t> offsets;  // block start per dimension
  std::uint32_t length = 0;
};

OnehotLayout onehot_layout(const SearchSpace& space);
std::vector<double> encode_onehot(const SearchSpace& space, const ConfigPoint& config);
// Indices of the hot entries, one per dimension block; the sparse form of
// encode_onehot for kernels that skip zeros.
std::vector<std::uint32_t> onehot_active_indices(const SearchSpace& space,
                                                 const ConfigPoint& config);
ConfigPoint decode_onehot(const SearchSpace& space, std::span<const double> features);

// --- mixed encoding -------------------------------------------------------

enum class SlotKind { numeric, categorical };

struct MixedLayout {
  std::vector<SlotKind> slots;                  // one slot per dimension
  std::vector<std::uint32_t> category_counts;   // value count for categorical slots, 0 otherwise
};

MixedLayout mixed_layout(const SearchSpace& space);
std::vector<double> encode_mixed(const SearchSpace& space, const ConfigPoint& config);
ConfigPoint decode_mixed(const SearchSpace& space, std::span<const double> features);

}  // namespace cubicml
