#include "cubicml/space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <boost/multiprecision/cpp_int.hpp>

#include "cubicml/errors.hpp"
#include "internal/config_json.hpp"

namespace cubicml {

namespace {

using json = nlohmann::ordered_json;

std::int64_t parse_int64_strict(std::string_view text) {
  std::int64_t value = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ValidationError("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::uint32_t decimal_index_in(const Decimal& min, const Decimal& step, std::uint32_t count,
                               const Decimal& value) {
  for (std::uint32_t k = 0; k < count; ++k) {
    if (decimal_add_scaled(min, step, k) == value) return k;
  }
  throw ValidationError("value " + value.to_string() + " not in dimension's value set");
}

}  // namespace

std::string_view to_string(DimensionKind kind) {
  switch (kind) {
    case DimensionKind::categorical: return "categorical";
    case DimensionKind::stepped_integer: return "stepped_integer";
    case DimensionKind::stepped_decimal: return "stepped_decimal";
    case DimensionKind::boolean_flag: return "boolean";
  }
  throw ValidationError("unrepresentable dimension kind");
}

std::string_view to_string(RoleTag role) {
  switch (role) {
    case RoleTag::architecture: return "architecture";
    case RoleTag::parallelism: return "parallelism";
    case RoleTag::infra: return "infra";
    case RoleTag::other: return "other";
  }
  throw ValidationError("unrepresentable role tag");
}

Dimension Dimension::categorical(std::string name, std::vector<std::string> labels, RoleTag role) {
  if (name.empty()) throw ValidationError("dimension name must be non-empty");
  if (labels.size() < 2) {
    throw ValidationError("dimension '" + name + "': categorical needs at least 2 labels");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& label : labels) {
    if (label.empty()) throw ValidationError("dimension '" + name + "': empty label");
    if (!seen.insert(label).second) {
      throw ValidationError("dimension '" + name + "': duplicate label '" + label + "'");
    }
  }
  Dimension d;
  d.name_ = std::move(name);
  d.kind_ = DimensionKind::categorical;
  d.role_ = role;
  d.labels_ = std::move(labels);
  d.value_count_ = static_cast<std::uint32_t>(d.labels_.size());
  return d;
}

Dimension Dimension::stepped_integer(std::string name, std::int64_t min, std::int64_t max,
                                     std::int64_t step, RoleTag role) {
  if (name.empty()) throw ValidationError("dimension name must be non-empty");
  if (step <= 0) throw ValidationError("dimension '" + name + "': step must be positive");
  if (min > max) throw ValidationError("dimension '" + name + "': min exceeds max");
  if ((max - min) % step != 0) {
    throw ValidationError("dimension '" + name + "': step does not divide max - min");
  }
  const std::int64_t count = (max - min) / step + 1;
  if (count > static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max())) {
    throw ValidationError("dimension '" + name + "': too many values");
  }
  Dimension d;
  d.name_ = std::move(name);
  d.kind_ = DimensionKind::stepped_integer;
  d.role_ = role;
  d.int_min_ = min;
  d.int_max_ = max;
  d.int_step_ = step;
  d.value_count_ = static_cast<std::uint32_t>(count);
  return d;
}

Dimension Dimension::stepped_decimal(std::string name, Decimal min, Decimal max, Decimal step,
                                     RoleTag role) {
  if (name.empty()) throw ValidationError("dimension name must be non-empty");
  if (step.digits <= 0) throw ValidationError("dimension '" + name + "': step must be positive");
  if (max < min) throw ValidationError("dimension '" + name + "': min exceeds max");
  const std::int64_t count = decimal_step_count(min, max, step);
  if (count == 0) {
    throw ValidationError("dimension '" + name + "': step does not divide max - min");
  }
  if (count > static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max())) {
    throw ValidationError("dimension '" + name + "': too many values");
  }
  Dimension d;
  d.name_ = std::move(name);
  d.kind_ = DimensionKind::stepped_decimal;
  d.role_ = role;
  d.dec_min_ = min;
  d.dec_max_ = max;
  d.dec_step_ = step;
  d.value_count_ = static_cast<std::uint32_t>(count);
  return d;
}

Dimension Dimension::boolean(std::string name, RoleTag role) {
  if (name.empty()) throw ValidationError("dimension name must be non-empty");
  Dimension d;
  d.name_ = std::move(name);
  d.kind_ = DimensionKind::boolean_flag;
  d.role_ = role;
  d.value_count_ = 2;
  return d;
}

std::string Dimension::label_at(std::uint32_t index) const {
  if (index >= value_count_) {
    throw ValidationError("dimension '" + name_ + "': index " + std::to_string(index) +
                          " out of range (count " + std::to_string(value_count_) + ")");
  }
  switch (kind_) {
    case DimensionKind::categorical: return labels_[index];
    case DimensionKind::stepped_integer:
      return std::to_string(int_min_ + static_cast<std::int64_t>(index) * int_step_);
    case DimensionKind::stepped_decimal:
      return decimal_add_scaled(dec_min_, dec_step_, static_cast<std::int64_t>(index)).to_string();
    case DimensionKind::boolean_flag: return index == 0 ? "false" : "true";
  }
  throw ValidationError("unrepresentable dimension kind");
}

std::uint32_t Dimension::index_of(std::string_view label) const {
  switch (kind_) {
    case DimensionKind::categorical: {
      for (std::uint32_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) return i;
      }
      break;
    }
    case DimensionKind::stepped_integer: {
      const std::int64_t v = parse_int64_strict(label);
      if (v >= int_min_ && v <= int_max_ && (v - int_min_) % int_step_ == 0) {
        return static_cast<std::uint32_t>((v - int_min_) / int_step_);
      }
      break;
    }
    case DimensionKind::stepped_decimal: {
      return decimal_index_in(dec_min_, dec_step_, value_count_, Decimal::parse(label));
    }
    case DimensionKind::boolean_flag: {
      if (label == "false") return 0;
      if (label == "true") return 1;
      break;
    }
  }
  throw ValidationError("dimension '" + name_ + "': value '" + std::string(label) +
                        "' not in value set");
}

std::int64_t Dimension::int_at(std::uint32_t index) const {
  if (kind_ != DimensionKind::stepped_integer) {
    throw ValidationError("dimension '" + name_ + "': not a stepped-integer dimension");
  }
  if (index >= value_count_) {
    throw ValidationError("dimension '" + name_ + "': index out of range");
  }
  return int_min_ + static_cast<std::int64_t>(index) * int_step_;
}

Decimal Dimension::decimal_at(std::uint32_t index) const {
  if (kind_ != DimensionKind::stepped_decimal) {
    throw ValidationError("dimension '" + name_ + "': not a stepped-decimal dimension");
  }
  if (index >= value_count_) {
    throw ValidationError("dimension '" + name_ + "': index out of range");
  }
  return decimal_add_scaled(dec_min_, dec_step_, static_cast<std::int64_t>(index));
}

bool Dimension::bool_at(std::uint32_t index) const {
  if (kind_ != DimensionKind::boolean_flag) {
    throw ValidationError("dimension '" + name_ + "': not a boolean dimension");
  }
  if (index >= 2) throw ValidationError("dimension '" + name_ + "': index out of range");
  return index == 1;
}

double Dimension::numeric_at(std::uint32_t index) const {
  switch (kind_) {
    case DimensionKind::stepped_integer: return static_cast<double>(int_at(index));
    case DimensionKind::stepped_decimal: return decimal_at(index).to_double();
    default:
      throw ValidationError("dimension '" + name_ + "': no numeric value for this kind");
  }
}

const std::vector<std::string>& Dimension::labels() const {
  if (kind_ != DimensionKind::categorical) {
    throw ValidationError("dimension '" + name_ + "': not a categorical dimension");
  }
  return labels_;
}

std::int64_t Dimension::int_min() const {
  if (kind_ != DimensionKind::stepped_integer) {
    throw ValidationError("dimension '" + name_ + "': not a stepped-integer dimension");
  }
  return int_min_;
}

std::int64_t Dimension::int_step() const {
  if (kind_ != DimensionKind::stepped_integer) {
    throw ValidationError("dimension '" + name_ + "': not a stepped-integer dimension");
  }
  return int_step_;
}

SearchSpace::SearchSpace(std::string name, std::int64_t version, std::vector<Dimension> dimensions)
    : name_(std::move(name)), version_(version), dimensions_(std::move(dimensions)) {
  if (name_.empty()) throw ValidationError("space name must be non-empty");
  std::unordered_set<std::string_view> seen;
  for (const auto& dim : dimensions_) {
    if (!seen.insert(dim.name()).second) {
      throw ValidationError("space '" + name_ + "': duplicate dimension name '" + dim.name() + "'");
    }
  }
}

const Dimension& SearchSpace::dimension(std::size_t i) const {
  if (i >= dimensions_.size()) {
    throw ValidationError("space '" + name_ + "': dimension index out of range");
  }
  return dimensions_[i];
}

std::size_t SearchSpace::dimension_index(std::string_view name) const {
  for (std::size_t i = 0; i < dimensions_.size(); ++i) {
    if (dimensions_[i].name() == name) return i;
  }
  throw ValidationError("space '" + name_ + "': no dimension named '" + std::string(name) + "'");
}

Cardinality SearchSpace::cardinality() const {
  boost::multiprecision::cpp_int product = 1;
  for (const auto& dim : dimensions_) product *= dim.value_count();
  Cardinality out;
  out.digits = product.str();
  if (product <= boost::multiprecision::cpp_int(std::numeric_limits<std::uint64_t>::max())) {
    out.value = product.convert_to<std::uint64_t>();
  }
  return out;
}

ConfigPoint SearchSpace::sample_uniform(Rng& rng) const {
  ConfigPoint point;
  point.space_name = name_;
  point.space_version = version_;
  point.indices.reserve(dimensions_.size());
  for (const auto& dim : dimensions_) {
    point.indices.push_back(static_cast<std::uint32_t>(rng.below(dim.value_count())));
  }
  return point;
}

ConfigPoint SearchSpace::sample_uniform(std::uint64_t seed) const {
  Rng rng(seed);
  return sample_uniform(rng);
}

ConfigPoint SearchSpace::config_from_labels(
    const std::vector<std::pair<std::string, std::string>>& assignments) const {
  if (assignments.size() != dimensions_.size()) {
    throw ValidationError("space '" + name_ + "': expected " +
                          std::to_string(dimensions_.size()) + " assignments, got " +
                          std::to_string(assignments.size()));
  }
  ConfigPoint point;
  point.space_name = name_;
  point.space_version = version_;
  point.indices.assign(dimensions_.size(), 0);
  std::vector<bool> assigned(dimensions_.size(), false);
  for (const auto& [dim_name, label] : assignments) {
    const std::size_t i = dimension_index(dim_name);
    if (assigned[i]) {
      throw ValidationError("space '" + name_ + "': dimension '" + dim_name +
                            "' assigned twice");
    }
    assigned[i] = true;
    point.indices[i] = dimensions_[i].index_of(label);
  }
  return point;
}

const std::string& SearchSpace::label_value(const ConfigPoint& config,
                                            std::string_view dim_name) const {
  check_config(config);
  const std::size_t i = dimension_index(dim_name);
  return dimensions_[i].labels().at(config.indices[i]);
}

std::int64_t SearchSpace::int_value(const ConfigPoint& config, std::string_view dim_name) const {
  check_config(config);
  const std::size_t i = dimension_index(dim_name);
  return dimensions_[i].int_at(config.indices[i]);
}

Decimal SearchSpace::decimal_value(const ConfigPoint& config, std::string_view dim_name) const {
  check_config(config);
  const std::size_t i = dimension_index(dim_name);
  return dimensions_[i].decimal_at(config.indices[i]);
}

bool SearchSpace::bool_value(const ConfigPoint& config, std::string_view dim_name) const {
  check_config(config);
  const std::size_t i = dimension_index(dim_name);
  return dimensions_[i].bool_at(config.indices[i]);
}

void SearchSpace::check_config(const ConfigPoint& config) const {
  if (config.space_name != name_ || config.space_version != version_) {
    throw ValidationError("config belongs to space '" + config.space_name + "' v" +
                          std::to_string(config.space_version) + ", expected '" + name_ + "' v" +
                          std::to_string(version_));
  }
  if (config.indices.size() != dimensions_.size()) {
    throw ValidationError("config has " + std::to_string(config.indices.size()) +
                          " assignments, space '" + name_ + "' has " +
                          std::to_string(dimensions_.size()) + " dimensions");
  }
  for (std::size_t i = 0; i < dimensions_.size(); ++i) {
    if (config.indices[i] >= dimensions_[i].value_count()) {
      throw ValidationError("config index " + std::to_string(config.indices[i]) +
                            " out of range for dimension '" + dimensions_[i].name() + "'");
    }
  }
}

namespace {

RoleTag parse_role(const std::string& text) {
  if (text == "architecture") return RoleTag::architecture;
  if (text == "parallelism") return RoleTag::parallelism;
  if (text == "infra") return RoleTag::infra;
  if (text == "other") return RoleTag::other;
  throw ValidationError("unknown role tag '" + text + "'");
}

Dimension parse_dimension(const json& node) {
  if (!node.is_object()) throw ValidationError("dimension entry must be an object");
  if (!node.contains("name") || !node["name"].is_string()) {
    throw ValidationError("dimension entry missing string field 'name'");
  }
  const std::string name = node["name"].get<std::string>();
  if (!node.contains("kind") || !node["kind"].is_string()) {
    throw ValidationError("dimension '" + name + "': missing string field 'kind'");
  }
  const std::string kind = node["kind"].get<std::string>();
  RoleTag role = RoleTag::other;
  if (node.contains("role")) role = parse_role(node["role"].get<std::string>());

  if (kind == "categorical") {
    if (!node.contains("values") || !node["values"].is_array()) {
      throw ValidationError("dimension '" + name + "': categorical needs a 'values' array");
    }
    std::vector<std::string> labels;
    for (const auto& v : node["values"]) {
      if (!v.is_string()) {
        throw ValidationError("dimension '" + name + "': categorical values must be strings");
      }
      labels.push_back(v.get<std::string>());
    }
    return Dimension::categorical(name, std::move(labels), role);
  }
  if (kind == "stepped_integer") {
    for (const char* field : {"min", "max", "step"}) {
      if (!node.contains(field) || !node[field].is_number_integer()) {
        throw ValidationError("dimension '" + name + "': stepped_integer needs integer '" +
                              std::string(field) + "'");
      }
    }
    return Dimension::stepped_integer(name, node["min"].get<std::int64_t>(),
                                      node["max"].get<std::int64_t>(),
                                      node["step"].get<std::int64_t>(), role);
  }
  if (kind == "stepped_decimal") {
    for (const char* field : {"min", "max", "step"}) {
      if (!node.contains(field) || !node[field].is_number()) {
        throw ValidationError("dimension '" + name + "': stepped_decimal needs numeric '" +
                              std::string(field) + "'");
      }
    }
    return Dimension::stepped_decimal(name, Decimal::from_double(node["min"].get<double>()),
                                      Decimal::from_double(node["max"].get<double>()),
                                      Decimal::from_double(node["step"].get<double>()), role);
  }
  if (kind == "boolean") {
    return Dimension::boolean(name, role);
  }
  throw ValidationError("dimension '" + name + "': unknown kind '" + kind + "'");
}

}  // namespace

SearchSpace parse_space(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("space document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("space document must be a JSON object");
  if (!doc.contains("name") || !doc["name"].is_string()) {
    throw ValidationError("space document missing string field 'name'");
  }
  std::int64_t version = 1;
  if (doc.contains("version")) {
    if (!doc["version"].is_number_integer()) {
      throw ValidationError("space field 'version' must be an integer");
    }
    version = doc["version"].get<std::int64_t>();
  }
  if (!doc.contains("dimensions") || !doc["dimensions"].is_array()) {
    throw ValidationError("space document missing array field 'dimensions'");
  }
  std::vector<Dimension> dims;
  for (const auto& node : doc["dimensions"]) dims.push_back(parse_dimension(node));
  return SearchSpace(doc["name"].get<std::string>(), version, std::move(dims));
}

SearchSpace load_space(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open space file: " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading space file: " + file.string());
  try {
    return parse_space(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
}

namespace detail {

nlohmann::ordered_json config_to_json_obj(const SearchSpace& space, const ConfigPoint& config) {
  space.check_config(config);
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < space.dimension_count(); ++i) {
    const Dimension& dim = space.dimension(i);
    const std::uint32_t idx = config.indices[i];
    switch (dim.kind()) {
      case DimensionKind::categorical: obj[dim.name()] = dim.label_at(idx); break;
      case DimensionKind::stepped_integer: obj[dim.name()] = dim.int_at(idx); break;
      case DimensionKind::stepped_decimal: obj[dim.name()] = dim.decimal_at(idx).to_double(); break;
      case DimensionKind::boolean_flag: obj[dim.name()] = dim.bool_at(idx); break;
    }
  }
  return obj;
}

ConfigPoint config_from_json_obj(const SearchSpace& space, const nlohmann::ordered_json& obj) {
  if (!obj.is_object()) throw ValidationError("config must be a JSON object");
  if (obj.size() != space.dimension_count()) {
    throw ValidationError("config has " + std::to_string(obj.size()) + " assignments, space '" +
                          space.name() + "' has " + std::to_string(space.dimension_count()) +
                          " dimensions");
  }
  ConfigPoint point;
  point.space_name = space.name();
  point.space_version = space.version();
  point.indices.reserve(space.dimension_count());
  for (std::size_t i = 0; i < space.dimension_count(); ++i) {
    const Dimension& dim = space.dimension(i);
    if (!obj.contains(dim.name())) {
      throw ValidationError("config missing dimension '" + dim.name() + "'");
    }
    const auto& v = obj[dim.name()];
    std::uint32_t idx = 0;
    switch (dim.kind()) {
      case DimensionKind::categorical:
        if (!v.is_string()) {
          throw ValidationError("dimension '" + dim.name() + "': expected string value");
        }
        idx = dim.index_of(v.get<std::string>());
        break;
      case DimensionKind::stepped_integer:
        if (!v.is_number_integer()) {
          throw ValidationError("dimension '" + dim.name() + "': expected integer value");
        }
        idx = dim.index_of(std::to_string(v.get<std::int64_t>()));
        break;
      case DimensionKind::stepped_decimal: {
        if (!v.is_number()) {
          throw ValidationError("dimension '" + dim.name() + "': expected numeric value");
        }
        idx = dim.index_of(Decimal::from_double(v.get<double>()).to_string());
        break;
      }
      case DimensionKind::boolean_flag:
        if (!v.is_boolean()) {
          throw ValidationError("dimension '" + dim.name() + "': expected boolean value");
        }
        idx = v.get<bool>() ? 1 : 0;
        break;
    }
    point.indices.push_back(idx);
  }
  return point;
}

}  // namespace detail

std::string config_to_json(const SearchSpace& space, const ConfigPoint& config) {
  return detail::config_to_json_obj(space, config).dump();
}

ConfigPoint config_from_json(const SearchSpace& space, const std::string& text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return detail::config_from_json_obj(space, obj);
}

std::uint64_t config_hash(const ConfigPoint& config) {
  std::uint64_t h = fnv1a64(config.space_name);
  h = mix64(h ^ static_cast<std::uint64_t>(config.space_version));
  for (const std::uint32_t idx : config.indices) {
    h = mix64(h ^ (static_cast<std::uint64_t>(idx) + 0x9e3779b97f4a7c15ull));
  }
  return h;
}

void for_each_config(const SearchSpace& space,
                     const std::function<void(const ConfigPoint&)>& fn) {
  ConfigPoint point;
  point.space_name = space.name();
  point.space_version = space.version();
  point.indices.assign(space.dimension_count(), 0);
  while (true) {
    fn(point);
    std::size_t i = space.dimension_count();
    while (i > 0) {
      --i;
      if (++point.indices[i] < space.dimension(i).value_count()) break;
      point.indices[i] = 0;
      if (i == 0) return;
    }
    if (space.dimension_count() == 0) return;
  }
}

OnehotLayout onehot_layout(const SearchSpace& space) {
  OnehotLayout layout;
  layout.offsets.reserve(space.dimension_count());
  std::uint64_t total = 0;
  for (const auto& dim : space.dimensions()) {
    layout.offsets.push_back(static_cast<std::uint32_t>(total));
    total += dim.value_count();
  }
  if (total > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("space '" + space.name() + "': one-hot layout too large");
  }
  layout.length = static_cast<std::uint32_t>(total);
  return layout;
}

std::vector<double> encode_onehot(const SearchSpace& space, const ConfigPoint& config) {
  space.check_config(config);
  const OnehotLayout layout = onehot_layout(space);
  std::vector<double> features(layout.length, 0.0);
  for (std::size_t i = 0; i < space.dimension_count(); ++i) {
    features[layout.offsets[i] + config.indices[i]] = 1.0;
  }
  return features;
}

std::vector<std::uint32_t> onehot_active_indices(const SearchSpace& space,
                                                 const ConfigPoint& config) {
  space.check_config(config);
  const OnehotLayout layout = onehot_layout(space);
  std::vector<std::uint32_t> active;
  active.reserve(space.dimension_count());
  for (std::size_t i = 0; i < space.dimension_count(); ++i) {
    active.push_back(layout.offsets[i] + config.indices[i]);
  }
  return active;
}

ConfigPoint decode_onehot(const SearchSpace& space, std::span<const double> features) {
  const OnehotLayout layout = onehot_layout(space);
  if (features.size() != layout.length) {
    throw ValidationError("one-hot vector has length " + std::to_string(features.size()) +
                          ", expected " + std::to_string(layout.length));
  }
  ConfigPoint point;
  point.space_name = space.name();
  point.space_version = space.version();
  point.indices.reserve(space.dimension_count());
  for (std::size_t i = 0; i < space.dimension_count(); ++i) {
    const std::uint32_t offset = layout.offsets[i];
    const std::uint32_t count = space.dimension(i).value_count();
    std::optional<std::uint32_t> hot;
    for (std::uint32_t j = 0; j < count; ++j) {
      const double v = features[offset + j];
      if (v == 1.0) {
        if (hot) {
          throw ValidationError("one-hot block for dimension '" + space.dimension(i).name() +
                                "' has multiple ones");
        }
        hot = j;
      } else if (v != 0.0) {
        throw ValidationError("one-hot entries must be exactly 0 or 1");
      }
    }
    if (!hot) {
      throw ValidationError("one-hot block for dimension '" + space.dimension(i).name() +
                            "' has no one");
    }
    point.indices.push_back(*hot);
  }
  return point;
}

MixedLayout mixed_layout(const SearchSpace& space) {
  MixedLayout layout;
  layout.slots.reserve(space.dimension_count());
  layout.category_counts.reserve(space.dimension_count());
  for (const auto& dim : space.dimensions()) {
    const bool numeric = dim.kind() == DimensionKind::stepped_integer ||
                         dim.kind() == DimensionKind::stepped_decimal;
    layout.slots.push_back(numeric ? SlotKind::numeric : SlotKind::categorical);
    layout.category_counts.push_back(numeric ? 0 : dim.value_count());
  }
  return layout;
}

std::vector<double> encode_mixed(const SearchSpace& space, const ConfigPoint& config) {
  space.check_config(config);
  std::vector<double> features;
  features.reserve(space.dimension_count());
  for (std::size_t i = 0; i < space.dimension_count(); ++i) {
    const Dimension& dim = space.dimension(i);
    if (dim.kind() == DimensionKind::stepped_integer ||
        dim.kind() == DimensionKind::stepped_decimal) {
      features.push_back(dim.numeric_at(config.indices[i]));
    } else {
      features.push_back(static_cast<double>(config.indices[i]));
    }
  }
  return features;
}

ConfigPoint decode_mixed(const SearchSpace& space, std::span<const double> features) {
  if (features.size() != space.dimension_count()) {
    throw ValidationError("mixed vector has length " + std::to_string(features.size()) +
                          ", expected " + std::to_string(space.dimension_count()));
  }
  ConfigPoint point;
  point.space_name = space.name();
  point.space_version = space.version();
  point.indices.reserve(space.dimension_count());
  for (std::size_t i = 0; i < space.dimension_count(); ++i) {
    const Dimension& dim = space.dimension(i);
    const double v = features[i];
    std::uint32_t idx = 0;
    switch (dim.kind()) {
      case DimensionKind::stepped_integer: {
        const auto iv = static_cast<std::int64_t>(std::llround(v));
        if (static_cast<double>(iv) != v) {
          throw ValidationError("dimension '" + dim.name() + "': value is not an integer");
        }
        idx = dim.index_of(std::to_string(iv));
        break;
      }
      case DimensionKind::stepped_decimal:
        idx = dim.index_of(Decimal::from_double(v).to_string());
        break;
      case DimensionKind::categorical:
      case DimensionKind::boolean_flag: {
        const auto iv = static_cast<std::int64_t>(std::llround(v));
        if (static_cast<double>(iv) != v || iv < 0 || iv >= dim.value_count()) {
          throw ValidationError("dimension '" + dim.name() + "': category index " +
                                std::to_string(v) + " out of range");
        }
        idx = static_cast<std::uint32_t>(iv);
        break;
      }
    }
    point.indices.push_back(idx);
  }
  return point;
}

}  // namespace cubicml
