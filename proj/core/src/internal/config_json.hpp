#pragma once

#include "json.hpp"

#include "cubicml/space.hpp"

namespace cubicml::detail {

// Shared by the space serializer and the job store so both agree on the
// name → typed-value object layout (dimension order preserved).
nlohmann::ordered_json config_to_json_obj(const SearchSpace& space, const ConfigPoint& config);
ConfigPoint config_from_json_obj(const SearchSpace& space, const nlohmann::ordered_json& obj);

}  // namespace cubicml::detail
