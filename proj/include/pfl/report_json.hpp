#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pfl/cases.hpp"
#include "pfl/extensions.hpp"
#include "pfl/interval_map.hpp"

namespace pfl {

using Json = nlohmann::ordered_json;

/// Numbers cross the report boundary as {"exact": string, "float": double}.
Json quad_json(const QuadExt& value);
Json projective_json(const ProjectiveScalar& value);

Json branch_json(const MoebiusBranch& v);
MoebiusBranch branch_from_json(const Json& j);

Json map_json(const PiecewiseMoebiusMap& map);
PiecewiseMoebiusMap map_from_json(const Json& j);

Json validation_json(const ValidationReport& report);
Json residual_json(const ResidualReport& report, bool include_entries = false);
Json density_json(const Density& density);
Json classification_json(const ClassificationReport& report);
Json extension_json(const ExtensionResult& result);

/// Writes text via a temp file and rename, so report files appear atomically.
void write_text_file(const std::string& path, const std::string& content);

/// CSV with a header row; every row must match the header arity.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string format_double(double value);

} // namespace pfl
