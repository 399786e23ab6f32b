#pragma once

// JSON file formats.
//
//   matrix      row-major array of rows
//   SPD value   a matrix, or {"log_upper": [...]} holding the n(n+1)/2
//               upper-triangular entries of its logarithm (unscaled, row by row)
//   sheaf       {"n_stalk", "vertices": [ids], "edges": [{"tail", "head",
//               "map_tail", "map_head"}], optional "cochain0": [SPD values]}
//   point cloud {"vertices": [{"id", "xyz": [x, y, z]}], "edges": [[a, b] | {"tail", "head"}]}
//   segments    {"segments": [{"t_mid", "f_mid", "data": matrix}]}
//   params      {"seed", "stalk_dim", "hidden", "layers": [{...}]}

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdsheaf/covgraph.hpp"
#include "spdsheaf/geom.hpp"
#include "spdsheaf/sheaf.hpp"

namespace spdsheaf::io {

using Json = nlohmann::ordered_json;

/// Parses text; syntax errors become ParseError carrying the 1-based line.
Json parse_json(const std::string& text);
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const Json& j);

Json spd_to_json(const Spd& p, bool log_upper = false);
Spd spd_from_json(const Json& j);

struct SheafFile {
  SheafGraph sheaf;
  std::vector<std::int64_t> vertex_ids;  ///< external id of each internal vertex index
  std::optional<Cochain0> cochain0;
};

Json sheaf_to_json(const SheafGraph& sheaf, const std::vector<std::int64_t>& vertex_ids = {},
                   const Cochain0* cochain0 = nullptr, bool log_upper = false);
SheafFile sheaf_from_json(const Json& j);

Json cochain_to_json(const Cochain0& c, bool log_upper = false);
Cochain0 cochain_from_json(const Json& j);

Json point_cloud_to_json(const PointCloud& cloud);
PointCloud point_cloud_from_json(const Json& j);

std::vector<Segment> segments_from_json(const Json& j);
Json segments_to_json(const std::vector<Segment>& segments);

struct ParamsFile {
  std::uint64_t seed = 0;
  std::vector<LayerParams> layers;
};

Json params_to_json(const ParamsFile& params);
ParamsFile params_from_json(const Json& j);

}  // namespace spdsheaf::io
