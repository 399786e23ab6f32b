#include "spdsheaf/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "spdsheaf/symvec.hpp"

namespace spdsheaf::io {

namespace {

std::size_t line_of(const std::string& text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidInput(std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw InvalidInput(std::string(what) + ": expected a number");
  return j.get<double>();
}

std::int64_t integer(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw InvalidInput(std::string(what) + ": expected an integer");
  return j.get<std::int64_t>();
}

}  // namespace

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t line = line_of(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("JSON parse error at line " + std::to_string(line) + ": " + e.what(), line);
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

Json matrix_to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw InvalidInput("matrix: expected a non-empty array of rows");
  }
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j.front().size());
  MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw InvalidInput("matrix: ragged rows");
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], "matrix entry");
  }
  return m;
}

Json vector_to_json(const VectorXd& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw InvalidInput("vector: expected an array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], "vector entry");
  return v;
}

Json spd_to_json(const Spd& p, bool as_log_upper) {
  if (as_log_upper) return Json{{"log_upper", vector_to_json(log_upper(p))}};
  return matrix_to_json(p.matrix());
}

Spd spd_from_json(const Json& j) {
  if (j.is_object()) return from_log_upper<double>(vector_from_json(field(j, "log_upper")));
  return Spd(matrix_from_json(j));
}

Json cochain_to_json(const Cochain0& c, bool as_log_upper) {
  Json out = Json::array();
  for (const auto& v : c.values) out.push_back(spd_to_json(v, as_log_upper));
  return out;
}

Cochain0 cochain_from_json(const Json& j) {
  const Json& arr = j.is_object() ? field(j, "values") : j;
  if (!arr.is_array()) throw InvalidInput("cochain: expected an array of SPD values");
  std::vector<Spd> values;
  for (const auto& v : arr) values.push_back(spd_from_json(v));
  return Cochain0(std::move(values));
}

Json sheaf_to_json(const SheafGraph& sheaf, const std::vector<std::int64_t>& vertex_ids,
                   const Cochain0* cochain0, bool as_log_upper) {
  std::vector<std::int64_t> ids = vertex_ids;
  if (ids.empty()) {
    for (Index v = 0; v < sheaf.num_vertices(); ++v) ids.push_back(v);
  }
  if (static_cast<Index>(ids.size()) != sheaf.num_vertices()) {
    throw DimensionMismatch("sheaf_to_json: one id per vertex required");
  }
  Json out;
  out["n_stalk"] = sheaf.stalk_dim();
  out["vertices"] = ids;
  Json edges = Json::array();
  for (const auto& e : sheaf.edges()) {
    edges.push_back({{"tail", ids[static_cast<std::size_t>(e.tail)]},
                     {"head", ids[static_cast<std::size_t>(e.head)]},
                     {"map_tail", matrix_to_json(e.map_tail.matrix())},
                     {"map_head", matrix_to_json(e.map_head.matrix())}});
  }
  out["edges"] = std::move(edges);
  if (cochain0 != nullptr) out["cochain0"] = cochain_to_json(*cochain0, as_log_upper);
  return out;
}

SheafFile sheaf_from_json(const Json& j) {
  SheafFile file;
  const Index n = integer(field(j, "n_stalk"), "n_stalk");
  if (n < 1) throw InvalidInput("n_stalk must be positive");
  const Json& vertices = field(j, "vertices");
  if (!vertices.is_array()) throw InvalidInput("vertices: expected an array of ids");
  std::map<std::int64_t, Index> index_of;
  for (const auto& v : vertices) {
    const std::int64_t id = integer(v, "vertex id");
    if (!index_of.emplace(id, static_cast<Index>(file.vertex_ids.size())).second) {
      throw InvalidInput("duplicate vertex id " + std::to_string(id));
    }
    file.vertex_ids.push_back(id);
  }
  auto lookup = [&](const Json& id) {
    const auto it = index_of.find(integer(id, "edge endpoint"));
    if (it == index_of.end()) throw InvalidInput("edge references unknown vertex " + id.dump());
    return it->second;
  };
  std::vector<SheafEdge> edges;
  const Json& ej = field(j, "edges");
  if (!ej.is_array()) throw InvalidInput("edges: expected an array");
  for (const auto& e : ej) {
    SheafEdge edge;
    edge.tail = lookup(field(e, "tail"));
    edge.head = lookup(field(e, "head"));
    edge.map_tail = e.contains("map_tail") ? Orth(matrix_from_json(e.at("map_tail"))) : Orth::identity(n);
    edge.map_head = e.contains("map_head") ? Orth(matrix_from_json(e.at("map_head"))) : Orth::identity(n);
    edges.push_back(std::move(edge));
  }
  file.sheaf = SheafGraph(n, static_cast<Index>(file.vertex_ids.size()), std::move(edges));
  if (j.contains("cochain0") && !j.at("cochain0").is_null()) {
    Cochain0 c = cochain_from_json(j.at("cochain0"));
    if (c.size() != file.sheaf.num_vertices()) {
      throw InvalidInput("cochain0 must assign a value to every vertex");
    }
    for (const auto& v : c.values) {
      if (v.dim() != n) throw DimensionMismatch("cochain0 value has the wrong dimension");
    }
    file.cochain0 = std::move(c);
  }
  return file;
}

Json point_cloud_to_json(const PointCloud& cloud) {
  Json vertices = Json::array();
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    vertices.push_back({{"id", i}, {"xyz", {p.x(), p.y(), p.z()}}});
  }
  Json edges = Json::array();
  for (const auto& [a, b] : cloud.edges) edges.push_back({a, b});
  return Json{{"vertices", vertices}, {"edges", edges}};
}

PointCloud point_cloud_from_json(const Json& j) {
  PointCloud cloud;
  std::map<std::int64_t, Index> index_of;
  const Json& vertices = field(j, "vertices");
  if (!vertices.is_array()) throw InvalidInput("vertices: expected an array");
  for (const auto& v : vertices) {
    const Json& xyz = v.is_object() ? field(v, "xyz") : v;
    const std::int64_t id = v.is_object() && v.contains("id") ? integer(v.at("id"), "vertex id")
                                                               : static_cast<std::int64_t>(cloud.points.size());
    if (!xyz.is_array() || xyz.size() != 3) throw InvalidInput("xyz: expected three coordinates");
    if (!index_of.emplace(id, static_cast<Index>(cloud.points.size())).second) {
      throw InvalidInput("duplicate vertex id " + std::to_string(id));
    }
    cloud.points.emplace_back(number(xyz[0], "x"), number(xyz[1], "y"), number(xyz[2], "z"));
  }
  auto lookup = [&](const Json& id) {
    const auto it = index_of.find(integer(id, "edge endpoint"));
    if (it == index_of.end()) throw InvalidInput("edge references unknown vertex " + id.dump());
    return it->second;
  };
  if (j.contains("edges")) {
    for (const auto& e : j.at("edges")) {
      Index a = 0;
      Index b = 0;
      if (e.is_array() && e.size() == 2) {
        a = lookup(e[0]);
        b = lookup(e[1]);
      } else {
        a = lookup(field(e, "tail"));
        b = lookup(field(e, "head"));
      }
      if (a == b) throw InvalidInput("point cloud edge is a self-loop");
      cloud.edges.emplace_back(a, b);
    }
  }
  return cloud;
}

std::vector<Segment> segments_from_json(const Json& j) {
  const Json& arr = j.is_object() ? field(j, "segments") : j;
  if (!arr.is_array()) throw InvalidInput("segments: expected an array");
  std::vector<Segment> out;
  for (const auto& s : arr) {
    Segment seg;
    seg.t_mid = number(field(s, "t_mid"), "t_mid");
    seg.f_mid = number(field(s, "f_mid"), "f_mid");
    seg.data = matrix_from_json(field(s, "data"));
    out.push_back(std::move(seg));
  }
  return out;
}

Json segments_to_json(const std::vector<Segment>& segments) {
  Json arr = Json::array();
  for (const auto& s : segments) {
    arr.push_back({{"t_mid", s.t_mid}, {"f_mid", s.f_mid}, {"data", matrix_to_json(s.data)}});
  }
  return Json{{"segments", arr}};
}

Json params_to_json(const ParamsFile& params) {
  Json layers = Json::array();
  Index n = 3;
  Index hidden = kDefaultHiddenWidth;
  for (const auto& l : params.layers) {
    n = l.stalk_dim;
    hidden = l.mlp.hidden_weight.rows();
    layers.push_back({{"isometry_seed", matrix_to_json(l.isometry_seed)},
                      {"hidden_weight", matrix_to_json(l.mlp.hidden_weight)},
                      {"hidden_bias", vector_to_json(l.mlp.hidden_bias)},
                      {"tail_weight", matrix_to_json(l.mlp.tail_weight)},
                      {"tail_bias", vector_to_json(l.mlp.tail_bias)},
                      {"head_weight", matrix_to_json(l.mlp.head_weight)},
                      {"head_bias", vector_to_json(l.mlp.head_bias)}});
  }
  return Json{{"seed", params.seed}, {"stalk_dim", n}, {"hidden", hidden}, {"layers", layers}};
}

ParamsFile params_from_json(const Json& j) {
  ParamsFile out;
  out.seed = static_cast<std::uint64_t>(integer(field(j, "seed"), "seed"));
  const Index n = integer(field(j, "stalk_dim"), "stalk_dim");
  for (const auto& l : field(j, "layers")) {
    LayerParams p;
    p.stalk_dim = n;
    p.isometry_seed = matrix_from_json(field(l, "isometry_seed"));
    p.mlp.hidden_weight = matrix_from_json(field(l, "hidden_weight"));
    p.mlp.hidden_bias = vector_from_json(field(l, "hidden_bias"));
    p.mlp.tail_weight = matrix_from_json(field(l, "tail_weight"));
    p.mlp.tail_bias = vector_from_json(field(l, "tail_bias"));
    p.mlp.head_weight = matrix_from_json(field(l, "head_weight"));
    p.mlp.head_bias = vector_from_json(field(l, "head_bias"));
    p.validate();
    out.layers.push_back(std::move(p));
  }
  return out;
}

}  // namespace spdsheaf::io
