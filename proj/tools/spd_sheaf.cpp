#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdsheaf/covgraph.hpp"
#include "spdsheaf/errors.hpp"
#include "spdsheaf/geom.hpp"
#include "spdsheaf/io.hpp"
#include "spdsheaf/probe.hpp"
#include "spdsheaf/sheaf.hpp"
#include "spdsheaf/verify.hpp"

namespace fs = std::filesystem;
using namespace spdsheaf;
using io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json sym_upper_json(const Sym& s) {
  Json out = Json::array();
  const auto& m = s.matrix();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

struct VerifyArgs {
  bool all = false;
  std::vector<std::string> checks;
  std::vector<Index> n;
  std::optional<std::uint64_t> seed;
  std::optional<Index> max_vertices;
  std::vector<std::string> trials;
  std::vector<std::string> tolerances;
  std::optional<std::string> dump_dir;
  bool corrupt_map = false;
  std::optional<unsigned> threads;
  std::string config;
  std::string report;
  bool json_only = false;
};

std::pair<std::string, std::string> split_assignment(const std::string& text, const char* flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
    throw UsageError(std::string(flag) + " expects CHECK=VALUE, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

bool is_check(const std::string& name) {
  const auto& names = verify::check_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

int cmd_verify(const VerifyArgs& args) {
  verify::SuiteConfig cfg;
  if (!args.config.empty()) {
    cfg = verify::suite_config_from_json(io::read_json_file(args.config).dump());
  }
  if (!args.checks.empty()) {
    for (const auto& c : args.checks) {
      if (!is_check(c)) throw UsageError("unknown check '" + c + "'");
    }
    cfg.checks = args.checks;
  } else if (args.all) {
    cfg.checks.clear();
  } else if (args.config.empty()) {
    throw UsageError("verify needs --all, --check or --config");
  }
  if (!args.n.empty()) {
    for (Index n : args.n) {
      if (n < 1 || n > 13) throw UsageError("--n must be in [1, 13]");
    }
    cfg.stalk_dims = args.n;
  }
  if (args.seed) cfg.seed = *args.seed;
  if (args.max_vertices) {
    if (*args.max_vertices < 2) throw UsageError("--max-vertices must be at least 2");
    cfg.max_vertices = *args.max_vertices;
  }
  for (const auto& t : args.trials) {
    const auto [name, value] = split_assignment(t, "--trials");
    if (!is_check(name)) throw UsageError("unknown check '" + name + "'");
    const long count = std::stol(value);
    if (count < 1) throw UsageError("--trials counts must be positive");
    cfg.trials[name] = count;
  }
  for (const auto& t : args.tolerances) {
    const auto [name, value] = split_assignment(t, "--tolerance");
    if (!is_check(name)) throw UsageError("unknown check '" + name + "'");
    const double tol = std::stod(value);
    if (!(tol >= 0.0)) throw UsageError("tolerances must be non-negative");
    cfg.tolerances.set(name, tol);
  }
  if (args.dump_dir) cfg.dump_dir = fs::path(*args.dump_dir);
  if (args.corrupt_map) cfg.corrupt_map = true;
  if (args.threads) cfg.threads = *args.threads;

  const auto result = verify::run_suite(cfg);
  const std::string json = verify::report_json(result);
  if (!args.report.empty()) io::write_text_file(args.report, json);
  if (!args.json_only) std::cout << verify::report_table(result) << '\n';
  std::cout << json;
  return result.exit_code == 0 ? kExitOk : kExitCheckFailed;
}

SheafGraph component_subsheaf(const SheafGraph& sheaf, const std::vector<Index>& labels, Index label) {
  std::vector<Index> local(labels.size(), -1);
  Index count = 0;
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (labels[v] == label) local[v] = count++;
  }
  std::vector<SheafEdge> edges;
  for (const auto& e : sheaf.edges()) {
    if (labels[static_cast<std::size_t>(e.tail)] != label) continue;
    edges.push_back({local[static_cast<std::size_t>(e.tail)], local[static_cast<std::size_t>(e.head)],
                     e.map_tail, e.map_head});
  }
  return SheafGraph(sheaf.stalk_dim(), count, std::move(edges));
}

int cmd_sections(const std::string& path, double tol, const std::string& out) {
  if (!(tol > 0.0 && tol < 1.0)) throw UsageError("--tol must be in (0, 1)");
  const auto file = io::sheaf_from_json(io::read_json_file(path));
  const auto& sheaf = file.sheaf;
  const Index n = sheaf.stalk_dim();

  const MatrixXd basis = global_sections(sheaf, tol);
  Json sections = Json::array();
  for (Index k = 0; k < basis.cols(); ++k) {
    const auto logs = unstack_logs(basis.col(k), n);
    Json vertices = Json::array();
    for (const auto& s : logs) vertices.push_back(sym_upper_json(s));
    Json residuals = Json::array();
    for (const auto& d : log_coboundary(sheaf, logs)) residuals.push_back(d.matrix().norm());
    sections.push_back(Json{{"log_upper", vertices}, {"edge_residuals", residuals}});
  }

  const auto labels = connected_components(sheaf.num_vertices(), sheaf.edge_pairs());
  const Index components =
      labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  Json fixed_dims = Json::array();
  Index fixed_total = 0;
  for (Index c = 0; c < components; ++c) {
    const auto sub = component_subsheaf(sheaf, labels, c);
    const Index dim = holonomy_fixed_space(holonomy_reps(sub), n, tol).cols();
    fixed_dims.push_back(dim);
    fixed_total += dim;
  }

  Json report;
  report["n_stalk"] = n;
  report["num_vertices"] = sheaf.num_vertices();
  report["num_edges"] = sheaf.num_edges();
  report["tolerance"] = tol;
  report["kernel_dim"] = basis.cols();
  report["index"] = sheaf_index(sheaf, tol);
  report["components"] = components;
  report["holonomy_fixed_dims"] = fixed_dims;
  report["holonomy_fixed_dim"] = fixed_total;
  report["basis"] = sections;
  const std::string text = dump(report);
  if (!out.empty()) io::write_text_file(out, text);
  std::cout << text;
  return kExitOk;
}

struct DiffuseArgs {
  std::string cloud;
  std::uint64_t seed = 0;
  Index layers = 2;
  bool identity_maps = false;
  bool no_residual = false;
  bool no_normalize = false;
  bool no_tg_re_eig = false;
  bool canonicalize = false;
  std::string out_dir = ".";
};

int cmd_diffuse(const DiffuseArgs& args) {
  if (args.layers < 0) throw UsageError("--layers must be non-negative");
  const auto cloud = io::point_cloud_from_json(io::read_json_file(args.cloud));
  if (cloud.points.empty()) throw InvalidInput("diffuse: point cloud is empty");

  io::ParamsFile params;
  params.seed = args.seed;
  params.layers = args.identity_maps ? std::vector<LayerParams>(static_cast<std::size_t>(args.layers),
                                                                LayerParams::identity(3))
                                     : random_layers(args.layers, 3, args.seed);
  LayerOptions options;
  options.identity_maps = args.identity_maps;
  options.rule = args.no_residual ? UpdateRule::kNeighborMean : UpdateRule::kLieResidual;
  options.normalize = !args.no_normalize;
  options.apply_tg_re_eig = !args.no_tg_re_eig;

  const auto run = run_stream(cloud.topology(), geometric_input(cloud, args.canonicalize), params.layers, options);
  const fs::path dir(args.out_dir);
  const std::string csv = run.trace.to_csv();
  io::write_text_file(dir / "rank_trace.csv", csv);
  io::write_text_file(dir / "final_cochain.json", dump(io::cochain_to_json(run.states.back())));
  io::write_text_file(dir / "params.json", dump(io::params_to_json(params)));
  std::cout << csv;
  return kExitOk;
}

struct ProbeArgs {
  std::uint64_t seed = 0;
  int repeats = 3;
  Index samples = 200;
  Index points = 20;
  Index layers = 2;
  double theta = 0.5;
  bool canonicalize = false;
  bool shuffle_labels = false;
  std::string data;
  std::string out;
};

LabeledSet labeled_set_from_json(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw InvalidInput(std::string("probe data: missing array '") + key + "'");
  }
  LabeledSet set;
  for (const auto& item : j.at(key)) {
    if (!item.is_object() || !item.contains("features") || !item.contains("label")) {
      throw InvalidInput("probe data: each sample needs 'features' and 'label'");
    }
    set.features.push_back(io::vector_from_json(item.at("features")));
    if (!item.at("label").is_number_integer()) throw InvalidInput("probe data: labels must be integers");
    set.labels.push_back(item.at("label").get<int>());
  }
  return set;
}

int cmd_probe(const ProbeArgs& args) {
  Json report;
  report["seed"] = args.seed;
  if (!args.data.empty()) {
    const Json data = io::read_json_file(args.data);
    const auto result =
        linear_probe(labeled_set_from_json(data, "train"), labeled_set_from_json(data, "test"));
    report["train_accuracy"] = result.train_accuracy;
    report["test_accuracy"] = result.test_accuracy;
  } else {
    if (args.repeats < 3) throw UsageError("--repeats must be at least 3");
    if (args.samples < 2) throw UsageError("--samples must be at least 2");
    if (args.points < 4) throw UsageError("--points must be at least 4");
    if (!(args.theta > 0.0 && args.theta <= 1.0)) throw UsageError("--theta must be in (0, 1]");
    PlanarityTask task;
    task.seed = args.seed;
    task.samples_per_class = args.samples;
    task.points = args.points;
    task.layers = args.layers;
    task.theta = args.theta;
    task.canonicalize = args.canonicalize;
    task.shuffle_labels = args.shuffle_labels;
    const auto result = run_planarity_probe(task, args.repeats);
    report["repeats"] = args.repeats;
    report["samples_per_class"] = args.samples;
    report["points"] = args.points;
    report["layers"] = args.layers;
    report["theta"] = args.theta;
    report["canonicalize"] = args.canonicalize;
    report["shuffle_labels"] = args.shuffle_labels;
    report["train_accuracies"] = result.train_accuracies;
    report["test_accuracies"] = result.test_accuracies;
    report["mean_test"] = result.mean_test;
    report["sd_test"] = result.sd_test;
  }
  const std::string text = dump(report);
  if (!args.out.empty()) io::write_text_file(args.out, text);
  std::cout << text;
  return kExitOk;
}

struct CovgraphArgs {
  std::string segments;
  TFGraphConfig cfg;
  std::string out_dir = ".";
};

int cmd_covgraph(const CovgraphArgs& args) {
  args.cfg.validate();
  const auto segments = io::segments_from_json(io::read_json_file(args.segments));
  const auto g = build_tf_graph(segments, args.cfg);

  Json weights;
  Json list = Json::array();
  for (std::size_t e = 0; e < g.weights.size(); ++e) {
    const auto& edge = g.graph.edge(static_cast<Index>(e));
    list.push_back(Json{{"tail", edge.tail}, {"head", edge.head}, {"weight", g.weights[e]}});
  }
  weights["edges"] = list;
  const fs::path dir(args.out_dir);
  io::write_text_file(dir / "graph.json", dump(io::sheaf_to_json(g.graph, {}, &g.nodes)));
  io::write_text_file(dir / "weights.json", dump(weights));

  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17);
  out << "vertices " << g.graph.num_vertices() << '\n' << "edges " << g.graph.num_edges() << '\n';
  if (!g.weights.empty()) {
    double sum = 0.0;
    for (double w : g.weights) sum += w;
    out << "weight_min " << *std::min_element(g.weights.begin(), g.weights.end()) << '\n'
        << "weight_mean " << sum / static_cast<double>(g.weights.size()) << '\n'
        << "weight_max " << *std::max_element(g.weights.begin(), g.weights.end()) << '\n';
  }
  std::cout << out.str();
  return kExitOk;
}

int cmd_lift(const std::string& cloud_path, bool canonicalize_frames, bool log_upper, const std::string& out) {
  const auto cloud = io::point_cloud_from_json(io::read_json_file(cloud_path));
  if (cloud.points.empty()) throw InvalidInput("lift: point cloud is empty");
  const auto sigma = geometric_input(cloud, canonicalize_frames);
  Index fallback = 0;
  if (canonicalize_frames) {
    for (const auto& f : local_frames(cloud)) fallback += f.fallback ? 1 : 0;
  }
  const std::string text = dump(io::cochain_to_json(sigma, log_upper));
  if (out.empty()) {
    std::cout << text;
    return kExitOk;
  }
  io::write_text_file(out, text);
  const auto row = rank_row(0, sigma);
  std::ostringstream summary;
  summary.imbue(std::locale::classic());
  summary << std::setprecision(17) << "vertices " << sigma.size() << '\n'
          << "mean_erank " << row.mean_erank << '\n'
          << "fallback_frames " << fallback << '\n';
  std::cout << summary.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPD-valued sheaves: verification, sections, diffusion, probes and covariance graphs"};
  app.require_subcommand(1);

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "run the property suite against brute-force oracles");
  verify->add_flag("--all", verify_args.all, "run every check");
  verify->add_option("--check", verify_args.checks, "check to run (repeatable)");
  verify->add_option("--n", verify_args.n, "stalk dimension (repeatable)");
  verify->add_option("--seed", verify_args.seed, "suite seed (default 42)");
  verify->add_option("--max-vertices", verify_args.max_vertices, "largest random graph");
  verify->add_option("--trials", verify_args.trials, "CHECK=COUNT override (repeatable)");
  verify->add_option("--tolerance", verify_args.tolerances, "CHECK=VALUE override (repeatable)");
  verify->add_option("--dump-dir", verify_args.dump_dir, "write failing instances here");
  verify->add_flag("--corrupt-map", verify_args.corrupt_map, "feed a non-orthogonal map to the isometry check");
  verify->add_option("--threads", verify_args.threads, "worker threads (default SPD_SHEAF_THREADS)");
  verify->add_option("--config", verify_args.config, "suite config JSON; flags override its keys");
  verify->add_option("--report", verify_args.report, "also write the verdict JSON here");
  verify->add_flag("--json", verify_args.json_only, "print only the verdict JSON");

  std::string sections_path;
  std::string sections_out;
  double sections_tol = kRankTolerance;
  auto* sections = app.add_subcommand("sections", "global sections, index and holonomy of a sheaf file");
  sections->add_option("sheaf", sections_path, "sheaf JSON")->required();
  sections->add_option("--tol", sections_tol, "relative rank tolerance");
  sections->add_option("--out", sections_out, "also write the report here");

  DiffuseArgs diffuse_args;
  auto* diffuse = app.add_subcommand("diffuse", "run the geometric stream and write the rank trace");
  diffuse->add_option("cloud", diffuse_args.cloud, "point cloud JSON")->required();
  diffuse->add_option("--seed", diffuse_args.seed, "layer parameter seed")->required();
  diffuse->add_option("--layers", diffuse_args.layers, "number of layers");
  diffuse->add_flag("--identity-maps", diffuse_args.identity_maps, "identity isometry and restriction maps");
  diffuse->add_flag("--no-residual", diffuse_args.no_residual, "neighbourhood-mean update instead of the residual");
  diffuse->add_flag("--no-normalize", diffuse_args.no_normalize, "do not rescale the update");
  diffuse->add_flag("--no-tg-re-eig", diffuse_args.no_tg_re_eig, "skip the eigenvalue floor");
  diffuse->add_flag("--canonicalize", diffuse_args.canonicalize, "express the lift in local frames");
  diffuse->add_option("--out-dir", diffuse_args.out_dir, "output directory");

  ProbeArgs probe_args;
  auto* probe = app.add_subcommand("probe", "linear probe on pooled descriptors");
  probe->add_option("--seed", probe_args.seed, "task seed")->required();
  probe->add_option("--repeats", probe_args.repeats, "independent repeats (at least 3)");
  probe->add_option("--samples", probe_args.samples, "clouds per class");
  probe->add_option("--points", probe_args.points, "points per cloud");
  probe->add_option("--layers", probe_args.layers, "stream layers");
  probe->add_option("--theta", probe_args.theta, "power-mean exponent");
  probe->add_flag("--canonicalize", probe_args.canonicalize, "express lifts in local frames");
  probe->add_flag("--shuffle-labels", probe_args.shuffle_labels, "label-permutation control");
  probe->add_option("--data", probe_args.data, "probe a labelled feature file instead");
  probe->add_option("--out", probe_args.out, "also write the report here");

  CovgraphArgs covgraph_args;
  auto* covgraph = app.add_subcommand("covgraph", "time-frequency covariance graph from segments");
  covgraph->add_option("segments", covgraph_args.segments, "segments JSON")->required();
  covgraph->add_option("--eps1", covgraph_args.cfg.eps1, "time window (s)");
  covgraph->add_option("--eps2", covgraph_args.cfg.eps2, "frequency window (Hz)");
  covgraph->add_option("--eps", covgraph_args.cfg.eps, "squared AIRM threshold");
  covgraph->add_option("--t-bw", covgraph_args.cfg.t_bw, "RBF bandwidth");
  covgraph->add_option("--shrinkage", covgraph_args.cfg.shrinkage, "trace-scaled ridge");
  covgraph->add_flag("--normalize-by-samples", covgraph_args.cfg.normalize_by_samples, "divide X X^T by T");
  covgraph->add_option("--out-dir", covgraph_args.out_dir, "output directory");

  std::string lift_path;
  std::string lift_out;
  bool lift_canonicalize = false;
  bool lift_log_upper = false;
  auto* lift = app.add_subcommand("lift", "lift a point cloud to an SPD cochain");
  lift->add_option("cloud", lift_path, "point cloud JSON")->required();
  lift->add_flag("--canonicalize", lift_canonicalize, "express the lift in local frames");
  lift->add_flag("--log-upper", lift_log_upper, "write values in log_upper form");
  lift->add_option("--out", lift_out, "output file (default standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (verify->parsed()) return cmd_verify(verify_args);
    if (sections->parsed()) return cmd_sections(sections_path, sections_tol, sections_out);
    if (diffuse->parsed()) return cmd_diffuse(diffuse_args);
    if (probe->parsed()) return cmd_probe(probe_args);
    if (covgraph->parsed()) return cmd_covgraph(covgraph_args);
    if (lift->parsed()) return cmd_lift(lift_path, lift_canonicalize, lift_log_upper, lift_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
