#include "mrgc/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrgc/attack.hpp"
#include "mrgc/complexity.hpp"
#include "mrgc/condense.hpp"
#include "mrgc/curvature.hpp"
#include "mrgc/error.hpp"
#include "mrgc/graph.hpp"
#include "mrgc/intrinsic_dimension.hpp"
#include "mrgc/numerics.hpp"

namespace mrgc::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Reproducibility envelope embedded in every output file.
std::string manifest_member(const std::string& command, const std::vector<std::string>& inputs,
                            const std::string& config_snapshot, std::uint64_t seed) {
  ordered_json m;
  m["command"] = command;
  m["input_paths"] = inputs;
  m["config_snapshot"] = ordered_json::parse(config_snapshot);
  m["seed"] = seed;
  m["tool_version"] = tool_version;
  return "\"manifest\": " + m.dump();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open " + path + " for writing");
  out << text;
  if (!out) fail(ErrorKind::io, "failed writing " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

enum class RepresentationMode { automatic, message_passing, features };

RepresentationCloud make_cloud(const Graph& graph, RepresentationMode mode) {
  const bool use_graph = mode == RepresentationMode::message_passing ||
                         (mode == RepresentationMode::automatic && graph.num_edges() > 0);
  if (use_graph) return graph_cloud(graph);
  return RepresentationCloud{graph.features(), graph.labels()};
}

const std::map<std::string, RepresentationMode> representation_names{
    {"auto", RepresentationMode::automatic},
    {"message-passing", RepresentationMode::message_passing},
    {"features", RepresentationMode::features}};

std::string_view representation_name(RepresentationMode mode) {
  for (const auto& [name, m] : representation_names)
    if (m == mode) return name;
  return "auto";
}

struct Options {
  std::string input;
  std::string output;
  std::string history;
  std::string config_path;
  std::string kind = "feature";
  double budget_percent = 0.0;
  std::uint64_t seed = 0;
  std::size_t k = 8;
  std::optional<double> alpha, beta, gamma, ratio, lr, epsilon, ricci_alpha;
  std::optional<std::size_t> epochs, pca_dims, k_override;
  std::optional<std::string> grad_mode;
  std::size_t threads = 1;
  RepresentationMode representation = RepresentationMode::automatic;
};

int cmd_attack(const Options& o) {
  AttackSpec spec;
  spec.kind = parse_attack_kind(o.kind);
  spec.budget_percent = o.budget_percent;
  spec.seed = o.seed;
  const Graph attacked = apply_attack(load_graph(o.input), spec);
  save_graph(attacked, o.output, GraphFormat::json,
             manifest_member("attack", {o.input}, attack_spec_json(spec), spec.seed));
  return 0;
}

int cmd_condense(const Options& o) {
  CondenseConfig config;
  if (!o.config_path.empty()) config = parse_config(read_text(o.config_path));
  if (o.alpha) config.alpha = *o.alpha;
  if (o.beta) config.beta = *o.beta;
  if (o.gamma) config.gamma = *o.gamma;
  if (o.ratio) config.ratio = *o.ratio;
  if (o.lr) config.learning_rate = *o.lr;
  if (o.epsilon) config.epsilon = *o.epsilon;
  if (o.ricci_alpha) config.ricci.alpha = *o.ricci_alpha;
  if (o.epochs) config.epochs = *o.epochs;
  if (o.pca_dims) config.pca_dims = *o.pca_dims;
  if (o.k_override) config.k = *o.k_override;
  if (o.grad_mode) config.grad_mode = parse_grad_mode(*o.grad_mode);
  if (o.config_path.empty() || o.seed != 0) config.seed = o.seed;
  config.threads = o.threads;
  config.validate();

  const Graph graph = load_graph(o.input);
  const CondenseResult result = condense(graph, config);
  std::vector<std::string> inputs{o.input};
  if (!o.config_path.empty()) inputs.push_back(o.config_path);
  std::string manifest = manifest_member("condense", inputs, config_json(config), config.seed);
  ordered_json status;
  status["diverged"] = result.diverged;
  status["fallback_classes"] = result.init.fallback_classes;
  status["source_nodes"] = result.init.source_nodes;
  save_graph(result.condensed, o.output, manifest + ", \"run\": " + status.dump());

  if (!o.history.empty()) {
    std::string lines = "{" + manifest + "}\n";
    for (const auto& r : result.history) lines += report_line(r) + "\n";
    write_text(o.history, lines);
  }
  if (result.diverged) std::cerr << "warning: loss became non-finite; wrote the best iterate\n";
  return 0;
}

std::string metrics_snapshot(const Options& o) {
  ordered_json c;
  c["k"] = o.k;
  c["representation"] = std::string(representation_name(o.representation));
  return c.dump();
}

int cmd_metrics(const Options& o) {
  const Graph graph = load_graph(o.input);
  IdEstimatorConfig id;
  id.k = o.k;
  const ComplexityReport report = complexity_report(make_cloud(graph, o.representation), id);
  write_text(o.output, report_json(report, manifest_member("metrics", {o.input}, metrics_snapshot(o), o.seed)));
  return 0;
}

int cmd_id(const Options& o) {
  const Graph graph = load_graph(o.input);
  IdEstimatorConfig id;
  id.k = o.k;
  const double estimate = mle_id(make_cloud(graph, o.representation), id);
  write_text(o.output, "{\"id\": " + format_double(estimate) + ", " +
                           manifest_member("id", {o.input}, metrics_snapshot(o), o.seed) + "}\n");
  return 0;
}

int cmd_curvature(const Options& o) {
  const Graph graph = load_graph(o.input);
  RepresentationCloud cloud = make_cloud(graph, o.representation);
  const std::size_t pca = o.pca_dims.value_or(8);
  if (cloud.dim() > pca && cloud.size() >= 2) {
    cloud.points = pca_fit_transform(cloud.points, std::min(pca, cloud.size() - 1)).projected;
  }
  RicciConfig ricci;
  if (o.ricci_alpha) ricci.alpha = *o.ricci_alpha;
  const Graph aux = mutual_knn_graph(cloud.points, cloud.labels, o.k, graph.num_classes());
  const Vector kappa = node_ricci_all(aux, ricci);
  const auto table = curvature_table(cloud, kappa, o.k);

  std::string out = "{\"nodes\": [";
  double total = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table[i];
    if (i) out += ", ";
    out += "{\"node\": " + std::to_string(row.node) + ", \"label\": " + std::to_string(row.label) +
           ", \"gaussian_k\": " + format_double(row.gaussian_k) + ", \"ricci\": " +
           format_double(row.ricci) + ", \"weight\": " + format_double(row.weight) +
           ", \"fitted\": " + (row.fitted ? "true" : "false") + "}";
    total += row.weight * std::abs(row.gaussian_k);
  }
  ordered_json snapshot;
  snapshot["k"] = o.k;
  snapshot["representation"] = std::string(representation_name(o.representation));
  snapshot["pca_dims"] = pca;
  snapshot["ricci_alpha"] = ricci.alpha;
  out += "], \"loss_cur\": " + format_double(total) + ", " +
         manifest_member("curvature", {o.input}, snapshot.dump(), o.seed) + "}\n";
  write_text(o.output, out);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Manifold-constrained robust graph condensation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version);
  Options o;

  auto add_input = [&](CLI::App* sub) {
    sub->add_option("--input,-i", o.input, "graph JSON file or CSV-triplet directory")->required();
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "random seed")->envname("MRGC_SEED");
  };
  auto add_representation = [&](CLI::App* sub) {
    sub->add_option("--representation", o.representation,
                    "auto (A²X when the graph has edges, else X), message-passing, or features")
        ->transform(CLI::CheckedTransformer(representation_names, CLI::ignore_case));
  };

  auto* attack = app.add_subcommand("attack", "poison a graph");
  add_input(attack);
  attack->add_option("--output,-o", o.output, "attacked graph JSON")->required();
  attack->add_option("--kind", o.kind, "feature, label or structure")
      ->check(CLI::IsMember({"feature", "label", "structure"}));
  attack->add_option("--budget-percent", o.budget_percent, "attack budget p in [0, 100]")
      ->check(CLI::Range(0.0, 100.0));
  add_seed(attack);

  auto* cond = app.add_subcommand("condense", "synthesize a condensed graph");
  add_input(cond);
  cond->add_option("--output,-o", o.output, "condensed graph JSON")->required();
  cond->add_option("--history", o.history, "per-epoch loss reports, JSON lines");
  cond->add_option("--config", o.config_path, "condense config JSON; flags override it");
  cond->add_option("--alpha", o.alpha, "weight of L_dim");
  cond->add_option("--beta", o.beta, "weight of L_cur");
  cond->add_option("--gamma", o.gamma, "weight of L_sep");
  cond->add_option("--k", o.k_override, "neighbor count");
  cond->add_option("--ratio", o.ratio, "condensed size n'/n");
  cond->add_option("--epochs", o.epochs, "gradient steps");
  cond->add_option("--lr", o.lr, "learning rate");
  cond->add_option("--pca-dims", o.pca_dims, "dimension after PCA");
  cond->add_option("--epsilon", o.epsilon, "fixed kernel bandwidth (default: median heuristic)");
  cond->add_option("--ricci-alpha", o.ricci_alpha, "random-walk laziness");
  cond->add_option("--grad-mode", o.grad_mode, "analytic-backbone or full-numeric")
      ->check(CLI::IsMember({"analytic-backbone", "full-numeric"}));
  cond->add_option("--threads", o.threads, "finite-difference workers")->check(CLI::PositiveNumber);
  add_seed(cond);

  auto* metrics = app.add_subcommand("metrics", "ID, FDR, FHC and manifold volumes");
  add_input(metrics);
  metrics->add_option("--output,-o", o.output, "report JSON (default stdout)");
  metrics->add_option("--k", o.k, "neighbor count of the ID estimator");
  add_representation(metrics);
  add_seed(metrics);

  auto* curv = app.add_subcommand("curvature", "per-node Gaussian and Ricci curvature");
  add_input(curv);
  curv->add_option("--output,-o", o.output, "table JSON (default stdout)");
  curv->add_option("--k", o.k, "neighbor count");
  curv->add_option("--pca-dims", o.pca_dims, "dimension after PCA");
  curv->add_option("--ricci-alpha", o.ricci_alpha, "random-walk laziness");
  add_representation(curv);
  add_seed(curv);

  auto* id = app.add_subcommand("id", "maximum-likelihood intrinsic dimension");
  add_input(id);
  id->add_option("--output,-o", o.output, "result JSON (default stdout)");
  id->add_option("--k", o.k, "neighbor count");
  add_representation(id);
  add_seed(id);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*attack) return cmd_attack(o);
    if (*cond) return cmd_condense(o);
    if (*metrics) return cmd_metrics(o);
    if (*curv) return cmd_curvature(o);
    if (*id) return cmd_id(o);
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"mrgc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace mrgc::cli
