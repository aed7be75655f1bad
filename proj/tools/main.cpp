// lipbound: command-line front end. Every analysis prints a BoundReport as
// text, or as canonical JSON with --json. Exit codes: 0 ok, 2 bad input,
// 3 numerical failure.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <lipbound/error.hpp>
#include <lipbound/graph.hpp>
#include <lipbound/io.hpp>
#include <lipbound/lower.hpp>
#include <lipbound/seqlip.hpp>
#include <lipbound/spectral.hpp>

using namespace lipbound;

namespace {

constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

struct PowerFlags {
  int max_iters = PowerConfig{}.max_iters;
  double tol = PowerConfig{}.tol;

  void attach(CLI::App* cmd) {
    cmd->add_option("--power-iters", max_iters, "Power-method iteration cap")->capture_default_str();
    cmd->add_option("--power-tol", tol, "Power-method relative tolerance")->capture_default_str();
  }
  PowerConfig config(std::uint64_t seed) const {
    PowerConfig cfg;
    cfg.max_iters = max_iters;
    cfg.tol = tol;
    cfg.seed = seed;
    return cfg;
  }
};

void emit(const BoundReport& report, bool json) {
  if (json) {
    std::cout << report.to_json().dump() << '\n';
  } else {
    std::cout << report.to_text();
  }
}

SearchDomain parse_domain(const std::vector<double>& flat, Eigen::Index dim) {
  if (flat.empty()) return SearchDomain::cube(dim);
  if (flat.size() % 2 != 0) throw Error(ErrorCode::InvalidArgument, "--domain takes lo hi pairs");
  const auto pairs = static_cast<Eigen::Index>(flat.size() / 2);
  if (pairs == 1) return SearchDomain::cube(dim, flat[0], flat[1]);
  if (pairs != dim) {
    throw Error(ErrorCode::ShapeMismatch, "--domain given for " + std::to_string(pairs) + " axes, the model has " +
                                              std::to_string(dim) + " inputs");
  }
  SearchDomain d{Vector(dim), Vector(dim)};
  for (Eigen::Index i = 0; i < dim; ++i) {
    d.lo[i] = flat[2 * static_cast<std::size_t>(i)];
    d.hi[i] = flat[2 * static_cast<std::size_t>(i) + 1];
  }
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Upper and lower bounds on the Lipschitz constant of neural networks"};
  app.require_subcommand(1);
  bool json = false;
  std::uint64_t seed = 0;
  PowerFlags power;

  std::string model;
  auto add_model = [&](CLI::App* cmd) {
    cmd->add_option("model", model, "Model file (.lnm)")->required();
    cmd->add_flag("--json", json, "Print canonical JSON");
  };

  auto* autolip_cmd = app.add_subcommand("autolip", "AutoLip bound: product of layer spectral norms");
  add_model(autolip_cmd);
  autolip_cmd->add_option("--seed", seed, "Power-method seed");
  power.attach(autolip_cmd);

  auto* seqlip_cmd = app.add_subcommand("seqlip", "SeqLip bound (exact enumeration or greedy ascent)");
  add_model(seqlip_cmd);
  std::string mode = "exact";
  SeqLipOptions sl;
  seqlip_cmd->add_option("--mode", mode)->check(CLI::IsMember({"exact", "greedy"}))->capture_default_str();
  seqlip_cmd->add_option("--rank", sl.rank, "Truncation rank E")->capture_default_str();
  seqlip_cmd->add_option("--restarts", sl.restarts)->capture_default_str();
  seqlip_cmd->add_option("--steps", sl.steps)->capture_default_str();
  seqlip_cmd->add_option("--width-limit", sl.width_limit)->capture_default_str();
  seqlip_cmd->add_option("--seed", seed);
  power.attach(seqlip_cmd);

  auto* lower_cmd = app.add_subcommand("lower", "Lower bound from Jacobian norms at searched points");
  add_model(lower_cmd);
  std::string method = "annealing";
  std::vector<double> domain_flat;
  int resolution = 50;
  AnnealingSchedule schedule;
  std::string points_path;
  lower_cmd->add_option("--method", method)->check(CLI::IsMember({"grid", "annealing", "dataset"}))->capture_default_str();
  lower_cmd->add_option("--domain", domain_flat, "lo hi (broadcast) or one pair per axis")->expected(2, CLI::detail::expected_max_vector_size)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  lower_cmd->add_option("--resolution", resolution, "Grid points per axis")->capture_default_str();
  lower_cmd->add_option("--proposals", schedule.proposals, "Annealing proposals")->capture_default_str();
  lower_cmd->add_option("--seed", seed);
  lower_cmd->add_option("--points", points_path, "CSV file, one point per row (dataset; annealing start)");
  power.attach(lower_cmd);

  auto* spectra_cmd = app.add_subcommand("spectra", "Leading singular values of one affine layer");
  add_model(spectra_cmd);
  std::size_t layer = 0;
  int topk = 1;
  spectra_cmd->add_option("--layer", layer, "Affine layer index (0-based)")->capture_default_str();
  spectra_cmd->add_option("--topk", topk)->capture_default_str();
  spectra_cmd->add_option("--seed", seed);
  power.attach(spectra_cmd);

  auto* frob_cmd = app.add_subcommand("frobenius", "Product of Frobenius norms");
  add_model(frob_cmd);

  auto* gen_cmd = app.add_subcommand("gen", "Generate a model file");
  std::vector<double> ideal;
  std::vector<int> mlp;
  int cnn_depth = 0;
  std::string out_path, activation = "relu";
  auto* ideal_opt = gen_cmd->add_option("--ideal", ideal, "K N R: ideal-scenario net")->expected(3);
  auto* mlp_opt = gen_cmd->add_option("--mlp", mlp, "Comma separated widths, input first")->delimiter(',');
  auto* cnn_opt = gen_cmd->add_option("--cnn", cnn_depth, "CNN family depth (>= 4)");
  ideal_opt->excludes(mlp_opt, cnn_opt);
  mlp_opt->excludes(cnn_opt);
  gen_cmd->add_option("--activation", activation, "Activation for --mlp")->capture_default_str();
  gen_cmd->add_option("--seed", seed);
  gen_cmd->add_option("-o,--output", out_path)->required();
  gen_cmd->add_flag("--json", json);

  auto* graph_cmd = app.add_subcommand("graph", "AutoLip on a JSON graph description");
  graph_cmd->add_option("graph", model, "Graph description (.json)")->required();
  graph_cmd->add_flag("--json", json);
  graph_cmd->add_option("--seed", seed);
  power.attach(graph_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    const PowerConfig cfg = power.config(seed);
    if (*autolip_cmd) {
      emit(autolip_sequential(load_lnm(model), cfg), json);
    } else if (*seqlip_cmd) {
      sl.seed = seed;
      sl.power = cfg;
      const auto net = load_lnm(model);
      emit(mode == "exact" ? seqlip_exact(net, sl) : seqlip_greedy(net, sl), json);
    } else if (*lower_cmd) {
      const auto net = load_lnm(model);
      const auto domain = parse_domain(domain_flat, net.in_dim());
      std::vector<Vector> points;
      if (!points_path.empty()) points = load_points_csv(points_path);
      if (method == "grid") {
        emit(grid_lower_bound(net, domain, resolution, cfg), json);
      } else if (method == "dataset") {
        emit(dataset_lower_bound(net, points, cfg), json);
      } else {
        schedule.seed = seed;
        if (!points.empty()) {
          const auto ds = dataset_lower_bound(net, points, cfg);
          schedule.start = points[ds.config["argmax_index"].get<std::size_t>()];
        }
        emit(annealing_lower_bound(net, domain, schedule, cfg), json);
      }
    } else if (*spectra_cmd) {
      emit(layer_spectrum(load_lnm(model), layer, topk, cfg), json);
    } else if (*frob_cmd) {
      emit(frobenius_upper_bound(load_lnm(model)), json);
    } else if (*graph_cmd) {
      emit(autolip_report(load_graph_json(model), cfg), json);
    } else if (*gen_cmd) {
      BoundReport report;
      report.direction = BoundDirection::Estimate;
      std::optional<SequentialNet> net;
      if (!ideal.empty()) {
        if (ideal[0] != std::floor(ideal[0]) || ideal[1] != std::floor(ideal[1])) {
          throw Error(ErrorCode::InvalidArgument, "--ideal K and N must be integers");
        }
        net = ideal_net(static_cast<int>(ideal[0]), static_cast<int>(ideal[1]), ideal[2], seed);
        report.method = "gen/ideal";
        report.config = {{"layers", static_cast<int>(ideal[0])}, {"width", static_cast<int>(ideal[1])}, {"ratio", ideal[2]}};
      } else if (!mlp.empty()) {
        net = random_net(mlp, Activation::from_name(activation, 0.01), seed);
        report.method = "gen/mlp";
        report.config = {{"widths", mlp}, {"activation", activation}};
      } else if (*cnn_opt) {
        net = random_cnn(cnn_depth, seed);
        report.method = "gen/cnn";
        report.config = {{"depth", cnn_depth}, {"input_hw", 28}};
      } else {
        throw Error(ErrorCode::InvalidArgument, "gen needs one of --ideal, --mlp, --cnn");
      }
      save_lnm(*net, out_path);
      report.config["seed"] = seed;
      report.config["output"] = out_path;
      report.config["parameters"] = [&] {
        std::size_t count = 0;
        for (const auto& op : net->affine_layers()) count += op.weight_tensor().size() + (op.bias() ? op.bias()->size() : 0);
        return count;
      }();
      report.notes.push_back("model generator; value is unused");
      emit(report, json);
    }
  } catch (const Error& e) {
    std::cerr << "lipbound: " << e.what() << '\n';
    return is_numerical(e.code()) ? kNumericalError : kInputError;
  } catch (const std::exception& e) {
    std::cerr << "lipbound: internal error: " << e.what() << '\n';
    return kNumericalError;
  }
  return 0;
}
