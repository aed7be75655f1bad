#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <lipbound/error.hpp>
#include <lipbound/graph.hpp>
#include <lipbound/io.hpp>
#include <lipbound/linalg.hpp>
#include <lipbound/lower.hpp>
#include <lipbound/seqlip.hpp>
#include <lipbound/spectral.hpp>

namespace py = pybind11;
using namespace lipbound;

namespace {

// Reports cross the boundary as canonical JSON text; the Python side parses it.
std::string dump(const BoundReport& r) { return r.to_json().dump(); }

PowerConfig power(int max_iters, double tol, std::uint64_t seed) {
  PowerConfig cfg;
  cfg.max_iters = max_iters;
  cfg.tol = tol;
  cfg.seed = seed;
  return cfg;
}

std::vector<Vector> rows_of(const Matrix& m) {
  std::vector<Vector> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).transpose());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lipschitz bounds for neural networks";

  py::register_exception<Error>(m, "LipboundError", PyExc_ValueError);

  py::class_<SequentialNet>(m, "SequentialNet")
      .def_property_readonly("in_dim", &SequentialNet::in_dim)
      .def_property_readonly("out_dim", &SequentialNet::out_dim)
      .def_property_readonly("depth", &SequentialNet::depth)
      .def_property_readonly("input_shape", &SequentialNet::input_shape)
      .def_property_readonly("output_shape", &SequentialNet::output_shape)
      .def_property_readonly("activations",
                             [](const SequentialNet& n) {
                               std::vector<std::string> names;
                               for (const auto& a : n.activations()) names.push_back(a.name());
                               return names;
                             })
      .def("weights",
           [](const SequentialNet& n) {
             std::vector<Vector> out;
             for (const auto& op : n.affine_layers()) out.push_back(op.weight_tensor().data());
             return out;
           },
           "Flattened weight tensors in storage order")
      .def("forward", [](const SequentialNet& n, const Vector& x) { return n.forward(x); }, py::arg("x"))
      .def("to_bytes",
           [](const SequentialNet& n) {
             const auto b = lnm_bytes(n);
             return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
           })
      .def_static("from_bytes", [](const py::bytes& data) {
        const std::string s = data;
        return lnm_parse(std::vector<std::uint8_t>(s.begin(), s.end()));
      });

  m.def("dense_net",
        [](const std::vector<Matrix>& weights, const std::string& activation) {
          std::vector<Layer> layers;
          for (std::size_t i = 0; i < weights.size(); ++i) {
            if (i > 0) layers.emplace_back(Activation::from_name(activation, 0.01));
            layers.emplace_back(AffineOperator::dense(weights[i]));
          }
          return SequentialNet(std::move(layers));
        },
        py::arg("weights"), py::arg("activation") = "relu");
  m.def("load_lnm", &load_lnm, py::arg("path"));
  m.def("save_lnm", &save_lnm, py::arg("net"), py::arg("path"));
  m.def("random_net",
        [](const std::vector<int>& widths, const std::string& activation, std::uint64_t seed) {
          return random_net(widths, Activation::from_name(activation, 0.01), seed);
        },
        py::arg("widths"), py::arg("activation") = "relu", py::arg("seed") = 0);
  m.def("random_cnn", &random_cnn, py::arg("depth"), py::arg("seed") = 0, py::arg("input_hw") = 28);
  m.def("ideal_net", &ideal_net, py::arg("layers"), py::arg("width"), py::arg("ratio"), py::arg("seed") = 0);

  m.def("_autolip",
        [](const SequentialNet& n, int it, double tol, std::uint64_t seed) { return dump(autolip_sequential(n, power(it, tol, seed))); });
  m.def("_autolip_graph", [](const std::string& text, int it, double tol, std::uint64_t seed) {
    return dump(autolip_report(parse_graph_json(nlohmann::json::parse(text)), power(it, tol, seed)));
  });
  m.def("_seqlip", [](const SequentialNet& n, const std::string& mode, int rank, int restarts, int steps, int width_limit,
                      std::uint64_t seed) {
    SeqLipOptions o;
    o.rank = rank;
    o.restarts = restarts;
    o.steps = steps;
    o.width_limit = width_limit;
    o.seed = seed;
    if (mode == "exact") return dump(seqlip_exact(n, o));
    if (mode == "greedy") return dump(seqlip_greedy(n, o));
    throw Error(ErrorCode::InvalidArgument, "mode must be 'exact' or 'greedy'");
  });
  m.def("_frobenius", [](const SequentialNet& n) { return dump(frobenius_upper_bound(n)); });
  m.def("_theorem3", [](const SequentialNet& n) { return dump(theorem3_bound(n)); });
  m.def("_spectra", [](const SequentialNet& n, std::size_t layer, int k, std::uint64_t seed) {
    return dump(layer_spectrum(n, layer, k, power(500, 1e-9, seed)));
  });
  m.def("_lower_grid", [](const SequentialNet& n, const Vector& lo, const Vector& hi, int resolution) {
    return dump(grid_lower_bound(n, {lo, hi}, resolution));
  });
  m.def("_lower_annealing", [](const SequentialNet& n, const Vector& lo, const Vector& hi, int proposals,
                               std::uint64_t seed) {
    AnnealingSchedule s;
    s.proposals = proposals;
    s.seed = seed;
    return dump(annealing_lower_bound(n, {lo, hi}, s));
  });
  m.def("_lower_dataset", [](const SequentialNet& n, const Matrix& points) { return dump(dataset_lower_bound(n, rows_of(points))); });

  m.def("jacobian_norm_at", [](const SequentialNet& n, const Vector& x) { return jacobian_norm_at(n, x); },
        py::arg("net"), py::arg("x"));
  m.def("svd_dense",
        [](const Matrix& a) {
          auto r = svd_dense(a);
          return py::make_tuple(r.U, r.S, r.V);
        },
        py::arg("a"));
  m.def("spectral_norm",
        [](const Matrix& a, int max_iters, double tol, std::uint64_t seed) {
          return spectral_norm(LinearMap::from_matrix(a), power(max_iters, tol, seed));
        },
        py::arg("a"), py::arg("max_iters") = 500, py::arg("tol") = 1e-9, py::arg("seed") = 0);
  m.def("top_k_singular",
        [](const Matrix& a, int k, std::uint64_t seed) {
          std::vector<double> s;
          for (const auto& t : top_k_singular(LinearMap::from_matrix(a), k, power(500, 1e-9, seed))) s.push_back(t.s);
          return s;
        },
        py::arg("a"), py::arg("k"), py::arg("seed") = 0);
  m.def("alignment_factor", &alignment_factor, py::arg("u"), py::arg("v"));
  m.def("exact_lipschitz_two_layer", &exact_lipschitz_two_layer, py::arg("m1"), py::arg("m2"));
  m.def("random_orthogonal", &random_orthogonal, py::arg("n"), py::arg("seed") = 0);
  m.def("random_unit_vector", &random_unit_vector, py::arg("n"), py::arg("seed") = 0);
}
