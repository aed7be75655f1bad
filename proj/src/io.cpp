#include "lipbound/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "lipbound/error.hpp"
#include "lipbound/linalg.hpp"

namespace lipbound {
namespace {

using nlohmann::json;

constexpr char kSeparator[2] = {'\n', '\0'};

// ---- blob encoding ---------------------------------------------------------

void put_f32(std::vector<std::uint8_t>& blob, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  for (int b = 0; b < 4; ++b) blob.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

double get_f32(const std::uint8_t* p) {
  std::uint32_t bits = 0;
  for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return static_cast<double>(std::bit_cast<float>(bits));
}

json tensor_ref(std::vector<std::uint8_t>& blob, const Tensor& t) {
  json ref = {{"offset", blob.size()}, {"shape", t.shape()}};
  for (double v : t.values()) put_f32(blob, v);
  return ref;
}

json bias_ref(std::vector<std::uint8_t>& blob, const std::optional<Vector>& bias) {
  if (!bias) return nullptr;
  return tensor_ref(blob, Tensor::vector(*bias));
}

// ---- manifest validation -------------------------------------------------

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorCode::SchemaViolation, msg); }

void expect_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) schema(where + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, _] : obj.items()) {
    if (!allowed.count(k)) schema(where + ": unexpected key '" + k + "'");
  }
  for (const char* k : keys) {
    if (!obj.contains(k)) schema(where + ": missing key '" + std::string(k) + "'");
  }
}

std::size_t positive(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) schema(where + " must be a positive integer");
  return v.get<std::size_t>();
}

std::size_t natural(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) schema(where + " must be a non-negative integer");
  return v.get<std::size_t>();
}

std::pair<std::size_t, std::size_t> pair_of(const json& v, bool allow_zero, const std::string& where) {
  if (!v.is_array() || v.size() != 2) schema(where + " must be a pair");
  return allow_zero ? std::pair{natural(v[0], where), natural(v[1], where)}
                    : std::pair{positive(v[0], where), positive(v[1], where)};
}

class BlobReader {
 public:
  BlobReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  Tensor read(const json& ref, const Shape& expected, const std::string& where) const {
    expect_keys(ref, {"offset", "shape"}, where);
    const std::size_t offset = natural(ref["offset"], where + ".offset");
    if (!ref["shape"].is_array()) schema(where + ".shape must be an array");
    Shape shape;
    for (const auto& d : ref["shape"]) shape.push_back(positive(d, where + ".shape"));
    if (shape != expected) {
      throw Error(ErrorCode::ShapeMismatch,
                  where + " has shape " + shape_string(shape) + ", expected " + shape_string(expected));
    }
    if (offset % 4 != 0) schema(where + ".offset must be 4-byte aligned");
    const std::size_t count = shape_size(shape);
    if (offset > size_ || count > (size_ - offset) / 4) {
      throw Error(ErrorCode::OffsetOutOfRange, where + " extends past the end of the weight blob");
    }
    Vector values(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) values[static_cast<Eigen::Index>(i)] = get_f32(data_ + offset + 4 * i);
    return Tensor(std::move(shape), std::move(values));
  }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
};

std::optional<Vector> read_bias(const BlobReader& blob, const json& ref, std::size_t n, const std::string& where) {
  if (ref.is_null()) return std::nullopt;
  return blob.read(ref, {n}, where).data();
}

Layer parse_layer(const json& layer, const BlobReader& blob, std::size_t idx) {
  const std::string where = "layers[" + std::to_string(idx) + "]";
  if (!layer.is_object() || !layer.contains("kind") || !layer["kind"].is_string()) schema(where + " needs a kind");
  const auto kind = layer["kind"].get<std::string>();
  if (kind == "dense") {
    expect_keys(layer, {"kind", "in", "out", "weight", "bias"}, where);
    const std::size_t n = positive(layer["in"], where + ".in");
    const std::size_t m = positive(layer["out"], where + ".out");
    const Tensor w = blob.read(layer["weight"], {m, n}, where + ".weight");
    return AffineOperator::dense(w.as_matrix(), read_bias(blob, layer["bias"], m, where + ".bias"));
  }
  if (kind == "conv2d") {
    expect_keys(layer,
                {"kind", "in_channels", "out_channels", "kernel", "stride", "padding", "input_hw", "weight", "bias"},
                where);
    Conv2dGeometry g;
    g.in_channels = positive(layer["in_channels"], where + ".in_channels");
    g.out_channels = positive(layer["out_channels"], where + ".out_channels");
    std::tie(g.kernel_h, g.kernel_w) = pair_of(layer["kernel"], false, where + ".kernel");
    std::tie(g.stride_h, g.stride_w) = pair_of(layer["stride"], false, where + ".stride");
    std::tie(g.pad_h, g.pad_w) = pair_of(layer["padding"], true, where + ".padding");
    std::tie(g.in_h, g.in_w) = pair_of(layer["input_hw"], false, where + ".input_hw");
    Tensor k = blob.read(layer["weight"], {g.out_channels, g.in_channels, g.kernel_h, g.kernel_w}, where + ".weight");
    return AffineOperator::conv2d(g, std::move(k), read_bias(blob, layer["bias"], g.out_channels, where + ".bias"));
  }
  if (kind == "activation") {
    const bool has_alpha = layer.contains("alpha");
    if (has_alpha) {
      expect_keys(layer, {"kind", "name", "alpha"}, where);
      if (!layer["alpha"].is_number()) schema(where + ".alpha must be a number");
    } else {
      expect_keys(layer, {"kind", "name"}, where);
    }
    if (!layer["name"].is_string()) schema(where + ".name must be a string");
    try {
      return Activation::from_name(layer["name"].get<std::string>(), has_alpha ? layer["alpha"].get<double>() : 0.0);
    } catch (const Error& e) {
      schema(where + ": " + e.what());
    }
  }
  schema(where + ": unknown kind '" + kind + "'");
}

json layer_manifest(const Layer& layer, std::vector<std::uint8_t>& blob) {
  if (const auto* act = std::get_if<Activation>(&layer)) {
    json out = {{"kind", "activation"}, {"name", act->name()}};
    if (act->kind() == ActivationKind::LeakyRelu) out["alpha"] = act->alpha();
    return out;
  }
  const auto& op = std::get<AffineOperator>(layer);
  if (op.kind() == AffineKind::Dense) {
    json out = {{"kind", "dense"}, {"in", op.in_dim()}, {"out", op.out_dim()}};
    out["weight"] = tensor_ref(blob, op.weight_tensor());
    out["bias"] = bias_ref(blob, op.bias());
    return out;
  }
  const auto& g = op.geometry();
  json out = {{"kind", "conv2d"},
              {"in_channels", g.in_channels},
              {"out_channels", g.out_channels},
              {"kernel", {g.kernel_h, g.kernel_w}},
              {"stride", {g.stride_h, g.stride_w}},
              {"padding", {g.pad_h, g.pad_w}},
              {"input_hw", {g.in_h, g.in_w}}};
  out["weight"] = tensor_ref(blob, op.weight_tensor());
  out["bias"] = bias_ref(blob, op.bias());
  return out;
}

std::pair<json, std::size_t> split_manifest(const std::vector<std::uint8_t>& bytes) {
  const auto* begin = bytes.data();
  const auto* end = begin + bytes.size();
  const auto* sep = std::search(begin, end, std::begin(kSeparator), std::end(kSeparator));
  if (sep == end) throw Error(ErrorCode::ParseError, "LNM file has no manifest terminator");
  json manifest;
  try {
    manifest = json::parse(begin, sep);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("LNM manifest is not valid JSON: ") + e.what());
  }
  return {std::move(manifest), static_cast<std::size_t>(sep - begin) + 2};
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- graph JSON ------------------------------------------------------------

Vector number_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) schema(where + " must be a non-empty array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) schema(where + " must contain numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Matrix number_rows(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) schema(where + " must be a non-empty array of rows");
  const auto first = number_list(v[0], where);
  Matrix out(static_cast<Eigen::Index>(v.size()), first.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto row = number_list(v[i], where);
    if (row.size() != first.size()) schema(where + " rows must have equal length");
    out.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return out;
}

const json& param(const json& params, const char* key, const std::string& where) {
  if (!params.contains(key)) schema(where + ": missing param '" + std::string(key) + "'");
  return params[key];
}

}  // namespace

std::vector<std::uint8_t> lnm_bytes(const SequentialNet& net) {
  std::vector<std::uint8_t> blob;
  json layers = json::array();
  for (const auto& layer : net.layers()) layers.push_back(layer_manifest(layer, blob));
  const json manifest = {{"version", 1}, {"dtype", "f32"}, {"byte_order", "little"}, {"layers", layers}};
  const std::string text = manifest.dump();
  std::vector<std::uint8_t> out(text.begin(), text.end());
  out.insert(out.end(), std::begin(kSeparator), std::end(kSeparator));
  out.insert(out.end(), blob.begin(), blob.end());
  return out;
}

nlohmann::json lnm_manifest(const std::vector<std::uint8_t>& bytes) { return split_manifest(bytes).first; }

SequentialNet lnm_parse(const std::vector<std::uint8_t>& bytes) {
  const auto [manifest, blob_start] = split_manifest(bytes);
  expect_keys(manifest, {"version", "dtype", "byte_order", "layers"}, "manifest");
  if (manifest["version"] != 1) schema("unsupported LNM version");
  if (manifest["dtype"] != "f32") schema("dtype must be \"f32\"");
  if (manifest["byte_order"] != "little") schema("byte_order must be \"little\"");
  if (!manifest["layers"].is_array() || manifest["layers"].empty()) schema("layers must be a non-empty array");

  const BlobReader blob(bytes.data() + blob_start, bytes.size() - blob_start);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < manifest["layers"].size(); ++i) layers.push_back(parse_layer(manifest["layers"][i], blob, i));
  return SequentialNet(std::move(layers));
}

void save_lnm(const SequentialNet& net, const std::filesystem::path& path) {
  const auto bytes = lnm_bytes(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

SequentialNet load_lnm(const std::filesystem::path& path) { return lnm_parse(read_file(path)); }

ComputationGraph parse_graph_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array() || !doc.contains("output")) {
    schema("graph description needs \"nodes\" and \"output\"");
  }
  const auto& list = doc["nodes"];
  std::map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& node = list[i];
    if (!node.is_object() || !node.contains("id") || !node["id"].is_number_integer()) schema("every node needs an integer id");
    if (!index.emplace(node["id"].get<std::int64_t>(), i).second) schema("duplicate node id");
  }
  auto resolve = [&](const json& id, const std::string& where) {
    if (!id.is_number_integer()) schema(where + ": ids must be integers");
    const auto it = index.find(id.get<std::int64_t>());
    if (it == index.end()) schema(where + ": unknown node id " + id.dump());
    return it->second;
  };

  std::vector<GraphNode> nodes(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& spec = list[i];
    const std::string where = "node " + spec["id"].dump();
    if (!spec.contains("kind") || !spec["kind"].is_string()) schema(where + " needs a kind");
    const auto kind = spec["kind"].get<std::string>();
    const json params = spec.value("params", json::object());
    if (!params.is_object()) schema(where + ": params must be an object");
    auto& node = nodes[i];
    if (spec.contains("inputs")) {
      if (!spec["inputs"].is_array()) schema(where + ": inputs must be an array");
      for (const auto& id : spec["inputs"]) node.inputs.push_back(resolve(id, where));
    }
    if (kind == "input") {
      node.kind = NodeKind::Input;
      node.input_size = static_cast<Eigen::Index>(positive(param(params, "size", where), where + ".size"));
    } else if (kind == "constant") {
      node.kind = NodeKind::Constant;
      node.value = Tensor::vector(number_list(param(params, "value", where), where + ".value"));
    } else if (kind == "dense") {
      node.kind = NodeKind::Affine;
      std::optional<Vector> bias;
      if (params.contains("bias") && !params["bias"].is_null()) bias = number_list(params["bias"], where + ".bias");
      node.op = AffineOperator::dense(number_rows(param(params, "weight", where), where + ".weight"), bias);
    } else if (kind == "activation") {
      node.kind = NodeKind::Activation;
      const auto& name = param(params, "name", where);
      if (!name.is_string()) schema(where + ": activation name must be a string");
      node.act = Activation::from_name(name.get<std::string>(), params.value("alpha", 0.0));
    } else if (kind == "add") {
      node.kind = NodeKind::Add;
    } else if (kind == "subtract") {
      node.kind = NodeKind::Subtract;
    } else if (kind == "product") {
      node.kind = NodeKind::Product;
    } else if (kind == "abs") {
      node.kind = NodeKind::Abs;
    } else if (kind == "sin") {
      node.kind = NodeKind::Sin;
    } else if (kind == "scale") {
      node.kind = NodeKind::Scale;
      const auto& c = param(params, "c", where);
      if (!c.is_number()) schema(where + ": scale c must be a number");
      node.scale = c.get<double>();
    } else if (kind == "maxpool") {
      node.kind = NodeKind::MaxPool;
      node.pool.channels = positive(param(params, "channels", where), where + ".channels");
      node.pool.in_h = positive(param(params, "in_h", where), where + ".in_h");
      node.pool.in_w = positive(param(params, "in_w", where), where + ".in_w");
      node.pool.window = positive(param(params, "window", where), where + ".window");
    } else {
      schema(where + ": unknown kind '" + kind + "'");
    }
  }
  return ComputationGraph(std::move(nodes), resolve(doc["output"], "output"));
}

ComputationGraph load_graph_json(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("graph description is not valid JSON: ") + e.what());
  }
  return parse_graph_json(doc);
}

std::vector<Vector> parse_points_csv(const std::string& text) {
  std::vector<Vector> points;
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
      if (cell.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
      row.push_back(v);
    }
    if (!points.empty() && static_cast<Eigen::Index>(row.size()) != points.front().size()) {
      throw Error(ErrorCode::ShapeMismatch, "line " + std::to_string(lineno) + " has a different number of columns");
    }
    points.push_back(Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(row.size())));
  }
  return points;
}

std::vector<Vector> load_points_csv(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_points_csv(std::string(bytes.begin(), bytes.end()));
}

namespace {

template <typename Derived>
void round_to_f32(Eigen::MatrixBase<Derived>& m) {
  m = m.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
}

}  // namespace

SequentialNet random_net(const std::vector<int>& widths, const Activation& act, std::uint64_t seed) {
  if (widths.size() < 2) throw Error(ErrorCode::InvalidArgument, "random_net needs at least an input and an output width");
  for (int w : widths) {
    if (w < 1) throw Error(ErrorCode::InvalidArgument, "layer widths must be >= 1");
  }
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    auto rng = make_rng(seed, {i});
    Matrix w = gaussian_matrix(rng, widths[i + 1], widths[i]) / std::sqrt(static_cast<double>(widths[i]));
    Vector b = 0.01 * gaussian_vector(rng, widths[i + 1]);
    round_to_f32(w);
    round_to_f32(b);
    if (i > 0) layers.emplace_back(act);
    layers.emplace_back(AffineOperator::dense(std::move(w), std::move(b)));
  }
  return SequentialNet(std::move(layers));
}

SequentialNet random_net(const std::vector<int>& widths, std::uint64_t seed) {
  return random_net(widths, Activation::relu(), seed);
}

SequentialNet random_cnn(int depth, std::uint64_t seed, std::size_t input_hw) {
  if (depth < 4) throw Error(ErrorCode::DepthTooSmall, "the CNN family needs depth >= 4");
  struct Spec {
    std::size_t out, k, stride, pad;
  };
  std::vector<Spec> specs = {{32, 5, 2, 0}, {64, 3, 2, 0}};
  for (int i = 0; i < depth - 4; ++i) specs.push_back({64, 3, 1, 1});
  specs.push_back({128, 3, 2, 0});
  specs.push_back({10, 2, 1, 0});

  std::vector<Layer> layers;
  std::size_t channels = 1, hw = input_hw;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Conv2dGeometry g;
    g.in_channels = channels;
    g.out_channels = specs[i].out;
    g.kernel_h = g.kernel_w = specs[i].k;
    g.stride_h = g.stride_w = specs[i].stride;
    g.pad_h = g.pad_w = specs[i].pad;
    g.in_h = g.in_w = hw;
    if (hw + 2 * specs[i].pad < specs[i].k) {
      throw Error(ErrorCode::ShapeMismatch, "input " + std::to_string(input_hw) + "x" + std::to_string(input_hw) +
                                                " is too small for CNN depth " + std::to_string(depth));
    }
    auto rng = make_rng(seed, {i});
    const auto fan_in = static_cast<double>(channels * specs[i].k * specs[i].k);
    Vector kernel = gaussian_vector(rng, static_cast<Eigen::Index>(g.out_channels * channels * g.kernel_h * g.kernel_w)) *
                    std::sqrt(2.0 / fan_in);
    Vector b = 0.01 * gaussian_vector(rng, static_cast<Eigen::Index>(g.out_channels));
    round_to_f32(kernel);
    round_to_f32(b);
    if (i > 0) layers.emplace_back(Activation::relu());
    layers.emplace_back(AffineOperator::conv2d(
        g, Tensor({g.out_channels, g.in_channels, g.kernel_h, g.kernel_w}, std::move(kernel)), std::move(b)));
    channels = g.out_channels;
    hw = g.out_h();
  }
  return SequentialNet(std::move(layers));
}

}  // namespace lipbound
