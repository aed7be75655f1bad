#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <lipbound/error.hpp>
#include <lipbound/graph.hpp>
#include <lipbound/io.hpp>
#include <lipbound/seqlip.hpp>

#include "support.hpp"

using namespace lipbound;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lipbound_test_" + name);
}

ErrorCode parse_error(const std::vector<std::uint8_t>& bytes) {
  try {
    lnm_parse(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

std::vector<std::uint8_t> with_manifest(const nlohmann::json& manifest, const std::vector<std::uint8_t>& blob) {
  const auto text = manifest.dump();
  std::vector<std::uint8_t> out(text.begin(), text.end());
  out.push_back('\n');
  out.push_back('\0');
  out.insert(out.end(), blob.begin(), blob.end());
  return out;
}

void expect_same_weights(const SequentialNet& a, const SequentialNet& b) {
  ASSERT_EQ(a.layers().size(), b.layers().size());
  for (std::size_t i = 0; i < a.affine_layers().size(); ++i) {
    const auto& x = a.affine_layers()[i];
    const auto& y = b.affine_layers()[i];
    EXPECT_EQ(x.weight_tensor().shape(), y.weight_tensor().shape());
    EXPECT_EQ(x.weight_tensor().data(), y.weight_tensor().data());
    EXPECT_EQ(x.bias().has_value(), y.bias().has_value());
    if (x.bias()) EXPECT_EQ(*x.bias(), *y.bias());
  }
  for (std::size_t i = 0; i < a.activations().size(); ++i) EXPECT_EQ(a.activations()[i].name(), b.activations()[i].name());
}

}  // namespace

TEST(Lnm, DenseRoundTripIsBitExact) {
  const auto net = random_net({3, 7, 5, 2}, 1);
  const auto path = temp_file("dense.lnm");
  save_lnm(net, path);
  const auto back = load_lnm(path);
  expect_same_weights(net, back);
  EXPECT_EQ(lnm_bytes(back), lnm_bytes(net));
  std::filesystem::remove(path);
}

TEST(Lnm, CnnRoundTripAndBoundsAgree) {
  const auto net = random_cnn(4, 3);
  const auto back = lnm_parse(lnm_bytes(net));
  expect_same_weights(net, back);
  EXPECT_EQ(autolip_sequential(net).to_json().dump(), autolip_sequential(back).to_json().dump());
}

TEST(Lnm, MixedActivationsAndNoBias) {
  const SequentialNet net({AffineOperator::dense(Matrix::Identity(2, 2)), Activation::leaky_relu(0.25),
                           AffineOperator::dense(Matrix::Ones(1, 2), Vector::Constant(1, 0.5))});
  const auto bytes = lnm_bytes(net);
  const auto m = lnm_manifest(bytes);
  EXPECT_TRUE(m["layers"][0]["bias"].is_null());
  EXPECT_EQ(m["layers"][1]["alpha"], 0.25);
  const auto back = lnm_parse(bytes);
  EXPECT_EQ(back.activations()[0].alpha(), 0.25);
  EXPECT_EQ(lnm_bytes(back), bytes);
}

TEST(Lnm, ManifestLayoutAndCanonicalBytes) {
  const auto net = random_net({2, 3, 1}, 5);
  const auto bytes = lnm_bytes(net);
  EXPECT_EQ(bytes, lnm_bytes(net));
  const auto m = lnm_manifest(bytes);
  EXPECT_EQ(m["version"], 1);
  EXPECT_EQ(m["dtype"], "f32");
  EXPECT_EQ(m["byte_order"], "little");
  EXPECT_EQ(m["layers"][0]["weight"]["offset"], 0);
  EXPECT_EQ(m["layers"][0]["weight"]["shape"], nlohmann::json({3, 2}));
  EXPECT_EQ(m["layers"][0]["bias"]["offset"], 24);
  EXPECT_EQ(m["layers"][2]["weight"]["offset"], 36);
  EXPECT_EQ(m["layers"][1]["kind"], "activation");
  // first blob word is W[0,0] as little-endian f32
  const auto text = m.dump();
  std::uint32_t bits = 0;
  for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[text.size() + 2 + b]) << (8 * b);
  EXPECT_EQ(static_cast<double>(std::bit_cast<float>(bits)), net.affine_layers()[0].weight()(0, 0));
  EXPECT_EQ(bytes.size(), text.size() + 2 + 4 * (6 + 3 + 3 + 1));
}

TEST(Lnm, Errors) {
  const auto net = random_net({2, 3, 1}, 5);
  const auto good = lnm_bytes(net);
  auto m = lnm_manifest(good);
  const std::vector<std::uint8_t> blob(good.end() - 52, good.end());

  EXPECT_EQ(parse_error({'{', '}'}), ErrorCode::ParseError);
  EXPECT_EQ(parse_error(with_manifest(nlohmann::json::array(), {})), ErrorCode::SchemaViolation);
  std::vector<std::uint8_t> garbage = {'{', 'x', '\n', '\0'};
  EXPECT_EQ(parse_error(garbage), ErrorCode::ParseError);

  auto bad = m;
  bad["layers"][2]["weight"]["offset"] = 48;
  EXPECT_EQ(parse_error(with_manifest(bad, blob)), ErrorCode::OffsetOutOfRange);
  bad = m;
  bad["layers"][2]["weight"]["offset"] = 1000000;
  EXPECT_EQ(parse_error(with_manifest(bad, blob)), ErrorCode::OffsetOutOfRange);
  bad = m;
  bad["layers"][0]["weight"]["offset"] = 2;
  EXPECT_EQ(parse_error(with_manifest(bad, blob)), ErrorCode::SchemaViolation);
  bad = m;
  bad["dtype"] = "f64";
  EXPECT_EQ(parse_error(with_manifest(bad, blob)), ErrorCode::SchemaViolation);
  bad = m;
  bad["layers"][1]["name"] = "swish";
  EXPECT_EQ(parse_error(with_manifest(bad, blob)), ErrorCode::SchemaViolation);
  bad = m;
  bad["layers"][0]["extra"] = 1;
  EXPECT_EQ(parse_error(with_manifest(bad, blob)), ErrorCode::SchemaViolation);
  bad = m;
  bad["layers"][0]["weight"]["shape"] = {2, 3};
  EXPECT_EQ(parse_error(with_manifest(bad, blob)), ErrorCode::ShapeMismatch);
  // adjacent layers that do not compose
  bad = m;
  bad["layers"][2]["in"] = 2;
  bad["layers"][2]["weight"]["shape"] = {1, 2};
  EXPECT_EQ(parse_error(with_manifest(bad, blob)), ErrorCode::ShapeMismatch);

  try {
    load_lnm(temp_file("does_not_exist.lnm"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Csv, Points) {
  const auto pts = parse_points_csv("1,2.5\n-3e-1, 4\r\n\n0,0\n");
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[1], Vector(Eigen::Vector2d(-0.3, 4)));
  EXPECT_THROW(parse_points_csv("1,2\n3\n"), Error);
  EXPECT_THROW(parse_points_csv("1,x\n"), Error);
  EXPECT_THROW(parse_points_csv("1,nan\n"), Error);
  EXPECT_TRUE(parse_points_csv("").empty());
}

TEST(Generators, MlpShape) {
  const auto net = random_net({2, 20, 20, 1}, 0);
  ASSERT_EQ(net.depth(), 3u);
  EXPECT_EQ(net.in_dim(), 2);
  EXPECT_EQ(net.out_dim(), 1);
  EXPECT_EQ(random_net({4, 3}, 0).layers().size(), 1u);
  EXPECT_NE(random_net({3, 3}, 0).affine_layers()[0].weight(), random_net({3, 3}, 1).affine_layers()[0].weight());
  EXPECT_EQ(random_net({3, 3}, 2).affine_layers()[0].weight(), random_net({3, 3}, 2).affine_layers()[0].weight());
  EXPECT_THROW(random_net({3}, 0), Error);
  EXPECT_THROW(random_net({3, 0, 2}, 0), Error);
}

TEST(Generators, MlpScale) {
  // entries ~ N(0, 1/fan_in): the empirical variance of a 400 x 400 layer is close to 1/400
  const Matrix w = random_net({400, 400}, 3).affine_layers()[0].weight();
  const double var = w.array().square().mean();
  EXPECT_NEAR(var * 400, 1.0, 0.02);
}

TEST(Generators, CnnFamily) {
  const auto net = random_cnn(4, 1);
  EXPECT_EQ(net.depth(), 4u);
  EXPECT_EQ(net.activations().size(), 3u);
  EXPECT_EQ(net.input_shape(), (Shape{1, 28, 28}));
  EXPECT_EQ(net.affine_layers().back().geometry().out_channels, 10u);
  EXPECT_EQ(net.output_shape(), (Shape{10, 1, 1}));
  const auto deep = random_cnn(7, 1);
  EXPECT_EQ(deep.depth(), 7u);
  EXPECT_EQ(deep.affine_layers()[3].geometry().pad_h, 1u);
  try {
    random_cnn(3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DepthTooSmall);
  }
  EXPECT_THROW(random_cnn(4, 0, 12), Error);
}
