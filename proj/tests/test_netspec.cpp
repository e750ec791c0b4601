#include <catch_amalgamated.hpp>

#include "cnnt/netspec.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace cnnt;
using testing_support::preset;

namespace {

const char* kSingleConv = R"({
  "name": "single_conv",
  "input": [6, 6, 2],
  "layers": [ {"kind": "conv", "out_channels": 3, "kernel": 3} ]
})";

std::uint64_t oracle_ops(const NetworkSpec& net) {
  std::uint64_t total = 0;
  for (const auto& l : net.layers) {
    if (l.kind == LayerKind::Conv) total += 2 * oracle::conv_macs(l.out_rows, l.out_cols, l.in_channels, l.out_channels, l.kernel);
    if (l.kind == LayerKind::FC) total += 2 * oracle::fc_macs(l.in_channels, l.out_channels);
  }
  return total;
}

}  // namespace

TEST_CASE("parse a single conv document", "[netspec]") {
  const NetworkSpec net = parse_network(kSingleConv);
  REQUIRE(net.layers.size() == 1);
  const LayerSpec& l = net.layers[0];
  CHECK(l.kind == LayerKind::Conv);
  CHECK(l.out_rows == 4);
  CHECK(l.out_cols == 4);
  CHECK(l.in_channels == 2);
  CHECK(l.out_channels == 3);
  CHECK(l.kernel == 3);
  CHECK(l.stride == 1);
  CHECK(l.pad == 0);
  CHECK(net == testing_support::single_conv_net());
}

TEST_CASE("lenet5 preset", "[netspec][preset]") {
  const NetworkSpec net = preset("lenet5");
  REQUIRE(net.layers.size() == 7);
  const LayerSpec& last = net.layers.back();
  CHECK(last.kind == LayerKind::FC);
  CHECK(last.in_channels == 84);
  CHECK(last.out_channels == 10);
  CHECK(output_shape(net) == Shape{1, 1, 10});
}

TEST_CASE("fc input must match flattened predecessor", "[netspec]") {
  const char* doc = R"({
    "name": "bad", "input": [4, 4, 2],
    "layers": [ {"kind": "conv", "out_channels": 3, "kernel": 3},
                {"kind": "fc", "inputs": 10, "outputs": 2} ]
  })";
  try {
    parse_network(doc);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.layer_index() == 1);
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
}

TEST_CASE("malformed documents name the offending layer", "[netspec]") {
  auto index_of = [](const char* doc) {
    try {
      parse_network(doc);
    } catch (const ParseError& e) {
      return e.layer_index();
    }
    return std::size_t{12345};
  };
  CHECK(index_of(R"({"name":"x","input":[4,4,1],"layers":[{"kind":"relu"},{"kind":"lrn"}]})") == 1);
  CHECK(index_of(R"({"name":"x","input":[4,4,1],"layers":[{"kind":"conv","out_channels":2,"kernel":2}]})") == 0);
  CHECK(index_of(R"({"name":"x","input":[4,4,1],"layers":[{"kind":"conv","out_channels":2,"kernel":3,"out_rows":3}]})") == 0);
  CHECK(index_of(R"({"name":"x","input":[4,4,1],"layers":[{"kind":"conv","kernel":3}]})") == 0);
  CHECK(index_of(R"({"name":"x","input":[4,4,1],"layers":[{"kind":"maxpool","window":5}]})") == 0);
  CHECK(index_of(R"({"name":"x","input":[4,4],"layers":[]})") == ParseError::npos);
  CHECK(index_of(R"({"name":"x","input":[4,4,1],"layers":[)") == ParseError::npos);
  CHECK(index_of(R"({"name":"x","input":[0,4,1],"layers":[]})") == ParseError::npos);
}

TEST_CASE("kernel may be even when it spans the padded input", "[netspec]") {
  CHECK_NOTHROW(parse_network(R"({"name":"x","input":[4,4,1],"layers":[{"kind":"conv","out_channels":2,"kernel":4}]})"));
  CHECK_NOTHROW(parse_network(R"({"name":"x","input":[2,2,1],"layers":[{"kind":"conv","out_channels":2,"kernel":4,"pad":1}]})"));
}

TEST_CASE("op count examples", "[netspec]") {
  const LayerSpec conv = LayerSpec::conv({6, 6, 2}, 3, 3);
  CHECK(conv_ops(conv) == 1728);
  CHECK(conv_ops(LayerSpec::conv({1, 1, 1}, 1, 1)) == 2);
  const LayerSpec alex1 = LayerSpec::conv({227, 227, 3}, 96, 11, 4);
  REQUIRE(alex1.out_rows == 55);
  CHECK(conv_ops(alex1) == 2 * oracle::conv_macs(55, 55, 3, 96, 11));
  CHECK(conv_ops(alex1) == 210830400);

  CHECK(fc_ops(LayerSpec::fc(3, 2)) == 12);
  CHECK(fc_ops(LayerSpec::fc(1, 1)) == 2);
  CHECK(fc_ops(LayerSpec::fc(9216, 4096)) == 2 * oracle::fc_macs(9216, 4096));
  CHECK(fc_ops(LayerSpec::fc(9216, 4096)) == 75497472);
}

TEST_CASE("op counts reject the wrong layer kind", "[netspec]") {
  CHECK_THROWS_AS(conv_ops(LayerSpec::fc(3, 2)), std::domain_error);
  CHECK_THROWS_AS(fc_ops(LayerSpec::conv({6, 6, 2}, 3, 3)), std::domain_error);
  CHECK_THROWS_AS(conv_ops(LayerSpec::host(LayerKind::ReLU, {2, 2, 2})), std::domain_error);
}

TEST_CASE("total ops", "[netspec]") {
  NetworkSpec host_only;
  host_only.input = {4, 4, 2};
  host_only.layers.push_back(LayerSpec::host(LayerKind::ReLU, host_only.input));
  host_only.layers.push_back(LayerSpec::max_pool(host_only.input, 2, 2));
  CHECK(total_ops(host_only) == 0);
  CHECK(total_ops(NetworkSpec{}) == 0);

  // total_ops sums per layer and does not require chaining.
  NetworkSpec pair;
  pair.layers = {LayerSpec::conv({6, 6, 2}, 3, 3), LayerSpec::fc(3, 2)};
  CHECK(total_ops(pair) == 1740);
}

TEST_CASE("lenet5 total ops pinned against the loop-nest oracle", "[netspec][preset]") {
  const NetworkSpec net = preset("lenet5");
  CHECK(oracle_ops(net) == 833040);
  CHECK(total_ops(net) == 833040);
}

TEST_CASE("alexnet preset layer counts", "[netspec][preset]") {
  const NetworkSpec net = preset("alexnet");
  std::vector<const LayerSpec*> acc;
  for (const auto& l : net.layers)
    if (l.on_accelerator()) acc.push_back(&l);
  REQUIRE(acc.size() == 8);
  CHECK(conv_ops(*acc[0]) == 210830400);
  CHECK(acc[5]->kind == LayerKind::FC);
  CHECK(fc_ops(*acc[5]) == 75497472);
  CHECK(output_shape(net) == Shape{1, 1, 1000});
}

TEST_CASE("vgg16 preset has 13 conv and 3 fc layers", "[netspec][preset]") {
  const NetworkSpec net = preset("vgg16");
  std::size_t conv = 0, fc = 0;
  for (const auto& l : net.layers) {
    conv += l.kind == LayerKind::Conv;
    fc += l.kind == LayerKind::FC;
  }
  CHECK(conv == 13);
  CHECK(fc == 3);
  CHECK(output_shape(net) == Shape{1, 1, 1000});
}

TEST_CASE("exhaustive small sweep of op counts", "[netspec][property]") {
  for (std::size_t R = 1; R <= 8; ++R)
    for (std::size_t C = 1; C <= 8; ++C)
      for (std::size_t p = 1; p <= 8; ++p)
        for (std::size_t q = 1; q <= 8; ++q)
          for (std::size_t K = 1; K <= 8; ++K) {
            // Input sized so that the output is exactly R×C with stride 1, no pad.
            const LayerSpec l = LayerSpec::conv({R + K - 1, C + K - 1, p}, q, K);
            REQUIRE(l.out_rows == R);
            REQUIRE(l.out_cols == C);
            REQUIRE(conv_ops(l) == 2 * oracle::conv_macs(R, C, p, q, K));
          }
  for (std::size_t p = 1; p <= 8; ++p)
    for (std::size_t q = 1; q <= 8; ++q) REQUIRE(fc_ops(LayerSpec::fc(p, q)) == 2 * oracle::fc_macs(p, q));
}

TEST_CASE("parse, serialize, parse is the identity", "[netspec][property]") {
  for (const char* name : {"lenet5", "alexnet", "vgg16"}) {
    INFO(name);
    const NetworkSpec a = preset(name);
    const NetworkSpec b = parse_network(serialize_network(a));
    CHECK(a == b);
    CHECK(serialize_network(a) == serialize_network(b));
  }
  const NetworkSpec s = parse_network(kSingleConv);
  CHECK(parse_network(serialize_network(s)) == s);
}

TEST_CASE("every preset chains shapes", "[netspec][property]") {
  for (const char* name : {"lenet5", "alexnet", "vgg16"}) {
    INFO(name);
    const NetworkSpec net = preset(name);
    CHECK_NOTHROW(validate_network(net));
    for (std::size_t i = 1; i < net.layers.size(); ++i) CHECK(net.layers[i].input == net.layers[i - 1].output());
  }
}

TEST_CASE("missing network file is an io error", "[netspec]") {
  CHECK_THROWS_AS(load_network("/nonexistent/net.json"), IoError);
}
