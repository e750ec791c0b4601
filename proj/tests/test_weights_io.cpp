#include <catch_amalgamated.hpp>

#include "cnnt/random.hpp"
#include "cnnt/weights_io.hpp"
#include "test_support.hpp"

using namespace cnnt;
using testing_support::single_conv_net;

namespace {

// Hand-assembled little-endian bytes, independent of the encoder.
std::string le16(unsigned v) { return {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)}; }
std::string le32(unsigned v) { return le16(v & 0xFFFF) + le16(v >> 16); }

std::size_t load_error_offset(const std::string& bytes, const NetworkSpec& net) {
  try {
    match_weights(decode_container(bytes), net, bytes.size());
  } catch (const LoadError& e) {
    return e.offset();
  }
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST_CASE("encoder matches the documented byte layout", "[weights_io]") {
  QTensor t({2, 1}, std::vector<FixedQ>{FixedQ{1}, FixedQ{-2}});
  const std::string expect = std::string("CNTW") + le16(1) + le16(1) + std::string(1, '\x02') + le32(2) + le32(1) +
                             le16(1) + le16(0xFFFE);
  CHECK(encode_container({t}) == expect);
}

TEST_CASE("single conv container loads 54 values", "[weights_io]") {
  Rng rng(3);
  const QTensor w = random_tensor(rng, {3, 2, 3, 3});
  const std::string bytes = encode_container({w});
  const auto lw = match_weights(decode_container(bytes), single_conv_net(), bytes.size());
  REQUIRE(lw.size() == 1);
  CHECK(lw[0].weights.data.size() == 54);
  CHECK(lw[0].weights == w);
  CHECK(lw[0].bias.empty());
}

TEST_CASE("write then load is bit exact", "[weights_io]") {
  const auto dir = testing_support::scratch_dir("weights_io");
  const NetworkSpec net = testing_support::preset("lenet5");
  NetworkWeights<FixedQ> w = random_weights(net, 99);
  Rng rng(5);
  w[1].bias = random_tensor(rng, {w[1].weights.dims[0]}).data;  // one layer with bias
  const std::string path = (dir / "w.cntw").string();
  write_weights(path, w);
  const auto back = load_weights(path, net);
  REQUIRE(back.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(back[i].weights == w[i].weights);
    CHECK(back[i].bias == w[i].bias);
  }
}

TEST_CASE("tensor file round trip", "[weights_io]") {
  const auto dir = testing_support::scratch_dir("tensor_io");
  Rng rng(8);
  const QTensor t = random_tensor(rng, {4, 5, 3});
  write_tensor((dir / "t.cntw").string(), t);
  CHECK(load_tensor((dir / "t.cntw").string()) == t);
}

TEST_CASE("load errors carry byte offsets", "[weights_io]") {
  const NetworkSpec net = single_conv_net();
  Rng rng(4);
  const std::string good = encode_container({random_tensor(rng, {3, 2, 3, 3})});

  SECTION("bad magic") {
    std::string bad = good;
    bad[0] = 'X';
    CHECK(load_error_offset(bad, net) == 0);
  }
  SECTION("bad version") {
    std::string bad = good;
    bad[4] = 7;
    CHECK(load_error_offset(bad, net) == 4);
  }
  SECTION("truncated payload") {
    // Header 8, rank 1, extents 16; payload starts at 25.
    CHECK(load_error_offset(good.substr(0, 30), net) == 25);
  }
  SECTION("truncated extents") {
    CHECK(load_error_offset(good.substr(0, 12), net) == 9);
  }
  SECTION("trailing bytes") {
    CHECK(load_error_offset(good + "xx", net) == good.size());
  }
  SECTION("wrong dims") {
    const std::string wrong = encode_container({random_tensor(rng, {3, 2, 5, 5})});
    CHECK(load_error_offset(wrong, net) == 8);
  }
  SECTION("wrong bias length") {
    const QTensor w = random_tensor(rng, {3, 2, 3, 3});
    const std::string bytes = encode_container({w, random_tensor(rng, {4})});
    CHECK(load_error_offset(bytes, net) == good.size());
  }
  SECTION("missing tensor") {
    const std::string empty = encode_container({});
    CHECK(load_error_offset(empty, net) == empty.size());
  }
}

TEST_CASE("missing weight file is an io error", "[weights_io]") {
  CHECK_THROWS_AS(load_weights("/nonexistent/w.cntw", single_conv_net()), IoError);
}
