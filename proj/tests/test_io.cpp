#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ltvstab/errors.hpp"
#include "ltvstab/io.hpp"

using namespace ltvstab;

TEST_CASE("system description parsing") {
  SUBCASE("periodic with explicit steps and partition") {
    const auto desc = parse_system_description(R"({
      "kind": "periodic",
      "A": [[[2.0, 0.0], [0.0, 0.5]], [[1.5, 0.0], [0.0, 0.4]]],
      "B": [[[1.0], [1.0]], [[2.0], [1.0]]],
      "partition": [1, 1]
    })");
    const auto sys = desc.build();
    CHECK(sys.state_dim() == 2);
    CHECK(sys.input_dim() == 1);
    CHECK(sys.period() == Index{2});
    CHECK(sys.partition().has_value());
    CHECK(sys.A(0)(0, 0) == 2.0);
    CHECK(sys.A(3)(0, 0) == 1.5);
  }
  SUBCASE("single matrix broadcasts over steps") {
    const auto desc = parse_system_description(R"({
      "kind": "sequence",
      "A": [[[1.0, 0.1], [0.0, 1.0]], [[1.0, 0.2], [0.0, 1.0]]],
      "B": [[0.0], [1.0]]
    })");
    const auto sys = desc.build();
    CHECK(sys.horizon() == Index{2});
    CHECK(sys.B(0) == sys.B(1));
  }
  SUBCASE("builtin passthrough") {
    const auto desc = parse_system_description(R"({"kind": "builtin", "builtin": "example2"})");
    CHECK(desc.build().period() == Index{3});
  }
  SUBCASE("malformed inputs name the offending field") {
    CHECK_THROWS_AS(parse_system_description("not json"), ConfigError);
    CHECK_THROWS_AS(parse_system_description(R"({"kind": "sphere"})"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_system_description(R"({"kind": "periodic", "B": [[1]]})"),
                         doctest::Contains("'A'"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_system_description(R"({"kind": "periodic", "A": [[1, 2]], "B": [[1]]})").build(),
        doctest::Contains("A"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_system_description(
                             R"({"kind": "periodic", "A": [[[1]]], "B": [[[1]]], "partition": [1]})"),
                         doctest::Contains("partition"), ConfigError);
  }
}

TEST_CASE("system description round-trips through its echo") {
  const std::string text = R"({
    "kind": "periodic",
    "A": [[[2.0, 0.0], [0.0, 0.5]]],
    "B": [[[1.0], [1.0]]],
    "partition": [1, 1]
  })";
  const auto desc = parse_system_description(text);
  const std::string echo = system_description_to_json(desc);
  const auto reparsed = parse_system_description(echo);
  CHECK(system_description_to_json(reparsed) == echo);
  CHECK(reparsed.build().A(0) == desc.build().A(0));
}

TEST_CASE("channel parsing and echo") {
  const auto bern = parse_channel(R"({"kind": "bernoulli", "p": 0.11})");
  CHECK(bern.kind() == ChannelModel::Kind::kBernoulli);
  CHECK(bern.mean() == 0.11);
  const auto gauss = parse_channel(R"({"kind": "gaussian", "mean": 1.0, "variance": 0.2})");
  CHECK(gauss.variance() == 0.2);
  const auto uni = parse_channel(R"({"kind": "uniform", "lo": 0.5, "hi": 1.5})");
  CHECK(uni.mean() == doctest::Approx(1.0));
  const auto two = parse_channel(R"({"kind": "two_point", "v1": 0, "v2": 2, "q": 0.5})");
  CHECK(two.variance() == doctest::Approx(1.0));
  const auto det = parse_channel(R"({"kind": "deterministic", "value": 0.9})");
  CHECK(det.variance() == 0.0);

  for (const auto& ch : {bern, gauss, uni, two, det}) {
    const auto reparsed = parse_channel(channel_to_json(ch));
    CHECK(reparsed.kind() == ch.kind());
    CHECK(reparsed.mean() == ch.mean());
    CHECK(reparsed.variance() == ch.variance());
  }

  CHECK_THROWS_WITH_AS(parse_channel(R"({"kind": "bernoulli"})"), doctest::Contains("'p'"),
                       ConfigError);
  CHECK_THROWS_AS(parse_channel(R"({"kind": "laplace", "b": 1})"), ConfigError);
}

TEST_CASE("numeric formatting is locale-free and round-trips") {
  CHECK(format_numeric(0.1) == "0.10000000000000001");  // 17 significant digits
  CHECK(format_numeric(Index{42}) == "42");
  const double v = 0.09516258196404048;
  CHECK(std::stod(format_numeric(v)) == v);
  const double tiny = 1.2345678901234567e-300;
  CHECK(std::stod(format_numeric(tiny)) == tiny);
}

TEST_CASE("csv writer emits LF rows") {
  const auto path = std::filesystem::temp_directory_path() / "ltvstab_io_test.csv";
  {
    CsvWriter csv(path);
    csv.header({"t", "value"});
    csv.row({0.0, 0.5});
    csv.row({1.0, 0.25});
  }
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  CHECK(buffer.str() == "t,value\n0,0.5\n1,0.25\n");
  std::filesystem::remove(path);
}
