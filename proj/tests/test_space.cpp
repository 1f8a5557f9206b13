#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"

#include "cubicml/errors.hpp"
#include "cubicml/space.hpp"

using namespace cubicml;

namespace {

SearchSpace small_space() {
  std::vector<Dimension> dims;
  dims.push_back(Dimension::categorical("color", {"red", "green", "blue"}));
  dims.push_back(Dimension::stepped_integer("batch", 1024, 1536, 128));
  dims.push_back(Dimension::stepped_decimal("reserve", Decimal::parse("0.77"),
                                            Decimal::parse("0.85"), Decimal::parse("0.01")));
  dims.push_back(Dimension::boolean("fast_path"));
  return SearchSpace("small", 1, std::move(dims));
}

}  // namespace

TEST_SUITE("space") {

TEST_CASE("ads space file loads with 13 dimensions") {
  const SearchSpace space = load_space(CUBICML_REPO_DIR "/spaces/ads_fsdp.space");
  CHECK(space.name() == "ads_fsdp");
  CHECK(space.dimension_count() == 13);
  CHECK(space.dimension(0).value_count() == 3);
  CHECK(space.dimension_index("local_batch_size") == 11);
  CHECK(space.dimension(11).value_count() == 5);
  CHECK(space.dimension(12).value_count() == 10);
}

TEST_CASE("ads space cardinality is exactly 8857350") {
  const SearchSpace space = load_space(CUBICML_REPO_DIR "/spaces/ads_fsdp.space");
  const Cardinality card = space.cardinality();
  CHECK(card.digits == "8857350");
  REQUIRE(card.value.has_value());
  CHECK(*card.value == 8857350ull);
}

TEST_CASE("single boolean dimension has two values") {
  const SearchSpace space = parse_space(R"({
    "name": "tiny",
    "version": 1,
    "dimensions": [{"name": "flag", "kind": "boolean"}]
  })");
  CHECK(space.dimension_count() == 1);
  REQUIRE(space.cardinality().value.has_value());
  CHECK(*space.cardinality().value == 2);
}

TEST_CASE("duplicate dimension names are rejected") {
  CHECK_THROWS_WITH_AS(parse_space(R"({
    "name": "dup",
    "version": 1,
    "dimensions": [
      {"name": "bs", "kind": "boolean"},
      {"name": "bs", "kind": "boolean"}
    ]
  })"),
                       doctest::Contains("duplicate dimension name"), ValidationError);
}

TEST_CASE("malformed space documents are rejected") {
  CHECK_THROWS_AS(parse_space("not json"), ValidationError);
  CHECK_THROWS_AS(parse_space(R"({"version": 1, "dimensions": []})"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_space(R"({
    "name": "x", "dimensions": [{"name": "d", "kind": "mystery"}]
  })"),
                       doctest::Contains("unknown kind"), ValidationError);
  CHECK_THROWS_AS(parse_space(R"({
    "name": "x", "dimensions": [{"name": "d", "kind": "categorical", "values": ["only"]}]
  })"),
                  ValidationError);
  CHECK_THROWS_WITH_AS(parse_space(R"({
    "name": "x",
    "dimensions": [{"name": "d", "kind": "stepped_integer", "min": 0, "max": 10, "step": 3}]
  })"),
                       doctest::Contains("step does not divide"), ValidationError);
}

TEST_CASE("empty dimension list means cardinality one") {
  const SearchSpace space = parse_space(R"({"name": "empty", "dimensions": []})");
  CHECK(space.cardinality().digits == "1");
  CHECK(encode_mixed(space, space.sample_uniform(0)).empty());
}

TEST_CASE("cardinality multiplies value counts") {
  std::vector<Dimension> dims;
  dims.push_back(Dimension::boolean("b"));
  dims.push_back(Dimension::categorical("c", {"x", "y", "z"}));
  const SearchSpace space("bc", 1, std::move(dims));
  REQUIRE(space.cardinality().value.has_value());
  CHECK(*space.cardinality().value == 6);
}

TEST_CASE("cardinality beyond 64 bits keeps exact digits") {
  std::vector<Dimension> dims;
  for (int i = 0; i < 8; ++i) {
    dims.push_back(Dimension::stepped_integer("d" + std::to_string(i), 1, 100000, 1));
  }
  const SearchSpace space("huge", 1, std::move(dims));
  const Cardinality card = space.cardinality();
  CHECK_FALSE(card.value.has_value());
  CHECK(card.digits == "1" + std::string(40, '0'));
}

TEST_CASE("sampling is deterministic per seed") {
  const SearchSpace space = small_space();
  CHECK(space.sample_uniform(7) == space.sample_uniform(7));
  const ConfigPoint p = space.sample_uniform(7);
  space.check_config(p);
  CHECK(p.indices.size() == 4);
}

TEST_CASE("boolean sampling frequency within 3 sigma") {
  std::vector<Dimension> dims;
  dims.push_back(Dimension::boolean("flag"));
  const SearchSpace space("coin", 1, std::move(dims));
  Rng rng(2024);
  int heads = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) heads += space.sample_uniform(rng).indices[0];
  const double sigma = std::sqrt(n * 0.25);
  CHECK(std::abs(heads - n / 2) < 3.0 * sigma);
}

TEST_CASE("per-value sampling frequency within 5 sigma") {
  const SearchSpace space = small_space();
  Rng rng(99);
  const int n = 10000;
  std::vector<std::vector<int>> counts;
  for (const auto& dim : space.dimensions()) {
    counts.emplace_back(dim.value_count(), 0);
  }
  for (int i = 0; i < n; ++i) {
    const ConfigPoint p = space.sample_uniform(rng);
    for (std::size_t d = 0; d < p.indices.size(); ++d) ++counts[d][p.indices[d]];
  }
  for (std::size_t d = 0; d < counts.size(); ++d) {
    const double prob = 1.0 / static_cast<double>(counts[d].size());
    const double sigma = std::sqrt(n * prob * (1.0 - prob));
    for (const int c : counts[d]) {
      CHECK(std::abs(c - n * prob) < 5.0 * sigma);
    }
  }
}

TEST_CASE("ads space sample assigns all 13 dimensions") {
  const SearchSpace space = load_space(CUBICML_REPO_DIR "/spaces/ads_fsdp.space");
  const ConfigPoint p = space.sample_uniform(42);
  CHECK(p.indices.size() == 13);
  CHECK_NOTHROW(space.check_config(p));
}

TEST_CASE("one-hot block layout") {
  std::vector<Dimension> dims;
  dims.push_back(Dimension::categorical("c", {"a", "b", "z"}));
  const SearchSpace space("onect", 1, std::move(dims));
  ConfigPoint p;
  p.space_name = "onect";
  p.space_version = 1;
  p.indices = {1};
  CHECK(encode_onehot(space, p) == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("boolean true encodes as [0,1]") {
  std::vector<Dimension> dims;
  dims.push_back(Dimension::boolean("flag"));
  const SearchSpace space("flag1", 1, std::move(dims));
  const ConfigPoint p = space.config_from_labels({{"flag", "true"}});
  CHECK(encode_onehot(space, p) == std::vector<double>{0.0, 1.0});
  CHECK(space.bool_value(p, "flag"));
}

TEST_CASE("ads one-hot is 48 wide with 13 ones") {
  const SearchSpace space = load_space(CUBICML_REPO_DIR "/spaces/ads_fsdp.space");
  const OnehotLayout layout = onehot_layout(space);
  CHECK(layout.length == 48);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const ConfigPoint p = space.sample_uniform(rng);
    const std::vector<double> enc = encode_onehot(space, p);
    CHECK(enc.size() == 48);
    CHECK(std::count(enc.begin(), enc.end(), 1.0) == 13);
    CHECK(std::count(enc.begin(), enc.end(), 0.0) == 48 - 13);
  }
}

TEST_CASE("one-hot round trip over random configs") {
  const SearchSpace space = small_space();
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    const ConfigPoint p = space.sample_uniform(rng);
    CHECK(decode_onehot(space, encode_onehot(space, p)) == p);
  }
}

TEST_CASE("sparse one-hot indices agree with the dense encoding") {
  const SearchSpace space = small_space();
  Rng rng(32);
  for (int i = 0; i < 50; ++i) {
    const ConfigPoint p = space.sample_uniform(rng);
    const std::vector<double> dense = encode_onehot(space, p);
    std::vector<double> rebuilt(dense.size(), 0.0);
    for (const std::uint32_t idx : onehot_active_indices(space, p)) rebuilt[idx] = 1.0;
    CHECK(rebuilt == dense);
  }
}

TEST_CASE("decode_onehot validates its input") {
  const SearchSpace space = small_space();
  const ConfigPoint p = space.sample_uniform(1);
  std::vector<double> enc = encode_onehot(space, p);
  CHECK_THROWS_AS(decode_onehot(space, std::vector<double>(enc.size() - 1, 0.0)),
                  ValidationError);
  std::vector<double> doubled = enc;
  doubled[0] = 1.0;
  doubled[1] = 1.0;
  doubled[2] = 1.0;
  CHECK_THROWS_AS(decode_onehot(space, doubled), ValidationError);
  std::vector<double> fractional = enc;
  fractional[0] = 0.5;
  CHECK_THROWS_AS(decode_onehot(space, fractional), ValidationError);
}

TEST_CASE("mixed encoding emits numeric and categorical slots") {
  std::vector<Dimension> dims;
  dims.push_back(Dimension::stepped_integer("seq_len", 2048, 16384, 2048));
  dims.push_back(Dimension::categorical("precision", {"BF16", "FP8"}));
  const SearchSpace space("mini_llm", 1, std::move(dims));
  const ConfigPoint p = space.config_from_labels({{"seq_len", "8192"}, {"precision", "FP8"}});

  const MixedLayout layout = mixed_layout(space);
  REQUIRE(layout.slots.size() == 2);
  CHECK(layout.slots[0] == SlotKind::numeric);
  CHECK(layout.slots[1] == SlotKind::categorical);
  CHECK(layout.category_counts[0] == 0);
  CHECK(layout.category_counts[1] == 2);

  CHECK(encode_mixed(space, p) == std::vector<double>{8192.0, 1.0});
}

TEST_CASE("a 117-slot mixed layout is constructible") {
  std::vector<Dimension> dims;
  for (int layer = 0; layer < 50; ++layer) {
    dims.push_back(Dimension::stepped_integer("layer_" + std::to_string(layer) + "_dim", 256,
                                              4096, 256, RoleTag::architecture));
  }
  for (int layer = 0; layer < 50; ++layer) {
    dims.push_back(Dimension::categorical("layer_" + std::to_string(layer) + "_impl",
                                          {"fused", "eager"}, RoleTag::infra));
  }
  for (int i = 0; i < 17; ++i) {
    dims.push_back(Dimension::stepped_integer("knob_" + std::to_string(i), 1, 8, 1));
  }
  const SearchSpace space("wide_llm", 1, std::move(dims));
  const MixedLayout layout = mixed_layout(space);
  CHECK(layout.slots.size() == 117);
  CHECK(encode_mixed(space, space.sample_uniform(3)).size() == 117);
}

TEST_CASE("mixed round trip over random configs") {
  const SearchSpace space = small_space();
  Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    const ConfigPoint p = space.sample_uniform(rng);
    CHECK(decode_mixed(space, encode_mixed(space, p)) == p);
  }
}

TEST_CASE("mixed decimal slots survive the round trip exactly") {
  const SearchSpace space = small_space();
  const std::size_t d = space.dimension_index("reserve");
  for (std::uint32_t k = 0; k < space.dimension(d).value_count(); ++k) {
    ConfigPoint p;
    p.space_name = space.name();
    p.space_version = space.version();
    p.indices = {0, 0, k, 0};
    CHECK(decode_mixed(space, encode_mixed(space, p)) == p);
  }
}

TEST_CASE("enumeration count equals cardinality") {
  const SearchSpace space = small_space();  // 3 * 5 * 9 * 2 = 270
  std::uint64_t seen = 0;
  ConfigPoint last;
  for_each_config(space, [&](const ConfigPoint& p) {
    ++seen;
    last = p;
  });
  REQUIRE(space.cardinality().value.has_value());
  CHECK(seen == *space.cardinality().value);
  CHECK(last.indices == std::vector<std::uint32_t>{2, 4, 8, 1});
}

TEST_CASE("stepped decimal labels are exact") {
  const SearchSpace space = small_space();
  const Dimension& dim = space.dimension(space.dimension_index("reserve"));
  CHECK(dim.value_count() == 9);
  CHECK(dim.label_at(0) == "0.77");
  CHECK(dim.label_at(4) == "0.81");
  CHECK(dim.label_at(8) == "0.85");
  CHECK(dim.index_of("0.81") == 4);
  CHECK_THROWS_AS(dim.index_of("0.865"), ValidationError);
}

TEST_CASE("config json round trip") {
  const SearchSpace space = small_space();
  Rng rng(15);
  for (int i = 0; i < 50; ++i) {
    const ConfigPoint p = space.sample_uniform(rng);
    CHECK(config_from_json(space, config_to_json(space, p)) == p);
  }
  const ConfigPoint p = space.config_from_labels({{"color", "green"},
                                                  {"batch", "1280"},
                                                  {"reserve", "0.79"},
                                                  {"fast_path", "false"}});
  const std::string text = config_to_json(space, p);
  CHECK(text.find("\"color\":\"green\"") != std::string::npos);
  CHECK(text.find("\"batch\":1280") != std::string::npos);
  CHECK(text.find("\"reserve\":0.79") != std::string::npos);
  CHECK(text.find("\"fast_path\":false") != std::string::npos);
}

TEST_CASE("config json rejects junk") {
  const SearchSpace space = small_space();
  CHECK_THROWS_AS(config_from_json(space, "[]"), ValidationError);
  CHECK_THROWS_AS(config_from_json(space, R"({"color":"green"})"), ValidationError);
  CHECK_THROWS_AS(config_from_json(space,
                                   R"({"color":"green","batch":1280,"reserve":0.79,
                                       "fast_path":false,"extra":1})"),
                  ValidationError);
  CHECK_THROWS_AS(
      config_from_json(space,
                       R"({"color":"green","batch":1283,"reserve":0.79,"fast_path":false})"),
      ValidationError);
}

TEST_CASE("config_from_labels validates assignments") {
  const SearchSpace space = small_space();
  CHECK_THROWS_AS(space.config_from_labels({{"color", "green"}}), ValidationError);
  CHECK_THROWS_AS(space.config_from_labels({{"color", "green"},
                                            {"color", "red"},
                                            {"reserve", "0.79"},
                                            {"fast_path", "false"}}),
                  ValidationError);
  CHECK_THROWS_AS(space.config_from_labels({{"color", "purple"},
                                            {"batch", "1280"},
                                            {"reserve", "0.79"},
                                            {"fast_path", "false"}}),
                  ValidationError);
}

TEST_CASE("check_config enforces the space identity") {
  const SearchSpace space = small_space();
  ConfigPoint p = space.sample_uniform(4);
  p.space_name = "other";
  CHECK_THROWS_AS(space.check_config(p), ValidationError);
  ConfigPoint q = space.sample_uniform(4);
  q.indices[0] = 99;
  CHECK_THROWS_AS(space.check_config(q), ValidationError);
  ConfigPoint r = space.sample_uniform(4);
  r.indices.pop_back();
  CHECK_THROWS_AS(space.check_config(r), ValidationError);
}

TEST_CASE("config hash separates configs and is stable") {
  const SearchSpace space = small_space();
  const ConfigPoint a = space.sample_uniform(1);
  const ConfigPoint b = space.sample_uniform(2);
  CHECK(config_hash(a) == config_hash(a));
  if (!(a == b)) CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("typed value accessors") {
  const SearchSpace space = small_space();
  const ConfigPoint p = space.config_from_labels({{"color", "blue"},
                                                  {"batch", "1536"},
                                                  {"reserve", "0.85"},
                                                  {"fast_path", "true"}});
  CHECK(space.label_value(p, "color") == "blue");
  CHECK(space.int_value(p, "batch") == 1536);
  CHECK(space.decimal_value(p, "reserve") == Decimal::parse("0.85"));
  CHECK(space.bool_value(p, "fast_path"));
  CHECK_THROWS_AS(space.int_value(p, "color"), ValidationError);
  CHECK_THROWS_AS(space.label_value(p, "missing"), ValidationError);
}

}  // TEST_SUITE
