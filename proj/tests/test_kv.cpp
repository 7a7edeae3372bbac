#include "doctest.h"

#include "certloop/errors.hpp"
#include "certloop/kv.hpp"

using namespace certloop;

TEST_CASE("basic blocks and entries") {
  KvNode root = kv_parse(R"(
# a comment
model {
  kind ctmc
  weights 1 200
  nested a b {
    inner "quoted value with spaces"
  }
}
)");
  const KvNode& model = root.at("model");
  CHECK(model.is_block);
  CHECK(model.at("kind").arg(0) == "ctmc");
  CHECK(model.at("weights").num(1) == doctest::Approx(200));
  const KvNode& nested = model.at("nested");
  CHECK(nested.args == std::vector<std::string>{"a", "b"});
  CHECK(nested.at("inner").arg(0) == "quoted value with spaces");
}

TEST_CASE("serialize/parse round trip") {
  KvNode root;
  root.is_block = true;
  KvNode& m = root.add_block("model");
  m.add("kind", "dtmc");
  KvNode& t = m.add("t", "a");
  t.args.push_back("b");
  t.args.push_back("1 - p");  // needs quoting
  m.add("empty", "");
  KvNode& sub = m.add_block("sub");
  sub.add("x", 1.5);

  std::string text = kv_serialize(root);
  KvNode again = kv_parse(text);
  CHECK(kv_serialize(again) == text);
  CHECK(again.at("model").at("t").arg(2) == "1 - p");
  CHECK(again.at("model").at("empty").arg(0) == "");
}

TEST_CASE("quoting escapes") {
  KvNode root;
  root.is_block = true;
  root.add("k", "say \"hi\" {brace}");
  std::string text = kv_serialize(root);
  KvNode again = kv_parse(text);
  CHECK(again.at("k").arg(0) == "say \"hi\" {brace}");
}

TEST_CASE("errors carry line context") {
  CHECK_THROWS_AS(kv_parse("a {\n"), Error);
  CHECK_THROWS_AS(kv_parse("}\n"), Error);
  CHECK_THROWS_AS(kv_parse("a \"unterminated\n"), Error);
  CHECK_THROWS_AS(kv_parse("a { }\n"), Error);  // brace inside line
}

TEST_CASE("missing keys raise descriptive errors") {
  KvNode root = kv_parse("block {\n}\n");
  CHECK_THROWS_AS(root.at("absent"), Error);
  CHECK(root.find("absent") == nullptr);
  CHECK_THROWS_AS(root.at("block").num_of("nope"), Error);
  CHECK(root.at("block").num_of("nope", 7.0) == doctest::Approx(7.0));
}
