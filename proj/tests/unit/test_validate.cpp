#include <doctest.h>

#include "../support/fixtures.hpp"
#include "encpart/dsl/parser.hpp"
#include "encpart/dsl/validate.hpp"

using namespace encpart::dsl;
using encpart::testing::read_fixture;

namespace {

ValidationReport check(const std::string& src) { return validate(parse_program(src)); }

std::string dump(const ValidationReport& r) {
  std::string out;
  for (const auto& v : r.violations) out += format_violation(v) + "\n";
  return out;
}

const std::string kMain = "class Main { public static void main() {} }\n";

}  // namespace

TEST_CASE("fixtures that should validate") {
  for (const char* name : {"listing1.ep", "listing1_verbose.ep", "all_neutral.ep", "trusted_calls_untrusted.ep"}) {
    CAPTURE(name);
    ValidationReport r = validate(parse_program(read_fixture(name)));
    CHECK_MESSAGE(r.ok(), dump(r));
  }
}

TEST_CASE("encapsulation") {
  ValidationReport r = validate(parse_program(read_fixture("bad_encapsulation.ep")));
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].rule == Rule::Encapsulation);
  CHECK(r.violations[0].class_name == "Vault");
  CHECK(r.violations[0].loc.line == 3);
  CHECK(check("class X { public int y; }" + kMain).ok());
}

TEST_CASE("main placement and signature") {
  CHECK(check("@Trusted class Main { public static void main() {} }").has(Rule::MainPlacement));
  CHECK(check("@Untrusted class Main { public static void main() {} }").ok());
  CHECK(check("class Main { public void main() {} }").has(Rule::MainSignature));
  CHECK(check("class Main { public static int main() { return 1; } }").has(Rule::MainSignature));
  CHECK(check("class Main { public static void main(int a) {} }").has(Rule::MainSignature));
}

TEST_CASE("unresolved types") {
  CHECK(check("class A { private Ghost g; }" + kMain).has(Rule::UnresolvedType));
  CHECK(check("class A { public Ghost f() { return null; } }" + kMain).has(Rule::UnresolvedType));
  CHECK(check("class Main { public static void main() { var g = new Ghost(); } }").has(Rule::UnresolvedType));
}

TEST_CASE("type errors") {
  const char* bad[] = {
      "var x = 1 + true;",
      "var x = \"a\" - 1;",
      "int x = \"s\";",
      "var x = null;",
      "var x = [];",
      "if (1) {}",
      "while (\"s\") {}",
      "var x = 1; var x = 2;",
      "var Main = 1;",
      "print([1]);",
      "var x = y;",
      "compute(true);",
      "var x = 1; x += \"s\";",
      "list<int> xs = [1]; xs.append(\"s\");",
      "list<int> xs = [1]; var s = xs.nope();",
      "var x = print(1);",
      "Main.main();",
      "var q = this;",
      "str s = file_read(1);",
      "var b = 1 == \"a\";",
      "var x = [1, \"a\"];",
      "nope(1);",
  };
  for (const char* stmt : bad) {
    CAPTURE(stmt);
    ValidationReport r = check(std::string("class Main { public static void main() { ") + stmt + " } }");
    CHECK(r.has(Rule::TypeError));
  }
  const char* good[] = {
      "var x = 1 + 2 * 3;",
      "var s = \"a\" + \"b\";",
      "list<list<int>> xs = [[], [1]];",
      "list<int> xs = []; xs.append(1); xs.set(0, xs.get(0) + xs.len());",
      "str s = repeat(\"x\", 3) + to_str(4) + to_str(true);",
      "var b = !(1 < 2) || 3 >= 4 && true != false;",
      "if (true) { var x = 1; } else { var x = 2; }",
      "int x = -5; x -= 1; x += 2;",
  };
  for (const char* stmt : good) {
    CAPTURE(stmt);
    ValidationReport r = check(std::string("class Main { public static void main() { ") + stmt + " } }");
    CHECK_MESSAGE(r.ok(), dump(r));
  }
}

TEST_CASE("returns") {
  CHECK(check("class A { public int f() { return; } }" + kMain).has(Rule::TypeError));
  CHECK(check("class A { public void f() { return 1; } }" + kMain).has(Rule::TypeError));
  CHECK(check("class A { public str f() { return 1; } }" + kMain).has(Rule::TypeError));
  CHECK(check("class A { public A f() { return null; } }" + kMain).ok());
}

TEST_CASE("no field access across objects") {
  const std::string cls =
      "class P { private int v; public int get() { return this.v; } "
      "public int peek(P other) { return other.v; } }";
  ValidationReport r = check(cls + kMain);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].rule == Rule::ForeignFieldAccess);
  CHECK(r.violations[0].method == "peek");

  CHECK(check("class P { private int v; public void set(P o) { o.v = 1; } }" + kMain)
            .has(Rule::ForeignFieldAccess));
}

TEST_CASE("statics only on neutral classes") {
  CHECK(check("@Trusted class T { public static int f() { return 1; } }" + kMain).has(Rule::StaticInAnnotated));
  CHECK(check("class H { public static int f() { return 1; } }"
              "class Main { public static void main() { var x = H.f(); } }")
            .ok());
  CHECK(check("class H { public int f() { return 1; } }"
              "class Main { public static void main() { var x = H.f(); } }")
            .has(Rule::TypeError));
}

TEST_CASE("visibility and duplicate parameters") {
  CHECK(check("class A { private void f() {} public void g(A o) { o.f(); } }" + kMain).has(Rule::Visibility));
  CHECK(check("class A { private void f() {} public void g() { this.f(); } }" + kMain).ok());
  CHECK(check("class A { private A() {} }" + kMain).has(Rule::Visibility));
  CHECK(check("class A { public void f(int a, bool a) {} }" + kMain).has(Rule::DuplicateParam));
}

TEST_CASE("validate is pure") {
  Program p = parse_program(
      "@Trusted class T { public int x; public void f(T o) { o.x = 1; } }"
      "@Trusted class Main { public static void main() { var q = 1 + true; } }");
  ValidationReport a = validate(p);
  ValidationReport b = validate(p);
  REQUIRE(a.violations.size() == b.violations.size());
  CHECK(a.violations.size() >= 4);
  for (std::size_t i = 0; i < a.violations.size(); ++i) {
    CHECK(format_violation(a.violations[i]) == format_violation(b.violations[i]));
  }
}
