#include <doctest.h>

#include <filesystem>
#include <random>

#include "../support/fixtures.hpp"
#include "encpart/dsl/parser.hpp"
#include "encpart/dsl/printer.hpp"
#include "encpart/partitioner/image_io.hpp"
#include "encpart/partitioner/partition.hpp"

using namespace encpart::partitioner;
using encpart::dsl::parse_program;
using encpart::testing::read_fixture;

namespace {

std::vector<std::string> names_of(const ImageSpec& img) {
  std::vector<std::string> out;
  for (const auto& c : img.classes) out.push_back(c.decl.name);
  return out;
}

std::vector<std::string> proxies_of(const ImageSpec& img) {
  std::vector<std::string> out;
  for (const auto& p : img.proxies) out.push_back(p.class_name);
  return out;
}

std::vector<std::string> stubs_of(const ProxyClassDef& p) {
  std::vector<std::string> out;
  for (const auto& s : p.stubs) out.push_back(s.name);
  return out;
}

using Strings = std::vector<std::string>;

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("encpart_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("proxies mirror public signatures") {
  auto program = parse_program(read_fixture("listing1.ep"));
  auto [tset, uset] = generate_proxies(program);

  REQUIRE(uset.proxies.size() == 2);
  const ProxyClassDef& account = uset.proxies[0];
  CHECK(account.class_name == "Account");
  CHECK(account.direction == Direction::Ecall);
  CHECK(stubs_of(account) == Strings{"<init>", "updateBalance"});
  CHECK(encpart::dsl::to_string(account.stubs[0].params[0].type) == "str");
  CHECK(account.stubs[0].params[1].type == encpart::dsl::TypeRef::int_());

  REQUIRE(tset.proxies.size() == 2);
  CHECK(tset.proxies[0].class_name == "Person");
  CHECK(tset.proxies[0].direction == Direction::Ocall);
  CHECK(stubs_of(tset.proxies[0]) == Strings{"<init>", "getAccount", "transfer"});
  CHECK(stubs_of(tset.proxies[1]) == Strings{"<init>"});  // static main is not proxied

  // Signature preservation against the original declarations.
  for (const auto& proxy : uset.proxies) {
    const auto* original = program.find_class(proxy.class_name);
    for (const auto& stub : proxy.stubs) {
      if (stub.is_constructor) continue;
      const auto* m = original->find_method(stub.name);
      REQUIRE(m);
      CHECK(m->params == stub.params);
      CHECK(m->ret == stub.ret);
    }
  }

  auto neutral = generate_proxies(parse_program(read_fixture("all_neutral.ep")));
  CHECK(neutral.first.proxies.empty());
  CHECK(neutral.second.proxies.empty());
  CHECK(neutral.first.concrete.size() == 2);
  CHECK(neutral.second.concrete.size() == 2);
}

TEST_CASE("relays carry marshal kinds") {
  auto program = parse_program(read_fixture("listing1.ep"));
  auto account = synthesize_relays(*program.find_class("Account"), program);
  REQUIRE(account.size() == 2);
  CHECK(account[0].kind == RelayKind::Constructor);
  CHECK(account[0].params == std::vector{MarshalKind::Serialized, MarshalKind::Primitive});
  CHECK(account[1].method == "updateBalance");
  CHECK(account[1].params == std::vector{MarshalKind::Primitive});

  auto registry = synthesize_relays(*program.find_class("AccountRegistry"), program);
  REQUIRE(registry.size() == 2);
  CHECK(registry[0].params.empty());
  CHECK(registry[1].params == std::vector{MarshalKind::HashRef});

  auto person = synthesize_relays(*program.find_class("Person"), program);
  REQUIRE(person.size() == 3);
  CHECK(person[1].method == "getAccount");
  CHECK(person[1].ret == MarshalKind::HashRef);
}

TEST_CASE("listing 1 images") {
  auto plan = compute_images(parse_program(read_fixture("listing1.ep")));
  CHECK(plan.sets.trusted == Strings{"Account", "AccountRegistry"});
  CHECK(plan.sets.untrusted == Strings{"Person", "Main"});
  CHECK(plan.sets.neutral.empty());

  CHECK(names_of(plan.trusted) == Strings{"Account", "AccountRegistry"});
  CHECK(proxies_of(plan.trusted).empty());
  CHECK(plan.trusted.pruned_proxies == Strings{"Person", "Main"});

  CHECK(names_of(plan.untrusted) == Strings{"Person", "Main"});
  CHECK(proxies_of(plan.untrusted) == Strings{"Account", "AccountRegistry"});
  CHECK(plan.untrusted.pruned_proxies.empty());
  CHECK(stubs_of(*plan.untrusted.find_proxy("Account")) == Strings{"<init>", "updateBalance"});
  // No trusted code calls back, so no Person relay survives.
  CHECK(plan.untrusted.find_class("Person")->relays.empty());
  CHECK(plan.untrusted.entry_points == std::vector<MethodRef>{{"Main", "main"}});

  // Hand closure: four trusted relays, nothing crosses outward.
  CHECK(plan.interface.to_text() ==
        "# encpart-interface 1\n"
        "ecall Account.<init>(ser,prim) -> unit\n"
        "ecall Account.updateBalance(prim) -> unit\n"
        "ecall AccountRegistry.<init>() -> unit\n"
        "ecall AccountRegistry.addAccount(href) -> unit\n");
}

TEST_CASE("a trusted call into untrusted code yields an ocall record") {
  auto plan = compute_images(parse_program(read_fixture("trusted_calls_untrusted.ep")));
  // Hand closure: Worker relays reach Worker.run, which calls Logger.log.
  CHECK(proxies_of(plan.trusted) == Strings{"Logger"});
  CHECK(stubs_of(*plan.trusted.find_proxy("Logger")) == Strings{"log"});
  CHECK(plan.trusted.pruned_proxies == Strings{"Main"});
  const auto* logger = plan.untrusted.find_class("Logger");
  REQUIRE(logger);
  REQUIRE(logger->relays.size() == 1);
  CHECK(logger->relays[0].method == "log");
  CHECK(plan.interface.to_text() ==
        "# encpart-interface 1\n"
        "ecall Worker.<init>() -> unit\n"
        "ecall Worker.run(href,prim) -> unit\n"
        "ocall Logger.log(ser) -> unit\n");
}

TEST_CASE("all-neutral program has an empty interface") {
  auto plan = compute_images(parse_program(read_fixture("all_neutral.ep")));
  CHECK(plan.interface.records.empty());
  CHECK(plan.interface.to_text() == "# encpart-interface 1\n");
  CHECK(plan.trusted.classes.empty());
  CHECK(names_of(plan.untrusted) == Strings{"Pair", "Main"});
}

TEST_CASE("call graph basics") {
  auto program = parse_program(read_fixture("listing1.ep"));
  auto [tset, uset] = generate_proxies(program);
  auto empty = build_call_graph(tset, {});
  CHECK(empty.reachable.empty());
  CHECK(!empty.nodes.empty());

  auto g = build_call_graph(uset, {{"Main", "main", NodeKind::Method}});
  CHECK(g.is_reachable({"Person", "transfer", NodeKind::Method}));
  CHECK(g.is_reachable({"Person", "getAccount", NodeKind::Method}));
  CHECK(g.is_reachable({"Account", "updateBalance", NodeKind::Stub}));
  CHECK(!g.is_reachable({"Person", "transfer", NodeKind::Relay}));

  CHECK_THROWS_AS(build_call_graph(uset, {{"Main", "nope", NodeKind::Method}}), UnresolvedCall);
}

TEST_CASE("reachability is monotone in the entry set") {
  auto program = parse_program(read_fixture("listing1_verbose.ep"));
  auto [tset, uset] = generate_proxies(program);
  std::vector<Node> seeds;
  for (const auto& c : tset.concrete) {
    for (const auto& r : c.relays) seeds.push_back({r.owner, r.method, NodeKind::Relay});
  }
  auto full = build_call_graph(tset, seeds);
  std::mt19937_64 rng(3);
  for (int round = 0; round < 64; ++round) {
    std::vector<Node> subset;
    for (const auto& s : seeds) {
      if (rng() % 2) subset.push_back(s);
    }
    auto part = build_call_graph(tset, subset);
    for (const auto& n : part.reachable) CHECK(full.is_reachable(n));
    // Every reachable node is connected to some entry point.
    for (const auto& n : part.reachable) {
      bool seeded = false;
      for (const auto& s : subset) seeded = seeded || build_call_graph(tset, {s}).is_reachable(n);
      CHECK(seeded);
    }
  }
}

TEST_CASE("emit is deterministic and round-trips") {
  auto program = parse_program(read_fixture("listing1_verbose.ep"));
  auto a = scratch("emit_a");
  auto b = scratch("emit_b");
  emit(compute_images(program), a);
  emit(compute_images(parse_program(read_fixture("listing1_verbose.ep"))), b);
  for (const char* f : {kTrustedImageFile, kUntrustedImageFile, kInterfaceFile}) {
    CAPTURE(f);
    CHECK(read_file(a / f) == read_file(b / f));
  }

  PartitionPlan original = compute_images(program);
  PartitionPlan loaded = load_plan(a);
  CHECK(loaded.interface.records == original.interface.records);
  CHECK(loaded.sets.trusted == original.sets.trusted);
  for (auto side : {Side::Trusted, Side::Untrusted}) {
    const ImageSpec& x = original.image(side);
    const ImageSpec& y = loaded.image(side);
    REQUIRE(x.classes.size() == y.classes.size());
    for (std::size_t i = 0; i < x.classes.size(); ++i) {
      CHECK(encpart::dsl::print_class(x.classes[i].decl) == encpart::dsl::print_class(y.classes[i].decl));
      CHECK(x.classes[i].relays == y.classes[i].relays);
    }
    CHECK(proxies_of(x) == proxies_of(y));
    CHECK(x.entry_points == y.entry_points);
    CHECK(x.pruned_proxies == y.pruned_proxies);
    CHECK(encode_image(x) == encode_image(y));
  }
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("corrupted images are rejected") {
  auto plan = compute_images(parse_program(read_fixture("listing1.ep")));
  auto bytes = encode_image(plan.trusted);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_image(bad_magic), FormatError);

  auto bad_version = bytes;
  bad_version[5] = 2;
  CHECK_THROWS_AS(decode_image(bad_version), FormatError);

  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(decode_image(truncated), FormatError);

  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    auto m = bytes;
    m[14 + rng() % (m.size() - 14)] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
    try {
      decode_image(m);
    } catch (const FormatError&) {
    }
  }

  auto dir = scratch("empty_plan");
  std::filesystem::create_directories(dir);
  CHECK_THROWS_AS(load_plan(dir), FormatError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("interface text parsing") {
  auto d = InterfaceDescriptor::from_text("# encpart-interface 1\necall A.<init>(ser,prim) -> unit\n");
  REQUIRE(d.records.size() == 1);
  CHECK(d.records[0].params == std::vector{MarshalKind::Serialized, MarshalKind::Primitive});
  CHECK_THROWS_AS(InterfaceDescriptor::from_text("ecall A.f() -> unit\n"), FormatError);
  CHECK_THROWS_AS(InterfaceDescriptor::from_text("# encpart-interface 1\necall A.f(blob) -> unit\n"), FormatError);
  CHECK_THROWS_AS(InterfaceDescriptor::from_text("# encpart-interface 1\nxcall A.f() -> unit\n"), FormatError);
  CHECK_THROWS_AS(InterfaceDescriptor::from_text(""), FormatError);
}
