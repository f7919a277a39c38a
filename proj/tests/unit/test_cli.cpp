#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "encpart/cli/cli.hpp"
#include "encpart/partitioner/image_io.hpp"

namespace fs = std::filesystem;
using namespace encpart::cli;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "encpart");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const char* name) { return std::string(ENCPART_FIXTURES) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path root;
  explicit Scratch(const std::string& tag) {
    root = fs::temp_directory_path() / ("encpart_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() { fs::remove_all(root); }
  std::string operator/(const std::string& name) const { return (root / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(root / name, std::ios::binary) << text;
    return (root / name).string();
  }
};

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

const char* kDiverging = R"(
public class Pair {
  private int a;
  public Pair(int a0) { this.a = a0; }
  public void inc() { this.a += 1; }
  public int get() { return this.a; }
}
@Trusted
public class Keeper {
  private Pair kept;
  public Keeper() {}
  public void keep(Pair p) { this.kept = p; this.kept.inc(); }
  public int peek() { return this.kept.get(); }
}
@Untrusted
public class Main {
  public static void main(list<str> args) {
    var p = new Pair(1);
    var k = new Keeper();
    k.keep(p);
    print(to_str(p.get()) + " " + to_str(k.peek()));
  }
}
)";

}  // namespace

TEST_CASE("partition writes three files and summarizes the class sets") {
  Scratch s("partition");
  Outcome r = cli({"partition", fixture("listing1.ep"), "-o", s / "a"});
  REQUIRE_MESSAGE(r.code == kOk, r.err);
  CHECK(contains(r.out, "trusted (T): 2 [Account, AccountRegistry]"));
  CHECK(contains(r.out, "untrusted (U): 2"));
  CHECK(contains(r.out, "neutral (N): 0"));
  CHECK(r.err.empty());
  for (const char* f : {"trusted.img", "untrusted.img", "interface.edl.txt"}) CHECK(fs::exists(s / "a" + "/" + f));

  Outcome again = cli({"partition", fixture("listing1.ep"), "-o", s / "b"});
  REQUIRE(again.code == kOk);
  for (const char* f : {"trusted.img", "untrusted.img", "interface.edl.txt"}) {
    CHECK(slurp(s / "a" + "/" + f) == slurp(s / "b" + "/" + f));
  }
}

TEST_CASE("partition error paths") {
  Scratch s("partition_err");
  Outcome bad = cli({"partition", fixture("bad_encapsulation.ep"), "-o", s / "x"});
  CHECK(bad.code == kInvalidInput);
  CHECK(contains(bad.err, "ENCAPSULATION"));
  CHECK(contains(bad.err, "3:3"));
  CHECK(bad.out.empty());
  CHECK_FALSE(fs::exists(s / "x"));

  Outcome missing = cli({"partition", s / "nope.ep", "-o", s / "y"});
  CHECK(missing.code == kIoError);
  CHECK_FALSE(missing.err.empty());

  Outcome syntax = cli({"partition", s.write("broken.ep", "class {"), "-o", s / "z"});
  CHECK(syntax.code == kInvalidInput);

  CHECK(cli({"partition", fixture("listing1.ep")}).code == kInvalidInput);
  CHECK(cli({}).code == kInvalidInput);
  CHECK(cli({"frobnicate"}).code == kInvalidInput);
  Outcome help = cli({"--help"});
  CHECK(help.code == kOk);
  CHECK(contains(help.out, "partition"));
}

TEST_CASE("inspect shows images, stubs and pruned proxies") {
  Scratch s("inspect");
  REQUIRE(cli({"partition", fixture("listing1.ep"), "-o", s / "p"}).code == kOk);

  Outcome t = cli({"inspect", s / "p", "--image", "trusted"});
  REQUIRE_MESSAGE(t.code == kOk, t.err);
  CHECK(contains(t.out, "  Account [trusted]"));
  CHECK(contains(t.out, "  AccountRegistry [trusted]"));
  CHECK(contains(t.out, "Person proxy: pruned (unreachable)"));
  CHECK_FALSE(contains(t.out, "Person [untrusted]"));
  CHECK(contains(t.out, "ecall Account.updateBalance(prim) -> unit"));

  Outcome u = cli({"inspect", s / "p", "--image", "untrusted"});
  REQUIRE(u.code == kOk);
  CHECK(contains(u.out, "Account proxy (ecall)"));
  CHECK(contains(u.out, "AccountRegistry proxy (ecall)"));
  CHECK(contains(u.out, "stub updateBalance(int) -> void"));
  CHECK(contains(u.out, "stub addAccount(Account) -> void"));
  CHECK(contains(u.out, "Main.main"));

  CHECK(cli({"inspect", s / "p", "--image", "trusted"}).out == t.out);

  fs::create_directories(s / "empty");
  Outcome empty = cli({"inspect", s / "empty"});
  CHECK(empty.code == kIoError);
  CHECK(contains(empty.err, "format error"));
  CHECK(cli({"inspect", s / "p", "--image", "sideways"}).code == kInvalidInput);
}

TEST_CASE("run executes a plan; trace and metrics are deterministic") {
  Scratch s("run");
  REQUIRE(cli({"partition", fixture("listing1_verbose.ep"), "-o", s / "p"}).code == kOk);
  Outcome r = cli({"run", s / "p", "--trace", "transitions", "--metrics", s / "m1.txt", "--dump-fs", s / "fs"});
  REQUIRE_MESSAGE(r.code == kOk, r.err);
  CHECK(r.out == "Alice: 75\nBob: 50\ntotal 125\nAlice: 75\nBob: 50\n\n");
  CHECK(contains(r.err, "1 ecall ConstructorRelay Account.<init> hash="));
  CHECK(contains(r.err, " ocall "));
  const std::string metrics = slurp(s / "m1.txt");
  CHECK(contains(metrics, "[trusted]"));
  CHECK(contains(metrics, "[untrusted]"));
  CHECK(contains(metrics, "ecalls = "));
  REQUIRE(fs::is_directory(s / "fs"));
  CHECK(std::distance(fs::directory_iterator(s / "fs"), fs::directory_iterator{}) == 1);

  Outcome again = cli({"run", s / "p", "--trace", "transitions", "--metrics", s / "m2.txt"});
  CHECK(again.out == r.out);
  CHECK(again.err == r.err);
  CHECK(slurp(s / "m2.txt") == metrics);

  Outcome quiet = cli({"run", s / "p", "--deterministic-gc", "--gc-scan", "every-k=2"});
  CHECK(quiet.code == kOk);
  CHECK(quiet.out == r.out);
  CHECK(quiet.err.empty());

  Outcome live = cli({"run", s / "p", "--live-gc", "--live-period-ms", "1"});
  CHECK(live.code == kOk);
  CHECK(live.out == r.out);
}

TEST_CASE("run flag and failure paths") {
  Scratch s("run_err");
  REQUIRE(cli({"partition", fixture("listing1.ep"), "-o", s / "p"}).code == kOk);
  CHECK(cli({"run", s / "p", "--gc-scan", "every-k=0"}).code == kInvalidInput);
  CHECK(cli({"run", s / "p", "--gc-scan", "sometimes"}).code == kInvalidInput);
  CHECK(cli({"run", s / "p", "--trace", "everything"}).code == kInvalidInput);
  CHECK(cli({"run", s / "p", "--deterministic-gc", "--live-gc"}).code == kInvalidInput);
  CHECK(cli({"run", s / "missing"}).code == kIoError);

  const std::string model = s.write("model.txt", "ecall_cost = 1\nocall_cost = 1\n");
  Outcome cheap = cli({"run", s / "p", "--model", model, "--trace", "transitions"});
  CHECK(cheap.code == kOk);
  CHECK(contains(cheap.err, "cycles=1\n"));
  CHECK(cli({"run", s / "p", "--model", s.write("bad.txt", "epc_penalty = -3\n")}).code == kInvalidInput);
  CHECK(cli({"run", s / "p", "--model", s / "absent.txt"}).code == kInvalidInput);

  Outcome limited = cli({"run", s / "p", "--step-limit", "3"});
  CHECK(limited.code == kProgramError);
  CHECK(contains(limited.err, "step limit exceeded"));

  // A mutated image byte is rejected or, if it still decodes, detected by the interface check.
  const std::string img = s / "p" + "/trusted.img";
  std::string bytes = slurp(img);
  bytes[bytes.size() / 2] ^= 0x5a;
  std::ofstream(img, std::ios::binary) << bytes;
  Outcome broken = cli({"run", s / "p"});
  CHECK(broken.code != kOk);
  CHECK_FALSE(broken.err.empty());
  Outcome cmp = cli({"compare", fixture("listing1.ep"), "--plan", s / "p"});
  CHECK((cmp.code == kIoError || cmp.code == kMismatch || cmp.code == kProgramError));
}

TEST_CASE("program errors exit 3 with a trace; dump-fs stays inside its directory") {
  Scratch s("prog_err");
  const std::string thrower = s.write("thrower.ep", R"(
@Trusted
public class Divider {
  public Divider() {}
  public int div(int a, int b) { return a / b; }
}
@Untrusted
public class Main {
  public static void main(list<str> args) {
    var d = new Divider();
    print(to_str(d.div(6, 3)));
    print(to_str(d.div(1, 0)));
  }
}
)");
  REQUIRE(cli({"partition", thrower, "-o", s / "p"}).code == kOk);
  Outcome r = cli({"run", s / "p"});
  CHECK(r.code == kProgramError);
  CHECK(r.out == "2\n");
  CHECK(contains(r.err, "division by zero"));
  CHECK(contains(r.err, "Divider.div"));

  const std::string escape = s.write("escape.ep", R"(
class Main {
  public static void main() {
    file_write("../escaped.txt", "x");
  }
}
)");
  Outcome esc = cli({"run-unpartitioned", escape, "--dump-fs", s / "fs"});
  CHECK(esc.code == kIoError);
  CHECK_FALSE(fs::exists(s / "escaped.txt"));
  const std::string absolute = s.write("absolute.ep", R"(
class Main {
  public static void main() {
    file_write("/tmp/encpart_should_not_exist.txt", "x");
  }
}
)");
  CHECK(cli({"run-unpartitioned", absolute, "--dump-fs", s / "fs2"}).code == kIoError);
  CHECK_FALSE(fs::exists("/tmp/encpart_should_not_exist.txt"));
}

TEST_CASE("run-unpartitioned and the reference mode") {
  Scratch s("unpart");
  Outcome r = cli({"run-unpartitioned", fixture("listing1_verbose.ep"), "--metrics", s / "m.txt"});
  REQUIRE_MESSAGE(r.code == kOk, r.err);
  CHECK(r.out == "Alice: 75\nBob: 50\ntotal 125\nAlice: 75\nBob: 50\n\n");
  const std::string enclave = slurp(s / "m.txt");
  CHECK(contains(enclave, "ocalls = 6"));

  Outcome ref = cli({"run-unpartitioned", fixture("listing1_verbose.ep"), "--reference", "--metrics", s / "r.txt"});
  REQUIRE(ref.code == kOk);
  CHECK(ref.out == r.out);
  CHECK(contains(slurp(s / "r.txt"), "ocalls = 0"));
  CHECK(cli({"run-unpartitioned", fixture("bad_encapsulation.ep")}).code == kInvalidInput);
}

TEST_CASE("compare reports pass, transition counts and divergences") {
  Scratch s("compare");
  Outcome l1 = cli({"compare", fixture("listing1.ep")});
  REQUIRE_MESSAGE(l1.code == kOk, l1.err);
  CHECK(l1.out.rfind("PASS ", 0) == 0);
  CHECK(contains(l1.out, "ecalls=6 ocalls=0 shim=0"));

  Outcome neutral = cli({"compare", fixture("all_neutral.ep")});
  CHECK(neutral.code == kOk);
  CHECK(contains(neutral.out, "ecalls=0 ocalls=0"));

  REQUIRE(cli({"partition", fixture("trusted_calls_untrusted.ep"), "-o", s / "p"}).code == kOk);
  Outcome planned = cli({"compare", fixture("trusted_calls_untrusted.ep"), "--plan", s / "p"});
  CHECK(planned.code == kOk);
  CHECK(planned.out == cli({"compare", fixture("trusted_calls_untrusted.ep")}).out);

  Outcome diverge = cli({"compare", s.write("diverge.ep", kDiverging)});
  CHECK(diverge.code == kMismatch);
  CHECK(diverge.out.rfind("FAIL ", 0) == 0);
  CHECK(contains(diverge.out, "transcript differs at byte 0"));

  // Plan from a different program: interface mismatch against the source is fine, but outputs differ.
  Outcome wrong = cli({"compare", fixture("listing1.ep"), "--plan", s / "p"});
  CHECK(wrong.code == kMismatch);
}

TEST_CASE("bench prints deterministic csv") {
  Scratch s("bench");
  Outcome rmi = cli({"bench", "rmi", "--invocations", "40"});
  REQUIRE_MESSAGE(rmi.code == kOk, rmi.err);
  CHECK(rmi.out.rfind("config,invocations,ecalls,ocalls,bytes,simulated_cycles\n", 0) == 0);
  CHECK(cli({"bench", "rmi", "--invocations", "40"}).out == rmi.out);

  Outcome ser = cli({"bench", "rmi_serialization", "--invocations", "20", "--payload-sizes", "1,8", "--out", s / "ser.csv"});
  REQUIRE(ser.code == kOk);
  CHECK(ser.out.empty());
  const std::string csv = slurp(s / "ser.csv");
  CHECK(contains(csv, "proxy-in->out+s,8,"));

  Outcome all = cli({"bench", "all", "--invocations", "10", "--gc-cycles", "5", "--gc-objects", "20", "--classes", "5",
                     "--steps", "0,50,100", "--cpu-units", "100", "--io-bytes", "16", "--seed", "7"});
  REQUIRE_MESSAGE(all.code == kOk, all.err);
  for (const char* suite : {"# proxy_creation", "# rmi\n", "# rmi_serialization", "# gc_perf", "# gc_consistency", "# class_sweep"}) {
    CHECK(contains(all.out, suite));
  }
  CHECK(all.out == cli({"bench", "all", "--invocations", "10", "--gc-cycles", "5", "--gc-objects", "20", "--classes", "5",
                        "--steps", "0,50,100", "--cpu-units", "100", "--io-bytes", "16", "--seed", "7"})
                       .out);

  CHECK(cli({"bench", "nope"}).code == kInvalidInput);
  CHECK(cli({"bench", "class_sweep", "--steps", "0,150"}).code == kInvalidInput);
  CHECK(cli({"bench", "class_sweep", "--classes", "0"}).code == kInvalidInput);
  CHECK(cli({"bench", "rmi", "--invocations", "0"}).code == kInvalidInput);
}
