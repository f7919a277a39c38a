#include <random>
#include <sstream>

#include "encpart/bench/bench.hpp"

namespace encpart::bench {

namespace {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::string program() {
    values_ = static_cast<int>(pick(3));
    workers_ = 2 + static_cast<int>(pick(4));
    trusted_.assign(static_cast<std::size_t>(workers_), false);
    bool any_trusted = false;
    for (auto&& t : trusted_) {
      t = chance(55);
      any_trusted = any_trusted || t;
    }
    if (!any_trusted) trusted_[pick(trusted_.size())] = true;
    peer_.assign(static_cast<std::size_t>(workers_), -1);
    for (int i = 0; i + 1 < workers_; ++i) {
      if (chance(75)) peer_[static_cast<std::size_t>(i)] = i + 1 + static_cast<int>(pick(static_cast<std::uint64_t>(workers_ - i - 1)));
    }

    for (int v = 0; v < values_; ++v) value_class(v);
    for (int k = 0; k < workers_; ++k) worker_class(k);
    main_class();
    return out_.str();
  }

 private:
  std::uint64_t pick(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }
  bool chance(int pct) { return static_cast<int>(pick(100)) < pct; }
  std::int64_t small() { return static_cast<std::int64_t>(pick(41)) - 10; }
  std::string word() {
    static const char* words[] = {"ash", "birch", "cedar", "elm", "fir", "oak", "pine", "yew"};
    return words[pick(8)];
  }

  void value_class(int v) {
    out_ << "public class V" << v << " {\n"
         << "  private int a;\n"
         << "  private str s;\n\n"
         << "  public V" << v << "(int a0, str s0) {\n"
         << "    this.a = a0;\n"
         << "    this.s = s0;\n"
         << "  }\n\n"
         << "  public int get() {\n"
         << "    return this.a * " << (v + 2) << ";\n"
         << "  }\n\n"
         << "  public str label() {\n"
         << "    return this.s + \"#\" + to_str(this.a);\n"
         << "  }\n"
         << "}\n\n";
  }

  void worker_class(int k) {
    const int p = peer_[static_cast<std::size_t>(k)];
    out_ << (trusted_[static_cast<std::size_t>(k)] ? "@Trusted\n" : "@Untrusted\n");
    out_ << "public class K" << k << " {\n"
         << "  private int count;\n"
         << "  private str note = \"k" << k << "\";\n"
         << "  private list<int> items = [];\n";
    if (p >= 0) out_ << "  private K" << p << " peer;\n";
    out_ << "\n  public K" << k << "(int start) {\n"
         << "    this.count = start;\n"
         << "  }\n\n"
         << "  public void add(int v) {\n"
         << "    this.count += v;\n"
         << "    this.items.append(v);\n"
         << "  }\n\n"
         << "  public int total() {\n"
         << "    int sum = 0;\n"
         << "    int i = 0;\n"
         << "    while (i < this.items.len()) {\n"
         << "      sum += this.items.get(i);\n"
         << "      i += 1;\n"
         << "    }\n"
         << "    return sum + this.count;\n"
         << "  }\n\n"
         << "  public str tag(str s) {\n"
         << "    this.note = this.note + s;\n"
         << "    return this.note + \":\" + to_str(this.count);\n"
         << "  }\n\n"
         << "  public void report() {\n"
         << "    print(\"K" << k << " \" + to_str(this.count) + \" \" + this.note);\n"
         << "  }\n\n"
         << "  public str save() {\n"
         << "    file_write(\"k" << k << ".txt\", this.note + \"=\" + to_str(this.total()));\n"
         << "    return file_read(\"k" << k << ".txt\");\n"
         << "  }\n";
    if (values_ > 0) {
      const int v = static_cast<int>(pick(static_cast<std::uint64_t>(values_)));
      absorb_.push_back(v);
      out_ << "\n  public int absorb(V" << v << " v) {\n"
           << "    this.count += v.get();\n"
           << "    return this.count;\n"
           << "  }\n";
    } else {
      absorb_.push_back(-1);
    }
    if (p >= 0) {
      out_ << "\n  public void link(K" << p << " other) {\n"
           << "    this.peer = other;\n"
           << "  }\n\n"
           << "  public int relay(int v) {\n"
           << "    if (this.peer == null) {\n"
           << "      return v;\n"
           << "    }\n"
           << "    this.peer.add(v);\n"
           << "    return this.peer.total();\n"
           << "  }\n\n"
           << "  public K" << p << " spawn(int v) {\n"
           << "    K" << p << " made = new K" << p << "(v + this.count);\n"
           << "    return made;\n"
           << "  }\n\n"
           << "  public void poke(K" << p << " other, int v) {\n"
           << "    other.add(v);\n"
           << "    other.add(this.count);\n"
           << "  }\n";
    }
    out_ << "}\n\n";
  }

  std::string var_of(int k) {
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < objects_.size(); ++i) {
      if (objects_[i].second == k) hits.push_back(i);
    }
    if (hits.empty()) return {};
    return objects_[hits[pick(hits.size())]].first;
  }

  std::string create(int k) {
    std::string name = "o" + std::to_string(next_var_++);
    line() << "K" << k << " " << name << " = new K" << k << "(" << small() << ");\n";
    objects_.push_back({name, k});
    return name;
  }

  std::ostringstream& line() {
    out_ << std::string(static_cast<std::size_t>(indent_), ' ');
    return out_;
  }

  void statement() {
    if (objects_.empty()) {
      create(static_cast<int>(pick(static_cast<std::uint64_t>(workers_))));
      return;
    }
    const auto& [name, k] = objects_[pick(objects_.size())];
    const std::string o = name;
    const int cls = k;
    const int p = peer_[static_cast<std::size_t>(cls)];
    switch (pick(14)) {
      case 0:
        create(static_cast<int>(pick(static_cast<std::uint64_t>(workers_))));
        break;
      case 1:
        line() << o << ".add(" << small() << ");\n";
        break;
      case 2:
        line() << "print(\"t \" + to_str(" << o << ".total()));\n";
        break;
      case 3:
        line() << "print(" << o << ".tag(\"" << word() << "\"));\n";
        break;
      case 4:
        line() << o << ".report();\n";
        break;
      case 5:
        line() << "print(" << o << ".save());\n";
        break;
      case 6: {
        const int v = absorb_[static_cast<std::size_t>(cls)];
        if (v < 0) break;
        line() << "print(to_str(" << o << ".absorb(new V" << v << "(" << small() << ", \"" << word() << "\"))));\n";
        break;
      }
      case 7: {
        if (p < 0) break;
        std::string other = var_of(p);
        if (other.empty()) other = create(p);
        line() << o << ".link(" << other << ");\n";
        break;
      }
      case 8:
        if (p < 0) break;
        line() << "print(\"r \" + to_str(" << o << ".relay(" << small() << ")));\n";
        break;
      case 9: {
        if (p < 0) break;
        std::string made = "o" + std::to_string(next_var_++);
        line() << "K" << p << " " << made << " = " << o << ".spawn(" << small() << ");\n";
        objects_.push_back({made, p});
        line() << "print(\"s \" + to_str(" << made << ".total()));\n";
        break;
      }
      case 10: {
        if (p < 0) break;
        std::string other = var_of(p);
        if (other.empty()) break;
        line() << o << ".poke(" << other << ", " << small() << ");\n";
        break;
      }
      case 11: {
        const std::string i = "i" + std::to_string(next_var_++);
        line() << "int " << i << " = 0;\n";
        line() << "while (" << i << " < " << (1 + pick(12)) << ") {\n";
        indent_ += 2;
        line() << o << ".add(" << i << ");\n";
        if (chance(40)) line() << o << ".tag(\"" << word() << "\");\n";
        line() << i << " += 1;\n";
        indent_ -= 2;
        line() << "}\n";
        break;
      }
      case 12:
        // Drop the old object: its proxy and mirror become garbage.
        line() << o << " = new K" << cls << "(" << small() << ");\n";
        if (chance(50)) line() << "gc();\n";
        break;
      case 13: {
        if (values_ > 0 && chance(50)) {
          const std::string v = "v" + std::to_string(next_var_++);
          const int vc = static_cast<int>(pick(static_cast<std::uint64_t>(values_)));
          line() << "V" << vc << " " << v << " = new V" << vc << "(" << small() << ", \"" << word() << "\");\n";
          line() << "print(" << v << ".label());\n";
        } else {
          const std::string l = "l" + std::to_string(next_var_++);
          line() << "list<int> " << l << " = [" << small() << ", " << small() << "];\n";
          line() << l << ".append(" << o << ".total());\n";
          line() << "print(to_str(" << l << ".get(2)) + \"/\" + to_str(" << l << ".len()));\n";
        }
        break;
      }
    }
  }

  void main_class() {
    if (chance(50)) out_ << "@Untrusted\n";
    out_ << "public class Main {\n  public static void main(list<str> args) {\n";
    indent_ = 4;
    const int n = 6 + static_cast<int>(pick(25));
    for (int i = 0; i < n; ++i) statement();
    line() << "print(\"end\");\n";
    out_ << "  }\n}\n";
  }

  std::mt19937_64 rng_;
  std::ostringstream out_;
  int values_ = 0;
  int workers_ = 0;
  std::vector<bool> trusted_;
  std::vector<int> peer_;
  std::vector<int> absorb_;
  std::vector<std::pair<std::string, int>> objects_;
  int next_var_ = 0;
  int indent_ = 0;
};

}  // namespace

std::string random_program(std::uint64_t seed) { return Gen(seed).program(); }

}  // namespace encpart::bench
