#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "covpred/metrics/cc.hpp"
#include "covpred/project.hpp"
#include "helpers.hpp"

using namespace covpred;

namespace {

const MethodDecl& find_method(const AnalyzedProject& prj, const std::string& cls,
                              const std::string& name) {
  int ci = prj.model.class_index(cls);
  REQUIRE(ci >= 0);
  for (const auto& m : prj.model.classes[ci].methods)
    if (m.name == name) return m;
  REQUIRE(false);
  static MethodDecl dummy;
  return dummy;
}

Cfg cfg_of(const std::string& body) {
  auto prj = parse_sources({{"T.java", "class T { void m() " + body + " }"}});
  return build_cfg(find_method(prj, "T", "m"));
}

}  // namespace

TEST_CASE("tokenize classifies a simple declaration") {
  TokenStream ts = tokenize("int x = 1;");
  std::vector<Token> code;
  for (const auto& t : ts.tokens())
    if (t.is_code()) code.push_back(t);
  REQUIRE(code.size() == 5);
  CHECK(code[0].kind == TokenKind::Keyword);
  CHECK(code[0].lexeme == "int");
  CHECK(code[1].kind == TokenKind::Identifier);
  CHECK(code[2].kind == TokenKind::AssignmentOp);
  CHECK(code[3].kind == TokenKind::Literal);
  CHECK(code[4].kind == TokenKind::Semicolon);
}

TEST_CASE("tokenize of empty input yields an empty stream") {
  TokenStream ts = tokenize("");
  CHECK(ts.tokens().empty());
}

TEST_CASE("tokenize a.b(); matches a hand count") {
  // hand tokenization: a . b ( ) ;  -> 1 dot, 2 identifiers, 1 semicolon
  TokenStream ts = tokenize("a.b();");
  int dots = 0, ids = 0, semis = 0;
  for (const auto& t : ts.tokens()) {
    if (t.kind == TokenKind::Dot) ++dots;
    if (t.kind == TokenKind::Identifier) ++ids;
    if (t.kind == TokenKind::Semicolon) ++semis;
  }
  CHECK(dots == 1);
  CHECK(ids == 2);
  CHECK(semis == 1);
}

TEST_CASE("all compound assignment operators classify as assignments") {
  for (const char* op : {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=",
                         ">>>="}) {
    TokenStream ts = tokenize(std::string("x ") + op + " y;");
    bool found = false;
    for (const auto& t : ts.tokens())
      if (t.kind == TokenKind::AssignmentOp && t.lexeme == op) found = true;
    CHECK_MESSAGE(found, op);
  }
  // comparison operators must not classify as assignments
  for (const char* op : {"==", "<=", ">=", "!="}) {
    TokenStream ts = tokenize(std::string("x ") + op + " y;");
    for (const auto& t : ts.tokens()) {
      CHECK(t.kind != TokenKind::AssignmentOp);
    }
  }
}

TEST_CASE("true false null are literals, text blocks and hex literals lex") {
  TokenStream ts = tokenize("boolean b = true; Object o = null; int h = 0x1eF2L;");
  int literals = 0;
  for (const auto& t : ts.tokens())
    if (t.kind == TokenKind::Literal) ++literals;
  CHECK(literals == 3);
  TokenStream tb = tokenize("String s = \"\"\"\nline\n\"\"\";");
  CHECK(tb.joined() == "String s = \"\"\"\nline\n\"\"\";");
}

TEST_CASE("lexing errors carry line numbers") {
  CHECK_THROWS_AS(tokenize("int a;\n\"unterminated"), ParseError);
  try {
    tokenize("int a;\n\"unterminated");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(tokenize("char c = 'x\n;"), ParseError);
  CHECK_THROWS_AS(tokenize("a\n/* no end"), ParseError);
  try {
    tokenize("a\n/* no end");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("tokenization round-trips every fixture corpus file byte for byte") {
  namespace fs = std::filesystem;
  fs::path corpus = testutil::fixture_dir() / "corpus";
  REQUIRE(fs::exists(corpus));
  int files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(corpus)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".java") continue;
    std::string text = testutil::slurp(entry.path());
    TokenStream ts = tokenize(text);
    CHECK_MESSAGE(ts.joined() == text, entry.path().string());
    ++files;
  }
  CHECK(files >= 10);
}

TEST_CASE("random token soup round-trips or throws, and never hangs the parser") {
  const char* alphabet = "abc01 \t\n{}()[];.,+-*/%<>=!&|^~?:@#\"'\\$_";
  const std::size_t alpha_n = std::string(alphabet).size();
  int lossless = 0, threw = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(seed);
    std::string s;
    std::size_t len = rng.next_below(160);
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.next_below(alpha_n)];
    try {
      TokenStream ts = tokenize(s);
      CHECK(ts.joined() == s);
      ++lossless;
      detail::Parser parser(ts, "fuzz");
      (void)parser.parse();  // must terminate without crashing
    } catch (const ParseError&) {
      ++threw;  // unterminated literals are legitimate rejections
    }
  }
  CHECK(lossless + threw == 500);
  CHECK(lossless > 0);
}

TEST_CASE("parse_project on a single declaration") {
  auto prj = parse_sources({{"A.java", "package p; class A { void m(){} }"}});
  CHECK(prj.model.packages.size() == 1);
  CHECK(prj.model.files.size() == 1);
  REQUIRE(prj.model.classes.size() == 1);
  CHECK(prj.model.classes[0].qualified_name == "p.A");
  CHECK(prj.model.classes[0].methods.size() == 1);
}

TEST_CASE("superclass links resolve inside the project") {
  auto prj = parse_sources({
      {"A.java", "package p; class A { void base(){} }"},
      {"B.java", "package p; class B extends A { void own(){} }"},
  });
  int b = prj.model.class_index("p.B");
  int a = prj.model.class_index("p.A");
  REQUIRE(b >= 0);
  REQUIRE(a >= 0);
  CHECK(prj.index.links(b).super == a);
  CHECK(prj.index.dit(b) == 2);
  CHECK(prj.index.dit(a) == 1);
  CHECK(prj.index.links(a).children == std::vector<int>{b});
}

TEST_CASE("external superclasses stay opaque") {
  auto prj = parse_sources({{"C.java", "package p; class C extends javax.External {}"}});
  int c = prj.model.class_index("p.C");
  CHECK(prj.index.links(c).super == -1);
  CHECK(prj.index.links(c).super_external == "javax.External");
  CHECK(prj.index.dit(c) == 1);
}

TEST_CASE("parsing is deterministic") {
  std::string src =
      "package p; class A { int f; A(){f=0;} int g(){return f;} void s(int v){f=v;} "
      "class In { void q(){ if (true) f2(); } void f2(){} } }";
  auto p1 = parse_sources({{"A.java", src}});
  auto p2 = parse_sources({{"A.java", src}});
  std::ostringstream d1, d2;
  dump_model(p1, d1);
  dump_model(p2, d2);
  CHECK(d1.str() == d2.str());
}

TEST_CASE("nested classes become independent entries; empty trees are fine") {
  auto prj = parse_sources({{"A.java", "package p; class A { static class B { void m(){} } }"}});
  CHECK(prj.model.class_index("p.A") >= 0);
  CHECK(prj.model.class_index("p.A.B") >= 0);

  auto empty = parse_sources({});
  CHECK(empty.model.classes.empty());  // empty model, not an error
}

TEST_CASE("files that fail to lex land in the skip list") {
  auto prj = parse_sources({
      {"Good.java", "package p; class Good {}"},
      {"Bad.java", "class Bad { String s = \"unterminated }"},
  });
  CHECK(prj.model.classes.size() == 1);
  REQUIRE(prj.model.skipped.size() == 1);
  CHECK(prj.model.skipped[0].path == "Bad.java");
}

TEST_CASE("duplicate qualified names are rejected, never merged") {
  auto prj = parse_sources({
      {"A1.java", "package p; class A { void m1(){} }"},
      {"A2.java", "package p; class A { void m2(){} }"},
  });
  CHECK(prj.model.classes.size() == 1);
  REQUIRE(prj.model.skipped.size() == 1);
}

TEST_CASE("accessor and mutator flags follow the strict shapes") {
  auto prj = parse_sources({{"A.java", R"(package p;
class A {
  private int count; private String name;
  public int getCount() { return count; }
  public String name() { return this.name; }
  public void setCount(int c) { count = c; }
  public void setName(String n) { this.name = n; return; }
  public int notAccessor() { return count + 1; }
  public void notMutator(int c) { count = c + 1; }
  public void alsoNot(int c) { count = c; extra(); }
  void extra() {}
})"}});
  int a = prj.model.class_index("p.A");
  REQUIRE(a >= 0);
  const auto& cls = prj.model.classes[a];
  auto flags = [&](const std::string& name) {
    for (const auto& m : cls.methods)
      if (m.name == name) return std::pair<bool, bool>{m.is_accessor, m.is_mutator};
    return std::pair<bool, bool>{false, false};
  };
  CHECK(flags("getCount") == std::pair<bool, bool>{true, false});
  CHECK(flags("name") == std::pair<bool, bool>{true, false});
  CHECK(flags("setCount") == std::pair<bool, bool>{false, true});
  CHECK(flags("setName") == std::pair<bool, bool>{false, true});
  CHECK(flags("notAccessor") == std::pair<bool, bool>{false, false});
  CHECK(flags("notMutator") == std::pair<bool, bool>{false, false});
  CHECK(flags("alsoNot") == std::pair<bool, bool>{false, false});
  for (const auto& m : cls.methods) CHECK_FALSE((m.is_accessor && m.is_mutator));
}

TEST_CASE("symbol index soundness over the fixture corpus") {
  auto prj = parse_project(testutil::fixture_dir() / "corpus");
  CHECK(prj.index.inheritance_acyclic());
  const int n = static_cast<int>(prj.model.classes.size());
  for (int c = 0; c < n; ++c) {
    const auto& links = prj.index.links(c);
    if (links.super >= 0) CHECK(links.super < n);
    for (int p : links.parents) {
      CHECK(p >= 0);
      CHECK(p < n);
    }
    for (int ref : prj.index.refs(c).fanout) {
      CHECK(ref >= 0);
      CHECK(ref < n);
    }
  }
}

// ---------------------------------------------------------------------------
// Control-flow graphs
// ---------------------------------------------------------------------------

TEST_CASE("empty body: entry to exit, no decisions") {
  Cfg cfg = cfg_of("{}");
  CHECK(cfg.node_count == 2);
  CHECK(cfg.edges.size() == 1);
  DecisionCounts d = cfg.decisions;
  CHECK(d.ifs + d.loops + d.case_labels + d.catches + d.ternaries + d.sc_and + d.sc_or == 0);
}

TEST_CASE("short-circuit condition annotations match the strict example") {
  Cfg cfg = cfg_of("{ if (x && y || z) s1(); else s2(); }");
  CHECK(cfg.decisions.ifs == 1);
  CHECK(cfg.decisions.sc_and == 1);
  CHECK(cfg.decisions.sc_or == 1);
}

TEST_CASE("while with break: loop, if, one unstructured exit edge") {
  Cfg cfg = cfg_of("{ while (a) { if (b) break; } }");
  CHECK(cfg.decisions.loops == 1);
  CHECK(cfg.decisions.ifs == 1);
  CHECK(cfg.unstructured_exit_edges == 1);
}

TEST_CASE("cfg invariants hold over generated method bodies") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    testutil::BodyGen gen(seed);
    std::string body = gen.method_body();
    auto prj = parse_sources({{"G.java", "class G { void m() " + body + " }"}});
    REQUIRE_MESSAGE(prj.model.skipped.empty(), body);
    Cfg cfg = build_cfg(find_method(prj, "G", "m"));
    auto reach = reachable_from_entry(cfg);
    for (int v = 0; v < cfg.node_count; ++v) CHECK_MESSAGE(reach[v], body);
    for (const auto& e : cfg.edges) {
      CHECK(e.from >= 0);
      CHECK(e.from < cfg.node_count);
      CHECK(e.to >= 0);
      CHECK(e.to < cfg.node_count);
      CHECK(e.from != cfg.exit);  // single exit, nothing leaves it
    }
    CHECK(cfg.cyclomatic_number() >= 1);
  }
}

// ---------------------------------------------------------------------------
// Cyclomatic complexity variants
// ---------------------------------------------------------------------------

TEST_CASE("decision contributes 1 to CC and 3 to strict CC") {
  Cfg cfg = cfg_of("{ if (x && y || z) s(); }");
  CcValues cc = compute_cc(cfg);
  CHECK(cc.standard == 2);
  CHECK(cc.strict == 4);
}

TEST_CASE("empty body scores 1 for all four variants") {
  CcValues cc = compute_cc(cfg_of("{}"));
  CHECK(cc.standard == 1);
  CHECK(cc.strict == 1);
  CHECK(cc.modified == 1);
  CHECK(cc.essential == 1);
}

TEST_CASE("switch with three case labels: CC counts labels, modified counts once") {
  CcValues cc =
      compute_cc(cfg_of("{ switch (x) { case 1: a(); break; case 2: b(); break; case 3: c(); } }"));
  CHECK(cc.standard == 4);
  CHECK(cc.modified == 2);
}

TEST_CASE("essential complexity: structured bodies reduce to 1, breaks do not") {
  CHECK(compute_cc(cfg_of("{ if (a) { while (b) { x(); } } else { do { y(); } while (c); } z(); }"))
            .essential == 1);
  CHECK(compute_cc(cfg_of("{ switch (x) { case 1: a(); break; case 2: b(); break; default: c(); } }"))
            .essential == 1);
  CHECK(compute_cc(cfg_of("{ while (a) { if (b) break; } }")).essential == 3);
}

TEST_CASE("modern constructs parse: generics, lambdas, arrow switches, enum bodies") {
  const char* hard = R"JAVA(package p;

import static java.util.Collections.emptyList;
import java.util.*;
import java.util.function.*;

public class Hard<T extends Comparable<? super T>> implements Iterable<T> {
    private final Map<String, List<? extends Number>> table = new HashMap<>();
    private T[] items;
    private int size;

    @SafeVarargs
    public Hard(T... initial) {
        this.items = initial;
        this.size = initial.length;
    }

    public Iterator<T> iterator() {
        return new Iterator<T>() {
            private int cursor = 0;
            public boolean hasNext() { return cursor < size; }
            public T next() { return items[cursor++]; }
        };
    }

    public <R> List<R> map(Function<? super T, ? extends R> fn) {
        List<R> out = new ArrayList<>(size);
        for (T item : this) {
            out.add(fn.apply(item));
        }
        return out;
    }

    public long weird(int n) {
        long acc = (n & 1) == 0 ? 0L : ~0L >>> 3;
        int[][] grid = new int[n][n + 1];
        label:
        for (int i = 0; i < n; i++) {
            switch (i % 3) {
                case 0 -> acc += i;
                case 1 -> { acc -= i; }
                default -> acc ^= i;
            }
            if (acc > (long) n * n) break label;
        }
        Runnable r = () -> System.out.println("acc=" + acc);
        Supplier<String> s = this::toString;
        Object o = (n > 3) ? (Object) "big" : Integer.valueOf(n);
        assert acc != 42 : "unlucky";
        return acc;
    }

    static class Inner implements Comparable<Inner> {
        int rank;
        public int compareTo(Inner other) {
            return Integer.compare(rank, other.rank);
        }
    }

    public String text() {
        return """
            multi
            line
            """;
    }
}

@FunctionalInterface
interface Thing<X> { X get() throws Exception; }

enum Status implements Supplier<String> {
    OK("fine") { public String get() { return label; } },
    BAD("broken") { public String get() { return label + "!"; } };
    final String label;
    Status(String label) { this.label = label; }
    public String get() { return label; }
}
)JAVA";
  CHECK(tokenize(hard).joined() == hard);
  auto prj = parse_sources({{"Hard.java", hard}});
  CHECK(prj.model.skipped.empty());
  REQUIRE(prj.model.classes.size() == 4);
  int hard_idx = prj.model.class_index("p.Hard");
  REQUIRE(hard_idx >= 0);
  const ClassDecl& cls = prj.model.classes[hard_idx];
  CHECK(cls.methods.size() == 5);  // ctor iterator map weird text (Inner is separate)
  CHECK(cls.fields.size() == 3);
  const MethodDecl* weird = nullptr;
  for (const auto& m : cls.methods)
    if (m.name == "weird") weird = &m;
  REQUIRE(weird);
  Cfg cfg = build_cfg(*weird);
  CHECK(cfg.decisions.loops == 1);
  CHECK(cfg.decisions.case_labels == 2);   // arrow labels; default not counted
  CHECK(cfg.decisions.switch_stmts == 1);
  CHECK(cfg.decisions.ternaries == 2);
  CHECK(compute_cc(cfg).standard == 7);
  CHECK(prj.model.class_index("p.Hard.Inner") >= 0);
  int status = prj.model.class_index("p.Status");
  REQUIRE(status >= 0);
  CHECK(prj.model.classes[status].fields.size() == 3);  // OK, BAD, label
  int thing = prj.model.class_index("p.Thing");
  REQUIRE(thing >= 0);
  CHECK(prj.model.classes[thing].kind == TypeKind::Interface);
}

TEST_CASE("cc ordering invariant over 200 generated methods") {
  int checked = 0;
  for (std::uint64_t seed = 100; checked < 200; ++seed) {
    testutil::BodyGen gen(seed);
    std::string body = gen.method_body();
    auto prj = parse_sources({{"G.java", "class G { void m() " + body + " }"}});
    REQUIRE(prj.model.skipped.empty());
    CcValues cc = compute_cc(build_cfg(find_method(prj, "G", "m")));
    CHECK_MESSAGE(cc.strict >= cc.standard, body);
    CHECK_MESSAGE(cc.standard >= cc.modified, body);
    CHECK_MESSAGE(cc.modified >= 1, body);
    CHECK_MESSAGE(cc.standard >= cc.essential, body);
    CHECK_MESSAGE(cc.essential >= 1, body);
    ++checked;
  }
  CHECK(checked == 200);
}
