#include "doctest.h"
#include "support.hpp"

#include <clocale>
#include <sstream>

#include "qmtc/app.hpp"

using namespace qmtc;
using namespace qmtc::app;
using testsupport::Complex;
using testsupport::ComplexMatrix;

namespace {

std::string csv_of(const Config& c, const std::string& cmd) {
    std::ostringstream os;
    write_csv(run(c, cmd), os);
    return os.str();
}

std::string first_error(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.errors().at(0);
    }
    return "";
}

bool any_error_mentions(const std::function<void()>& f, const std::string& needle) {
    try {
        f();
    } catch (const ConfigError& e) {
        for (const auto& m : e.errors())
            if (m.find(needle) != std::string::npos) return true;
    }
    return false;
}

const char* kDemo =
    "[model]\n"
    "type = exponential\n"
    "tau = 1\n"
    "beta = 0.2\n"
    "lambda = 0.1\n"
    "[demo]\n"
    "omega_points = 5\n"
    "dt_points = 4\n";

}  // namespace

TEST_CASE("minimal demo config runs") {
    auto c = Config::from_string(kDemo);
    auto t = run(c, "demo-thermalization");
    CHECK(t.rows.size() == 5);
    CHECK(t.columns == std::vector<std::string>{"omega", "wq_order0", "wq_order1", "ratio0", "ratio1",
                                                 "target_exp_beta_omega"});
    CHECK(t.config_hash.size() == 16);
}

TEST_CASE("validation errors name the offending key") {
    auto c = Config::from_string(kDemo);
    c.set("model.tau", "-1");
    CHECK(first_error([&] { run(c, "demo-thermalization"); }).rfind("model.tau", 0) == 0);

    auto bad = Config::from_string("[model]\ntype = finite\ndim = 2\nH_e = [[1, 0, 0], [0, 1, 0]]\ncouplings = [\"pauli_x\"]\n");
    std::string msg = first_error([&] { run(bad, "mtc"); });
    CHECK(msg.find("model.H_e") != std::string::npos);
    CHECK(msg.find("expected a square matrix, got 2x3") != std::string::npos);
    Config wrong;
    wrong.set("system.Hs", "[[1, 0, 0], [0, 1, 0], [0, 0, 1]]");
    CHECK(first_error([&] { run(wrong, "mtc"); }) == "system.Hs: expected 2x2 matrix, got 3x3");

    CHECK(any_error_mentions([] { Config::from_string("[model]\ntua = 1\n"); }, "model.tua"));
    CHECK(any_error_mentions([] { Config::from_string("[modle]\ntau = 1\n"); }, "modle.tau"));
    Config d;
    CHECK_THROWS_AS(d.set("nosection", "1"), ConfigError);
    d.set("query.order", "2");
    CHECK(any_error_mentions([&] { run(d, "mtc"); }, "query.order"));
    d.set("query.order", "1");
    d.set("model.beta", "abc");
    CHECK(any_error_mentions([&] { run(d, "mtc"); }, "model.beta"));
}

TEST_CASE("matrix literals") {
    auto m = parse_matrix("k", "[[1, \"1-2i\"], [\"1+2i\", 0]]", 2);
    CHECK(m(0, 1) == Complex(1, -2));
    CHECK(m(1, 0) == Complex(1, 2));
    CHECK(testsupport::max_abs(parse_matrix("k", "0.5*pauli_z", 2) - 0.5 * testsupport::pauli('z')) == 0.0);
    CHECK(testsupport::max_abs(parse_matrix("k", "identity", 3) - ComplexMatrix::Identity(3, 3)) == 0.0);
    CHECK_THROWS_AS(parse_matrix("k", "pauli_x", 3), ConfigError);
    CHECK_THROWS_AS(parse_matrix("k", "[[1, 2], [3]]", 2), ConfigError);
    CHECK_THROWS_AS(parse_matrix("k", "frobnicate", 2), ConfigError);
}

TEST_CASE("overrides and hashing") {
    auto a = Config::from_string(kDemo);
    auto b = Config::from_string(kDemo);
    CHECK(a.hash() == b.hash());
    CHECK(a.canonical() == b.canonical());
    b.set("demo.mu", "0.06");
    CHECK(a.hash() != b.hash());
    CHECK(b.get("demo.mu") == "0.06");
    // defaults are part of the resolved view
    CHECK(Config().get("numerics.cutoff_factor") == "40");
    CHECK(Config().resolved().size() == Config::schema_keys().size());
}

TEST_CASE("identical configs give byte-identical CSV") {
    auto a = Config::from_string(kDemo);
    auto b = Config::from_string(kDemo);
    std::string x = csv_of(a, "demo-thermalization"), y = csv_of(b, "demo-thermalization");
    CHECK(x == y);
    CHECK(x.rfind(std::string("# qmtc ") + version() + " config_hash=" + a.hash_hex() + "\n", 0) == 0);
    // locale with a comma decimal separator must not leak into the output
    if (std::setlocale(LC_ALL, "de_DE.UTF-8")) {
        CHECK(csv_of(a, "demo-thermalization") == x);
        std::setlocale(LC_ALL, "C");
    }
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.0, 12) == "0");
    CHECK(format_number(-0.0, 12) == "0");
    CHECK(format_number(0.5, 12) == "0.5");
    CHECK(format_number(1.0 / 3.0, 4) == "0.3333");
    CHECK(format_number(1e-20, 3) == "1e-20");
}

TEST_CASE("command tables") {
    Config c;
    c.set("query.times", "[2, 4, 7]");
    c.set("query.observables", "[\"pauli_z\", \"pauli_x\", \"pauli_z\"]");
    auto bp = run(c, "biprob");
    CHECK(bp.columns == std::vector<std::string>{"f3p", "f2p", "f1p", "f3m", "f2m", "f1m", "re", "im"});
    CHECK(bp.rows.size() == 64);
    double total = 0.0;
    for (const auto& r : bp.rows) total += std::get<double>(r[6]);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

    c.set("query.branches", "++-");
    auto mt = run(c, "mtc");
    CHECK(mt.columns == std::vector<std::string>{"quantity", "re", "im"});
    CHECK(std::get<std::string>(mt.rows[0][0]) == "order0");

    Config f;
    f.set("model.type", "random_thermal");
    f.set("fdt.points", "9");
    auto fd = run(f, "fdt-check");
    CHECK(fd.columns == std::vector<std::string>{"omega", "lhs", "rhs", "abs_dev", "rel_dev"});
    CHECK(fd.rows.size() == 9);

    auto su = run(Config(), "susceptibility");
    CHECK(su.columns == std::vector<std::string>{"t", "residue_sum", "highT_limit", "numeric_ft", "abs_diff"});
    CHECK_THROWS_AS(run(Config(), "nonsense"), DomainError);
}

TEST_CASE("finite model adds the exact reference") {
    Config c;
    c.set("model.type", "finite");
    c.set("model.dim", "2");
    c.set("model.H_e", "0.5*pauli_z");
    c.set("model.couplings", "[\"pauli_x\"]");
    c.set("model.beta", "0.5");
    c.set("model.lambda", "0.05");
    c.set("query.times", "[2, 5]");
    c.set("system.propagator", "born");
    auto t = run(c, "mtc");
    REQUIRE(t.rows.size() == 4);
    CHECK(std::get<std::string>(t.rows[3][0]) == "exact");
    double total_re = std::get<double>(t.rows[2][1]), exact_re = std::get<double>(t.rows[3][1]);
    CHECK(std::abs(total_re - exact_re) < 1e-3);
}
