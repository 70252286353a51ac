// app.cpp - config schema, command dispatch, CSV output
#include "qmtc/app.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include "qmtc/bath.hpp"
#include "qmtc/experiments.hpp"
#include "qmtc/generators.hpp"
#include "qmtc/mtc_oracle.hpp"
#include "qmtc/perturb.hpp"

#ifndef QMTC_VERSION
#define QMTC_VERSION "0.0.0"
#endif

namespace qmtc::app {

using opalg::Complex;
using opalg::ComplexMatrix;
using json = nlohmann::json;

namespace {

// every accepted key with its default; times are in units of model.tau
const std::vector<std::pair<std::string, std::string>>& schema() {
    static const std::vector<std::pair<std::string, std::string>> s = {
        {"model.type", "exponential"},
        {"model.tau", "1"},
        {"model.beta", "0.2"},
        {"model.lambda", "0.1"},
        {"model.broadening", "-1"},
        {"model.H_e", ""},
        {"model.couplings", ""},
        {"model.rho_e", "thermal"},
        {"model.dim", "4"},
        {"model.seed", "7"},
        {"system.dim", "2"},
        {"system.Hs", "zero"},
        {"system.couplings", "[\"pauli_x\"]"},
        {"system.rho0", "maximally_mixed"},
        {"system.propagator", "davies"},
        {"system.window", "auto"},
        {"system.min_separation_factor", "5"},
        {"query.times", "[10, 12]"},
        {"query.observables", "[\"pauli_z\", \"pauli_z\"]"},
        {"query.branches", ""},
        {"query.order", "1"},
        {"numerics.rel_tol", "1e-9"},
        {"numerics.abs_tol", "1e-14"},
        {"numerics.cutoff_factor", "40"},
        {"numerics.max_depth", "18"},
        {"numerics.dt", "-1"},
        {"numerics.dt_factor", "0.02"},
        {"numerics.max_steps", "2000000"},
        {"demo.mu", "0.05"},
        {"demo.omega_min", "-0.5"},
        {"demo.omega_max", "0.5"},
        {"demo.omega_points", "21"},
        {"demo.t1", "10"},
        {"demo.dt_max", "10"},
        {"demo.dt_points", "11"},
        {"scaling.lambdas", "[0.02, 0.04, 0.08]"},
        {"scaling.times", "[2, 5]"},
        {"scaling.seed", "20240611"},
        {"fdt.omega_min", "-2"},
        {"fdt.omega_max", "2"},
        {"fdt.points", "41"},
        {"fdt.observable", ""},
        {"susceptibility.t_min", "0.5"},
        {"susceptibility.t_max", "5"},
        {"susceptibility.points", "10"},
        {"output.precision", "12"},
    };
    return s;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    std::string t = s.substr(b, e - b + 1);
    if (t.size() >= 2 && ((t.front() == '"' && t.back() == '"') || (t.front() == '\'' && t.back() == '\'')))
        t = t.substr(1, t.size() - 2);
    return t;
}

std::optional<double> to_double(const std::string& s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    const char* b = t.data();
    if (*b == '+') ++b;
    double v = 0.0;
    auto [p, ec] = std::from_chars(b, t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) return std::nullopt;
    return v;
}

[[noreturn]] void fail(const std::string& key, const std::string& msg) { throw ConfigError({key + ": " + msg}); }

// "a", "bi", "a+bi", "i", "-i"
std::optional<Complex> to_complex(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (c != ' ') s += c;
    if (s.empty()) return std::nullopt;
    if (s.back() != 'i' && s.back() != 'j') {
        auto v = to_double(s);
        return v ? std::optional<Complex>(Complex(*v, 0.0)) : std::nullopt;
    }
    s.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;)
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split = i;
            break;
        }
    std::string re = split == std::string::npos ? "0" : s.substr(0, split);
    std::string im = split == std::string::npos ? s : s.substr(split);
    if (im.empty() || im == "+") im = "1";
    if (im == "-") im = "-1";
    auto r = to_double(re), m = to_double(im);
    if (!r || !m) return std::nullopt;
    return Complex(*r, *m);
}

ComplexMatrix preset(const std::string& key, const std::string& text, int dim) {
    std::string name = text;
    double coef = 1.0;
    if (auto star = text.find('*'); star != std::string::npos) {
        auto c = to_double(text.substr(0, star));
        if (!c) fail(key, "bad coefficient in '" + text + "'");
        coef = *c;
        name = trim(text.substr(star + 1));
    }
    ComplexMatrix m(2, 2);
    if (name == "pauli_x" || name == "sx")
        m << 0, 1, 1, 0;
    else if (name == "pauli_y" || name == "sy")
        m << 0, Complex(0, -1), Complex(0, 1), 0;
    else if (name == "pauli_z" || name == "sz")
        m << 1, 0, 0, -1;
    else if (name == "sigma_plus")
        m << 0, 1, 0, 0;
    else if (name == "sigma_minus")
        m << 0, 0, 1, 0;
    else if (name == "identity")
        m = ComplexMatrix::Identity(dim > 0 ? dim : 2, dim > 0 ? dim : 2);
    else if (name == "zero")
        m = ComplexMatrix::Zero(dim > 0 ? dim : 2, dim > 0 ? dim : 2);
    else
        fail(key, "unknown matrix preset '" + name + "'");
    if (dim > 0 && m.rows() != dim)
        fail(key, "expected " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix, preset '" + name +
                      "' is 2x2");
    return coef * m;
}

ComplexMatrix matrix_from_json(const std::string& key, const json& j, int dim) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) fail(key, "matrix literal must be an array of rows");
    std::size_t rows = j.size(), cols = j[0].size();
    for (const auto& r : j)
        if (!r.is_array() || r.size() != cols) fail(key, "matrix rows have unequal lengths");
    if (dim > 0 && (rows != static_cast<std::size_t>(dim) || cols != static_cast<std::size_t>(dim)))
        fail(key, "expected " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix, got " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    if (rows != cols) fail(key, "expected a square matrix, got " + std::to_string(rows) + "x" + std::to_string(cols));
    ComplexMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& e = j[r][c];
            if (e.is_number())
                m(r, c) = e.get<double>();
            else if (e.is_string()) {
                auto z = to_complex(e.get<std::string>());
                if (!z) fail(key, "cannot read complex entry '" + e.get<std::string>() + "'");
                m(r, c) = *z;
            } else
                fail(key, "matrix entries must be numbers or complex strings like \"1-2i\"");
        }
    return m;
}

json parse_json(const std::string& key, const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(key, std::string("malformed literal: ") + e.what());
    }
}

bool looks_like_list(const json& j) {
    if (!j.is_array() || j.empty()) return false;
    for (const auto& e : j)
        if (!(e.is_string() || (e.is_array() && !e.empty() && e[0].is_array()))) return false;
    return true;
}

std::vector<ComplexMatrix> parse_matrix_list(const std::string& key, const std::string& text, int dim) {
    std::string t = trim(text);
    if (t.empty()) fail(key, "missing value");
    if (t.front() != '[') return {parse_matrix(key, t, dim)};
    json j = parse_json(key, t);
    if (!looks_like_list(j)) return {matrix_from_json(key, j, dim)};
    std::vector<ComplexMatrix> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string k = key + "[" + std::to_string(i) + "]";
        out.push_back(j[i].is_string() ? parse_matrix(k, j[i].get<std::string>(), dim) : matrix_from_json(k, j[i], dim));
    }
    return out;
}

// typed reads that collect every schema error before throwing
class Reader {
public:
    explicit Reader(const Config& c) : c_(c) {}

    enum class Sign { Any, Positive, NonNegative };

    double real(const std::string& key, Sign sign = Sign::Any) {
        auto v = to_double(c_.get(key));
        if (!v || !std::isfinite(*v)) return bad(key, "expected a finite number, got '" + c_.get(key) + "'");
        if (sign == Sign::Positive && !(*v > 0)) return bad(key, "must be positive");
        if (sign == Sign::NonNegative && !(*v >= 0)) return bad(key, "must be nonnegative");
        return *v;
    }

    long integer(const std::string& key, long min) {
        auto v = to_double(c_.get(key));
        if (!v || std::floor(*v) != *v || std::abs(*v) > 9e15)
            return static_cast<long>(bad(key, "expected an integer, got '" + c_.get(key) + "'"));
        if (*v < static_cast<double>(min)) return static_cast<long>(bad(key, "must be at least " + std::to_string(min)));
        return static_cast<long>(*v);
    }

    std::string choice(const std::string& key, const std::vector<std::string>& allowed) {
        std::string v = c_.get(key);
        if (std::find(allowed.begin(), allowed.end(), v) != allowed.end()) return v;
        std::string msg = "expected one of";
        for (const auto& a : allowed) msg += " " + a;
        bad(key, msg + ", got '" + v + "'");
        return allowed.front();
    }

    std::vector<double> reals(const std::string& key) {
        std::string t = trim(c_.get(key));
        if (!t.empty() && t.front() != '[') {
            auto v = to_double(t);
            if (!v) return bad(key, "expected a number or an array of numbers"), std::vector<double>{};
            return {*v};
        }
        try {
            auto j = json::parse(t);
            std::vector<double> out;
            if (!j.is_array() || j.empty()) throw std::invalid_argument("empty");
            for (const auto& e : j) {
                if (!e.is_number()) throw std::invalid_argument("non-number");
                out.push_back(e.get<double>());
            }
            return out;
        } catch (const std::exception&) {
            bad(key, "expected a nonempty array of numbers, got '" + t + "'");
            return {};
        }
    }

    template <class F>
    auto guarded(F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const ConfigError& e) {
            errors_.insert(errors_.end(), e.errors().begin(), e.errors().end());
            return {};
        }
    }

    double bad(const std::string& key, const std::string& msg) {
        errors_.push_back(key + ": " + msg);
        return 1.0;
    }

    bool ok() const { return errors_.empty(); }
    void check() const {
        if (!errors_.empty()) throw ConfigError(errors_);
    }
    const Config& config() const { return c_; }

private:
    const Config& c_;
    std::vector<std::string> errors_;
};

quad::QuadratureConfig quad_config(Reader& r) {
    quad::QuadratureConfig q;
    q.rel_tol = r.real("numerics.rel_tol", Reader::Sign::Positive);
    q.abs_tol = r.real("numerics.abs_tol", Reader::Sign::NonNegative);
    q.cutoff_factor = r.real("numerics.cutoff_factor", Reader::Sign::Positive);
    q.max_depth = static_cast<int>(r.integer("numerics.max_depth", 1));
    return q;
}

gen::OdeConfig ode_config(Reader& r) {
    gen::OdeConfig o;
    o.quad = quad_config(r);
    o.dt = r.real("numerics.dt");
    o.dt_factor = r.real("numerics.dt_factor", Reader::Sign::Positive);
    o.max_steps = r.integer("numerics.max_steps", 1);
    return o;
}

struct ModelSetup {
    std::string type;
    double tau = 1.0, beta = 0.0, lambda = 0.0;
    // finite variants
    ComplexMatrix H_e;
    std::vector<ComplexMatrix> env_raw;
    ComplexMatrix rho_e;
    std::optional<double> thermal_beta;
    double broadening = -1.0;
    ComplexMatrix probe;  // observable from random_thermal
};

ModelSetup model_setup(Reader& r) {
    ModelSetup m;
    m.type = r.choice("model.type", {"exponential", "finite", "random_thermal"});
    m.tau = r.real("model.tau", Reader::Sign::Positive);
    m.beta = r.real("model.beta", Reader::Sign::NonNegative);
    m.lambda = r.real("model.lambda", Reader::Sign::NonNegative);
    m.broadening = r.real("model.broadening");
    if (m.type == "exponential") {
        if (r.ok() && m.beta / m.tau >= 2.0 * M_PI) r.bad("model.beta", "beta/tau must stay below 2 pi");
    } else if (m.type == "random_thermal") {
        long dim = r.integer("model.dim", 2);
        long seed = r.integer("model.seed", 0);
        if (dim > 16) r.bad("model.dim", "must not exceed 16");
        if (!r.ok()) return m;
        auto b = experiments::random_thermal_bath(static_cast<int>(dim), m.beta, static_cast<std::uint64_t>(seed), &m.probe);
        m.H_e = b.H_e();
        m.env_raw = b.couplings();
        m.rho_e = b.rho_e().matrix();
        m.thermal_beta = m.beta;
    } else {
        const Config& c = r.config();
        if (trim(c.get("model.H_e")).empty()) {
            r.bad("model.H_e", "required for the finite model");
            return m;
        }
        m.H_e = r.guarded([&] { return parse_matrix("model.H_e", c.get("model.H_e"), -1); });
        if (!r.ok()) return m;
        if (!opalg::is_hermitian(m.H_e)) r.bad("model.H_e", "must be hermitian");
        int d = static_cast<int>(m.H_e.rows());
        if (trim(c.get("model.couplings")).empty())
            r.bad("model.couplings", "required for the finite model");
        else
            m.env_raw = r.guarded([&] { return parse_matrix_list("model.couplings", c.get("model.couplings"), d); });
        for (std::size_t a = 0; a < m.env_raw.size(); ++a)
            if (!opalg::is_hermitian(m.env_raw[a])) r.bad("model.couplings[" + std::to_string(a) + "]", "must be hermitian");
        std::string rho = trim(c.get("model.rho_e"));
        if (!r.ok()) return m;
        if (rho == "thermal") {
            m.rho_e = opalg::thermal_state(m.H_e, m.beta).matrix();
            m.thermal_beta = m.beta;
        } else {
            m.rho_e = r.guarded([&] { return parse_matrix("model.rho_e", rho, d); });
        }
    }
    return m;
}

ComplexMatrix density(Reader& r, const std::string& key, const ComplexMatrix& H, std::optional<double> beta) {
    std::string t = trim(r.config().get(key));
    int d = static_cast<int>(H.rows());
    if (t == "maximally_mixed") return ComplexMatrix::Identity(d, d) / static_cast<double>(d);
    if (t == "thermal") {
        if (!beta) return r.bad(key, "thermal state needs model.beta"), ComplexMatrix();
        return opalg::thermal_state(H, *beta).matrix();
    }
    ComplexMatrix rho = r.guarded([&] { return parse_matrix(key, t, d); });
    if (!r.ok()) return rho;
    try {
        opalg::DensityMatrix check(rho, 1e-9);
    } catch (const DomainError& e) {
        r.bad(key, e.what());
    }
    return rho;
}

struct SystemSetup {
    perturb::SystemSpec spec;
    ComplexMatrix Hs0;  // before renormalization
    std::vector<ComplexMatrix> couplings;
};

struct RunSetup {
    ModelSetup model;
    SystemSetup system;
    std::optional<bath::CorrelationModel> corr;
    oracle::MTCQuery query;
    int order = 1;
};

RunSetup full_setup(const Config& c, bool need_query) {
    Reader r(c);
    RunSetup s;
    s.model = model_setup(r);
    auto ode = ode_config(r);
    int dim = static_cast<int>(r.integer("system.dim", 1));
    r.check();

    auto& sys = s.system;
    sys.Hs0 = r.guarded([&] { return parse_matrix("system.Hs", c.get("system.Hs"), dim); });
    r.check();
    if (!opalg::is_hermitian(sys.Hs0)) r.bad("system.Hs", "must be hermitian");
    sys.couplings = r.guarded([&] { return parse_matrix_list("system.couplings", c.get("system.couplings"), dim); });
    for (std::size_t a = 0; a < sys.couplings.size(); ++a)
        if (!opalg::is_hermitian(sys.couplings[a])) r.bad("system.couplings[" + std::to_string(a) + "]", "must be hermitian");
    std::string prop = r.choice("system.propagator", {"davies", "redfield", "born"});
    std::string window = r.choice("system.window", {"auto", "infinite", "gaps"});
    double sep = r.real("system.min_separation_factor", Reader::Sign::NonNegative);
    r.check();

    ComplexMatrix Hs = sys.Hs0;
    if (s.model.type == "exponential") {
        if (sys.couplings.size() != 1) r.bad("system.couplings", "the exponential model couples a single operator");
        r.check();
        s.corr.emplace(bath::ExponentialHighT{s.model.tau, s.model.beta, s.model.lambda});
    } else {
        if (sys.couplings.size() != s.model.env_raw.size())
            r.bad("system.couplings", "expected " + std::to_string(s.model.env_raw.size()) +
                                          " operators to match the bath couplings");
        r.check();
        auto ren = gen::renormalize(sys.Hs0, sys.couplings, s.model.env_raw, s.model.rho_e, s.model.lambda);
        Hs = ren.Hs;
        try {
            s.corr.emplace(bath::FiniteBath({s.model.H_e, ren.env_couplings, s.model.rho_e, s.model.lambda, s.model.tau,
                                             s.model.thermal_beta, s.model.broadening}));
        } catch (const DomainError& e) {
            r.bad("model.rho_e", e.what());
            r.check();
        }
    }
    std::optional<double> beta = s.model.beta;
    ComplexMatrix rho0 = density(r, "system.rho0", Hs, beta);
    r.check();
    sys.spec = perturb::SystemSpec{Hs, sys.couplings, opalg::DensityMatrix(rho0, 1e-9),
                                   prop == "davies"     ? perturb::PropagatorKind::Davies
                                   : prop == "redfield" ? perturb::PropagatorKind::Redfield
                                                        : perturb::PropagatorKind::Born,
                                   window == "auto"       ? perturb::WindowPolicy::Auto
                                   : window == "infinite" ? perturb::WindowPolicy::Infinite
                                                          : perturb::WindowPolicy::InterventionGaps,
                                   ode, sep};

    if (need_query) {
        auto times = r.reals("query.times");
        for (double& t : times) t *= s.model.tau;
        auto obs = r.guarded([&] { return parse_matrix_list("query.observables", c.get("query.observables"), dim); });
        s.order = static_cast<int>(r.integer("query.order", 0));
        if (s.order > 1) r.bad("query.order", "must be 0 or 1");
        r.check();
        if (obs.size() != times.size())
            r.bad("query.observables", "expected " + std::to_string(times.size()) + " observables, one per time");
        for (std::size_t i = 0; i < times.size(); ++i)
            if (times[i] < 0 || (i && times[i] <= times[i - 1])) r.bad("query.times", "must be nonnegative and increasing");
        if (times.size() > 6) r.bad("query.times", "at most 6 times are supported");
        std::string br = trim(c.get("query.branches"));
        if (br.empty()) br.assign(times.size(), '+');
        if (br.size() != times.size() || br.find_first_not_of("+-") != std::string::npos)
            r.bad("query.branches", "expected " + std::to_string(times.size()) + " characters from '+' and '-'");
        for (std::size_t i = 0; i < obs.size(); ++i)
            if (!opalg::is_hermitian(obs[i])) r.bad("query.observables[" + std::to_string(i) + "]", "must be hermitian");
        r.check();
        s.query.times = times;
        for (const auto& o : obs) s.query.observables.push_back(opalg::spectral_decompose(o));
        for (char b : br) s.query.branches.push_back(b == '+' ? oracle::Branch::Plus : oracle::Branch::Minus);
    }
    return s;
}

std::string fmt_note(const std::string& k, double v) { return k + "=" + format_number(v, 12); }

Table demo(const Config& c) {
    Reader r(c);
    auto m = model_setup(r);
    if (r.ok() && m.type != "exponential") r.bad("model.type", "demo-thermalization needs the exponential model");
    double mu = r.real("demo.mu", Reader::Sign::NonNegative);
    double omin = r.real("demo.omega_min"), omax = r.real("demo.omega_max");
    long np = r.integer("demo.omega_points", 1);
    double t1 = r.real("demo.t1", Reader::Sign::NonNegative);
    double dt_max = r.real("demo.dt_max", Reader::Sign::Positive);
    long dtp = r.integer("demo.dt_points", 2);
    std::string prop = r.choice("system.propagator", {"davies", "redfield", "born"});
    experiments::DemoOptions opt;
    opt.quad = quad_config(r);
    r.check();
    if (omax < omin) r.bad("demo.omega_max", "must not be below demo.omega_min");
    for (double w : {omin, omax})
        if (!(std::abs(m.beta * w) < 2.0)) r.bad("demo.omega_max", "|beta omega| must stay below 2 on the grid");
    if (m.lambda * m.tau > 0.2) r.bad("model.lambda", "lambda tau must not exceed 0.2 for the demo");
    r.check();
    opt.t1 = t1;
    opt.propagator = prop == "davies" ? perturb::PropagatorKind::Davies
                     : prop == "redfield" ? perturb::PropagatorKind::Redfield
                                          : perturb::PropagatorKind::Born;
    auto rep = experiments::run_thermalization_demo(m.beta, m.lambda, mu, m.tau,
                                                    experiments::linspace(omin, omax, static_cast<std::size_t>(np)),
                                                    experiments::linspace(0.0, dt_max * m.tau, static_cast<std::size_t>(dtp)), opt);
    Table t;
    t.columns = {"omega", "wq_order0", "wq_order1", "ratio0", "ratio1", "target_exp_beta_omega"};
    for (const auto& row : rep.rows) t.rows.push_back({row.omega, row.wq0, row.wq1, row.ratio0, row.ratio1, row.target});
    t.notes = {fmt_note("beta", rep.beta), fmt_note("lambda", rep.lambda), fmt_note("mu", rep.mu),
               fmt_note("tau", rep.tau), fmt_note("bath_rate0", rep.bath_rate0), "transform=" + rep.transform_path};
    for (const auto& w : rep.warnings) t.notes.push_back("warning: " + w);
    return t;
}

Complex exact_mtc(const RunSetup& s) {
    int de = static_cast<int>(s.model.H_e.rows());
    int ds = static_cast<int>(s.system.Hs0.rows());
    ComplexMatrix Ie = ComplexMatrix::Identity(de, de);
    ComplexMatrix H = opalg::kron(s.system.Hs0, Ie) + opalg::kron(ComplexMatrix::Identity(ds, ds), s.model.H_e);
    for (std::size_t a = 0; a < s.system.couplings.size(); ++a)
        H += s.model.lambda * opalg::kron(s.system.couplings[a], s.model.env_raw[a]);
    oracle::MTCQuery q = s.query;
    for (auto& o : q.observables) o = opalg::spectral_decompose(opalg::kron(o.matrix(), Ie));
    opalg::DensityMatrix rho(opalg::kron(s.system.spec.rho0.matrix(), s.model.rho_e), 1e-9);
    return oracle::mtc_exact(q, H, rho);
}

void add_diagnostics(Table& t, const perturb::Diagnostics& d) {
    t.notes.push_back(fmt_note("lambda_tau", d.lambda_tau));
    t.notes.push_back(fmt_note("truncation_error", d.truncation_error));
    for (const auto& w : d.warnings) t.notes.push_back("warning: " + w);
}

Table mtc(const Config& c) {
    auto s = full_setup(c, true);
    auto res = perturb::mtc_perturbative(s.query, s.system.spec, *s.corr, s.order);
    Table t;
    t.columns = {"quantity", "re", "im"};
    t.rows.push_back({std::string("order0"), res.zeroth.real(), res.zeroth.imag()});
    t.rows.push_back({std::string("first_correction"), res.first_correction.real(), res.first_correction.imag()});
    t.rows.push_back({std::string("total"), res.total.real(), res.total.imag()});
    if (s.model.type != "exponential") {
        Complex e = exact_mtc(s);
        t.rows.push_back({std::string("exact"), e.real(), e.imag()});
    }
    add_diagnostics(t, res.diagnostics);
    return t;
}

Table biprob(const Config& c) {
    auto s = full_setup(c, true);
    auto tabs = perturb::perturbative_biprob(s.query.times, s.query.observables, s.system.spec, *s.corr, s.order);
    oracle::BiProbTable total = s.order == 0 ? tabs.zeroth : tabs.zeroth + tabs.correction;
    std::size_t n = total.n_times();
    Table t;
    for (std::size_t j = n; j-- > 0;) t.columns.push_back("f" + std::to_string(j + 1) + "p");
    for (std::size_t j = n; j-- > 0;) t.columns.push_back("f" + std::to_string(j + 1) + "m");
    t.columns.push_back("re");
    t.columns.push_back("im");
    const auto& sp = total.spectra();
    for (std::size_t p = 0; p < total.n_tuples(); ++p) {
        auto ip = total.unflatten(p);
        for (std::size_t q = 0; q < total.n_tuples(); ++q) {
            auto iq = total.unflatten(q);
            std::vector<Cell> row;
            for (std::size_t j = n; j-- > 0;) row.push_back(sp[j][static_cast<std::size_t>(ip[j])]);
            for (std::size_t j = n; j-- > 0;) row.push_back(sp[j][static_cast<std::size_t>(iq[j])]);
            row.push_back(total.at(p, q).real());
            row.push_back(total.at(p, q).imag());
            t.rows.push_back(std::move(row));
        }
    }
    t.notes.push_back("order=" + std::to_string(s.order));
    add_diagnostics(t, tabs.diagnostics);
    return t;
}

Table scaling(const Config& c) {
    Reader r(c);
    auto lambdas = r.reals("scaling.lambdas");
    auto times = r.reals("scaling.times");
    long seed = r.integer("scaling.seed", 0);
    auto ode = ode_config(r);
    r.check();
    auto setup = experiments::default_scaling_setup(static_cast<std::uint64_t>(seed));
    for (double& t : times) t *= setup.bath.tau();
    for (double& l : lambdas) l /= setup.bath.tau();
    auto rep = experiments::error_scaling_study(setup.bath, setup.system, lambdas, times, ode);
    Table t;
    t.columns = {"lambda", "err_order0", "err_order1"};
    for (std::size_t i = 0; i < rep.lambdas.size(); ++i) t.rows.push_back({rep.lambdas[i], rep.err0[i], rep.err1[i]});
    t.notes = {setup.description, fmt_note("exponent_order0", rep.exponent0), fmt_note("exponent_order1", rep.exponent1)};
    for (const auto& s : rep.tolerances) t.notes.push_back(s);
    for (const auto& w : rep.warnings) t.notes.push_back("warning: " + w);
    return t;
}

Table fdt(const Config& c) {
    Reader r(c);
    auto m = model_setup(r);
    double omin = r.real("fdt.omega_min"), omax = r.real("fdt.omega_max");
    long np = r.integer("fdt.points", 1);
    auto q = quad_config(r);
    r.check();
    auto grid = experiments::linspace(omin, omax, static_cast<std::size_t>(np));
    experiments::FdtReport rep;
    if (m.type == "exponential") {
        rep = experiments::fdt_verification(bath::ExponentialHighT{m.tau, m.beta, m.lambda}, grid);
    } else {
        if (!m.thermal_beta) r.bad("model.rho_e", "fdt-check needs a thermal bath state");
        r.check();
        ComplexMatrix F = m.type == "random_thermal" ? m.probe : m.env_raw.front();
        if (!trim(c.get("fdt.observable")).empty())
            F = r.guarded([&] { return parse_matrix("fdt.observable", c.get("fdt.observable"), static_cast<int>(m.H_e.rows())); });
        r.check();
        int d = static_cast<int>(m.H_e.rows());
        ComplexMatrix Fc = F - (F * m.rho_e).trace().real() * ComplexMatrix::Identity(d, d);
        bath::FiniteBath b({m.H_e, {Fc}, m.rho_e, 1.0, m.tau, m.thermal_beta, m.broadening});
        rep = experiments::fdt_verification(b, F, grid, q);
    }
    Table t;
    t.columns = {"omega", "lhs", "rhs", "abs_dev", "rel_dev"};
    for (const auto& row : rep.rows) t.rows.push_back({row.omega, row.lhs, row.rhs, row.abs_dev, row.rel_dev});
    t.notes = {"method=" + rep.method, fmt_note("beta", rep.beta), fmt_note("broadening", rep.broadening),
               fmt_note("max_rel_dev", rep.max_rel_dev)};
    return t;
}

Table susceptibility(const Config& c) {
    Reader r(c);
    double tau = r.real("model.tau", Reader::Sign::Positive);
    double beta = r.real("model.beta", Reader::Sign::NonNegative);
    double t0 = r.real("susceptibility.t_min", Reader::Sign::Positive);
    double t1 = r.real("susceptibility.t_max", Reader::Sign::Positive);
    long np = r.integer("susceptibility.points", 1);
    r.check();
    if (t1 < t0) r.bad("susceptibility.t_max", "must not be below susceptibility.t_min");
    r.check();
    auto rows = experiments::susceptibility_table(beta, tau, experiments::linspace(t0 * tau, t1 * tau, static_cast<std::size_t>(np)));
    Table t;
    t.columns = {"t", "residue_sum", "highT_limit", "numeric_ft", "abs_diff"};
    for (const auto& row : rows) t.rows.push_back({row.t, row.residue_sum, row.high_t_limit, row.numeric_ft, row.abs_diff});
    t.notes = {fmt_note("beta", beta), fmt_note("tau", tau)};
    return t;
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : "; ") + e;
    return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors) : DomainError(join(errors)), errors_(std::move(errors)) {}

Config::Config() {
    for (const auto& [k, v] : schema()) values_[k] = v;
}

const std::vector<std::string>& Config::schema_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& p : schema()) k.push_back(p.first);
        std::sort(k.begin(), k.end());
        return k;
    }();
    return keys;
}

Config Config::from_string(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::ini_parser::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError({"config line " + std::to_string(e.line()) + ": " + e.message()});
    }
    Config c;
    std::vector<std::string> errors;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            errors.push_back(section + ": key outside of any section");
            continue;
        }
        for (const auto& [key, value] : body) {
            std::string dotted = section + "." + key;
            if (!c.values_.count(dotted))
                errors.push_back(dotted + ": unknown key");
            else
                c.values_[dotted] = trim(value.data());
        }
    }
    if (!errors.empty()) throw ConfigError(errors);
    return c;
}

Config Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

void Config::set(const std::string& dotted_key, const std::string& value) {
    if (!values_.count(dotted_key)) throw ConfigError({dotted_key + ": unknown key"});
    values_[dotted_key] = trim(value);
}

const std::string& Config::get(const std::string& dotted_key) const {
    auto it = values_.find(dotted_key);
    if (it == values_.end()) throw ConfigError({dotted_key + ": unknown key"});
    return it->second;
}

std::string Config::canonical() const {
    std::string s;
    for (const auto& [k, v] : values_) s += k + " = " + v + "\n";
    return s;
}

std::uint64_t Config::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string Config::hash_hex() const {
    char buf[17];
    auto h = hash();
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[h & 0xf];
        h >>= 4;
    }
    buf[16] = 0;
    return buf;
}

ComplexMatrix parse_matrix(const std::string& key, const std::string& text, int expected_dim) {
    std::string t = trim(text);
    if (t.empty()) fail(key, "missing value");
    if (t.front() == '[') return matrix_from_json(key, parse_json(key, t), expected_dim);
    return preset(key, t, expected_dim);
}

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"demo-thermalization", "mtc", "biprob", "scaling", "fdt-check",
                                               "susceptibility"};
    return c;
}

Table run(const Config& cfg, const std::string& command) {
    Reader r(cfg);
    int precision = static_cast<int>(r.integer("output.precision", 1));
    if (r.ok() && precision > 17) r.bad("output.precision", "must not exceed 17");
    r.check();
    Table t;
    if (command == "demo-thermalization")
        t = demo(cfg);
    else if (command == "mtc")
        t = mtc(cfg);
    else if (command == "biprob")
        t = biprob(cfg);
    else if (command == "scaling")
        t = scaling(cfg);
    else if (command == "fdt-check")
        t = fdt(cfg);
    else if (command == "susceptibility")
        t = susceptibility(cfg);
    else
        throw DomainError("unknown command '" + command + "'");
    t.command = command;
    t.config_hash = cfg.hash_hex();
    t.precision = precision;
    return t;
}

std::string format_number(double v, int precision) {
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, precision);
    return std::string(buf, res.ptr);
}

void write_csv(const Table& t, std::ostream& os) {
    os << "# qmtc " << version() << " config_hash=" << t.config_hash << "\n";
    for (const auto& n : t.notes) os << "# " << n << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ",";
            if (const auto* d = std::get_if<double>(&row[i]))
                os << format_number(*d, t.precision);
            else
                os << std::get<std::string>(row[i]);
        }
        os << "\n";
    }
}

const char* version() { return QMTC_VERSION; }

}  // namespace qmtc::app
