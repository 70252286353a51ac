// capi.cpp - extern "C" wrappers; no exception crosses this boundary
#include "qmtc/qmtc.h"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "qmtc/app.hpp"
#include "qmtc/bath.hpp"
#include "qmtc/perturb.hpp"

struct qmtc_config {
    qmtc::app::Config cfg;
    std::string scratch;
};

struct qmtc_table {
    qmtc::app::Table table;
    std::vector<std::vector<std::string>> text;
};

namespace {

thread_local std::string last_error;

qmtc_status fail(qmtc_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

template <class F>
qmtc_status guard(F&& f) {
    try {
        last_error.clear();
        return f();
    } catch (const qmtc::app::IoError& e) {
        return fail(QMTC_ERR_IO, e.what());
    } catch (const qmtc::DomainError& e) {
        return fail(QMTC_ERR_VALIDATION, e.what());
    } catch (const qmtc::NumericError& e) {
        return fail(QMTC_ERR_NUMERIC, e.what());
    } catch (const std::bad_alloc&) {
        return fail(QMTC_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(QMTC_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(QMTC_ERR_INTERNAL, "unknown error");
    }
}

bool in_range(const qmtc_table* t, size_t row, size_t col) {
    return t && row < t->table.rows.size() && col < t->table.rows[row].size();
}

}  // namespace

extern "C" {

const char* qmtc_version(void) { return qmtc::app::version(); }

const char* qmtc_last_error(void) { return last_error.c_str(); }

qmtc_status qmtc_config_new(qmtc_config** out) {
    if (!out) return fail(QMTC_ERR_ARGUMENT, "null output pointer");
    return guard([&] {
        *out = new qmtc_config{};
        return QMTC_OK;
    });
}

qmtc_status qmtc_config_load(const char* path, qmtc_config** out) {
    if (!path || !out) return fail(QMTC_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guard([&] {
        *out = new qmtc_config{qmtc::app::Config::load_file(path), {}};
        return QMTC_OK;
    });
}

qmtc_status qmtc_config_from_string(const char* text, qmtc_config** out) {
    if (!text || !out) return fail(QMTC_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guard([&] {
        *out = new qmtc_config{qmtc::app::Config::from_string(text), {}};
        return QMTC_OK;
    });
}

qmtc_status qmtc_config_set(qmtc_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return fail(QMTC_ERR_ARGUMENT, "null argument");
    return guard([&] {
        cfg->cfg.set(key, value);
        return QMTC_OK;
    });
}

const char* qmtc_config_get(const qmtc_config* cfg, const char* key) {
    if (!cfg || !key) return nullptr;
    auto it = cfg->cfg.resolved().find(key);
    if (it == cfg->cfg.resolved().end()) {
        last_error = std::string(key) + ": unknown key";
        return nullptr;
    }
    const_cast<qmtc_config*>(cfg)->scratch = it->second;
    return cfg->scratch.c_str();
}

qmtc_status qmtc_config_hash(const qmtc_config* cfg, char* buf, size_t len) {
    if (!cfg || !buf) return fail(QMTC_ERR_ARGUMENT, "null argument");
    if (len < 17) return fail(QMTC_ERR_ARGUMENT, "hash buffer needs 17 bytes");
    std::string h = cfg->cfg.hash_hex();
    std::snprintf(buf, len, "%s", h.c_str());
    return QMTC_OK;
}

void qmtc_config_free(qmtc_config* cfg) { delete cfg; }

qmtc_status qmtc_run(const qmtc_config* cfg, const char* command, qmtc_table** out) {
    if (!cfg || !command || !out) return fail(QMTC_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guard([&] {
        auto t = std::make_unique<qmtc_table>();
        t->table = qmtc::app::run(cfg->cfg, command);
        for (const auto& row : t->table.rows) {
            std::vector<std::string> cells;
            for (const auto& c : row)
                cells.push_back(std::holds_alternative<double>(c)
                                    ? qmtc::app::format_number(std::get<double>(c), t->table.precision)
                                    : std::get<std::string>(c));
            t->text.push_back(std::move(cells));
        }
        *out = t.release();
        return QMTC_OK;
    });
}

size_t qmtc_table_rows(const qmtc_table* t) { return t ? t->table.rows.size() : 0; }

size_t qmtc_table_cols(const qmtc_table* t) { return t ? t->table.columns.size() : 0; }

const char* qmtc_table_column(const qmtc_table* t, size_t col) {
    if (!t || col >= t->table.columns.size()) return nullptr;
    return t->table.columns[col].c_str();
}

qmtc_status qmtc_table_value(const qmtc_table* t, size_t row, size_t col, double* out) {
    if (!out || !in_range(t, row, col)) return fail(QMTC_ERR_ARGUMENT, "cell index out of range");
    const auto* d = std::get_if<double>(&t->table.rows[row][col]);
    if (!d) return fail(QMTC_ERR_ARGUMENT, "cell holds text");
    *out = *d;
    return QMTC_OK;
}

const char* qmtc_table_text(const qmtc_table* t, size_t row, size_t col) {
    if (!in_range(t, row, col)) return nullptr;
    return t->text[row][col].c_str();
}

size_t qmtc_table_note_count(const qmtc_table* t) { return t ? t->table.notes.size() : 0; }

const char* qmtc_table_note(const qmtc_table* t, size_t i) {
    if (!t || i >= t->table.notes.size()) return nullptr;
    return t->table.notes[i].c_str();
}

qmtc_status qmtc_table_write_csv(const qmtc_table* t, const char* path) {
    if (!t) return fail(QMTC_ERR_ARGUMENT, "null table");
    return guard([&] {
        if (!path || std::string(path) == "-") {
            qmtc::app::write_csv(t->table, std::cout);
            std::cout.flush();
            return QMTC_OK;
        }
        std::ofstream os(path, std::ios::binary);
        if (!os) return fail(QMTC_ERR_IO, std::string("cannot open '") + path + "' for writing");
        qmtc::app::write_csv(t->table, os);
        if (!os) return fail(QMTC_ERR_IO, std::string("write failed for '") + path + "'");
        return QMTC_OK;
    });
}

void qmtc_table_free(qmtc_table* t) { delete t; }

qmtc_status qmtc_susceptibility_residue(double t, double beta, double tau, double* out) {
    if (!out) return fail(QMTC_ERR_ARGUMENT, "null output pointer");
    return guard([&] {
        *out = qmtc::bath::susceptibility_residue(t, beta, tau);
        return QMTC_OK;
    });
}

qmtc_status qmtc_exponential_cross_coefficients(double tau, double beta, double lambda, double omega,
                                                double omega_prime, double C[2], double K[2]) {
    if (!C || !K) return fail(QMTC_ERR_ARGUMENT, "null output pointer");
    return guard([&] {
        if (!(tau > 0) || !(beta >= 0) || !(lambda >= 0)) throw qmtc::DomainError("need tau > 0, beta >= 0, lambda >= 0");
        qmtc::bath::CorrelationModel m(qmtc::bath::ExponentialHighT{tau, beta, lambda});
        auto cc = qmtc::perturb::cross_coefficients(m, omega, omega_prime);
        C[0] = cc.C(0, 0).real();
        C[1] = cc.C(0, 0).imag();
        K[0] = cc.K(0, 0).real();
        K[1] = cc.K(0, 0).imag();
        return QMTC_OK;
    });
}

}  // extern "C"
