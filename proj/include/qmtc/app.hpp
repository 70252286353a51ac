#pragma once
// app.hpp - run configuration, command dispatch and CSV emission

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qmtc/errors.hpp"
#include "qmtc/opalg.hpp"

namespace qmtc::app {

// schema violations; every message names the offending dotted key
class ConfigError : public DomainError {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat section.key -> text map over a fixed schema. Keys that are not set keep
// their documented defaults, so the resolved view is always complete.
class Config {
public:
    Config();
    static Config load_file(const std::string& path);
    static Config from_string(const std::string& ini_text);

    void set(const std::string& dotted_key, const std::string& value);
    const std::string& get(const std::string& dotted_key) const;
    const std::map<std::string, std::string>& resolved() const { return values_; }

    std::string canonical() const;  // one "key = value" line per schema key, sorted
    std::uint64_t hash() const;     // FNV-1a over canonical()
    std::string hash_hex() const;

    static const std::vector<std::string>& schema_keys();

private:
    std::map<std::string, std::string> values_;
};

// parse "1.5", "pauli_x", "0.5*pauli_z", JSON literals; throws ConfigError naming key
opalg::ComplexMatrix parse_matrix(const std::string& key, const std::string& text, int expected_dim);

using Cell = std::variant<double, std::string>;

struct Table {
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> notes;  // emitted as comment lines below the version header
    std::string config_hash;
    int precision = 12;
};

const std::vector<std::string>& commands();

// validates the config for the command and runs it
Table run(const Config& cfg, const std::string& command);

// header comment, notes, column header, rows; '.' decimal separator independent of locale
void write_csv(const Table& t, std::ostream& os);
std::string format_number(double v, int precision);

const char* version();

}  // namespace qmtc::app
