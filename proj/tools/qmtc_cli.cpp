// qmtc command-line front end over the C interface
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmtc/qmtc.h"

namespace {

int exit_code(qmtc_status s) {
    switch (s) {
        case QMTC_OK: return 0;
        case QMTC_ERR_VALIDATION:
        case QMTC_ERR_IO:
        case QMTC_ERR_ARGUMENT: return 2;
        default: return 1;
    }
}

int report(qmtc_status s, const char* what) {
    std::fprintf(stderr, "qmtc: %s: %s\n", what, qmtc_last_error());
    return exit_code(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-time correlations of open quantum systems"};
    app.set_version_flag("--version", std::string(qmtc_version()));
    std::string command, config_path, out_dir;
    std::vector<std::string> overrides;
    app.add_option("command", command, "demo-thermalization | mtc | biprob | scaling | fdt-check | susceptibility")
        ->required()
        ->check(CLI::IsMember({"demo-thermalization", "mtc", "biprob", "scaling", "fdt-check", "susceptibility"}));
    app.add_option("--config,-c", config_path, "INI config file")->required();
    app.add_option("--set", overrides, "override a key, e.g. --set model.tau=2");
    app.add_option("--out,-o", out_dir, "directory for <command>.csv (stdout when omitted)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    qmtc_config* cfg = nullptr;
    if (auto s = qmtc_config_load(config_path.c_str(), &cfg); s != QMTC_OK) return report(s, "config");
    for (const auto& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "qmtc: --set expects key=value, got '%s'\n", kv.c_str());
            qmtc_config_free(cfg);
            return 2;
        }
        auto s = qmtc_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
        if (s != QMTC_OK) {
            qmtc_config_free(cfg);
            return report(s, "--set");
        }
    }

    qmtc_table* table = nullptr;
    auto s = qmtc_run(cfg, command.c_str(), &table);
    qmtc_config_free(cfg);
    if (s != QMTC_OK) return report(s, command.c_str());

    for (std::size_t i = 0; i < qmtc_table_note_count(table); ++i) {
        std::string note = qmtc_table_note(table, i);
        if (note.rfind("warning:", 0) == 0) std::fprintf(stderr, "qmtc: %s\n", note.c_str());
    }
    std::string target = "-";
    if (!out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        target = (std::filesystem::path(out_dir) / (command + ".csv")).string();
    }
    s = qmtc_table_write_csv(table, target.c_str());
    qmtc_table_free(table);
    if (s != QMTC_OK) return report(s, "output");
    return 0;
}
