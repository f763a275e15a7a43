#pragma once

// Helper to run the command-line binary (path from KAHANIA_CLI_BIN) and
// capture its output and exit status.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace cliutil {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr interleaved
};

inline std::string cli_path() {
    const char* p = std::getenv("KAHANIA_CLI_BIN");
    if (!p) throw std::runtime_error("KAHANIA_CLI_BIN is not set");
    return p;
}

inline RunResult run_cli(const std::string& args) {
    std::string cmd = "'" + cli_path() + "' " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    RunResult r;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::string line_value(const std::string& out, const std::string& key) {
    // find a line "key = value" and return value
    std::string needle = key + " = ";
    std::size_t pos = out.find(needle);
    if (pos == std::string::npos) return "";
    std::size_t end = out.find('\n', pos);
    return out.substr(pos + needle.size(), end - pos - needle.size());
}

}  // namespace cliutil
