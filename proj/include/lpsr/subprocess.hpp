#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>

namespace lpsr {

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
    bool timed_out = false;
};

/// Runs `command` through /bin/sh -c, capturing stdout and stderr. The child is
/// killed when `timeout` elapses. Throws AdapterFailure if the process cannot be spawned.
ProcessResult run_shell(const std::string& command, std::chrono::milliseconds timeout);

/// Single-quotes `s` for /bin/sh.
std::string shell_quote(const std::string& s);

/// Replaces every "{key}" in `tmpl` with the shell-quoted value.
std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& values);

/// Private directory removed (recursively) on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace lpsr
