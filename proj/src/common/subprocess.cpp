#include "lpsr/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <random>

#include "lpsr/errors.hpp"

namespace lpsr {
namespace {

void close_fd(int& fd) {
    if (fd >= 0) {
        ::close(fd);
        fd = -1;
    }
}

}  // namespace

ProcessResult run_shell(const std::string& command, std::chrono::milliseconds timeout) {
    int out_pipe[2];
    int err_pipe[2];
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) throw AdapterFailure("pipe: " + std::string(std::strerror(errno)), "", -1);
    if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        throw AdapterFailure("pipe: " + std::string(std::strerror(errno)), "", -1);
    }

    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) ::close(fd);
        throw AdapterFailure("fork: " + std::string(std::strerror(errno)), "", -1);
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::dup2(err_pipe[1], STDERR_FILENO);
        const int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);

    ProcessResult result;
    std::array<int, 2> fds = {out_pipe[0], err_pipe[0]};
    std::array<std::string*, 2> sinks = {&result.out, &result.err};
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    char buf[4096];
    while (fds[0] >= 0 || fds[1] >= 0) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            result.timed_out = true;
            break;
        }
        std::array<pollfd, 2> pfd{};
        nfds_t n = 0;
        std::array<int, 2> slot{};
        for (int i = 0; i < 2; ++i) {
            if (fds[i] >= 0) {
                pfd[n] = {fds[i], POLLIN, 0};
                slot[n++] = i;
            }
        }
        const int rc = ::poll(pfd.data(), n, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (rc < 0 && errno != EINTR) break;
        for (nfds_t k = 0; k < n && rc > 0; ++k) {
            if (!(pfd[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            const int i = slot[k];
            const ssize_t got = ::read(fds[i], buf, sizeof buf);
            if (got > 0) {
                sinks[i]->append(buf, static_cast<std::size_t>(got));
            } else if (got == 0 || errno != EINTR) {
                close_fd(fds[i]);
            }
        }
    }
    if (result.timed_out) ::kill(-pid, SIGKILL);
    close_fd(fds[0]);
    close_fd(fds[1]);

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('\'');
    return out;
}

std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& values) {
    std::string out = tmpl;
    for (const auto& [key, value] : values) {
        const std::string needle = "{" + key + "}";
        const std::string quoted = shell_quote(value);
        for (auto pos = out.find(needle); pos != std::string::npos; pos = out.find(needle, pos + quoted.size())) {
            out.replace(pos, needle.size(), quoted);
        }
    }
    return out;
}

TempDir::TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "lpsr-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
        throw IoError("cannot create temporary directory: " + std::string(std::strerror(errno)));
    }
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace lpsr
