// SPDX-License-Identifier: Apache-2.0
#include "subprocess.hpp"

#include "tulip/error.hpp"

#include <fmt/format.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace tulip::detail {

namespace {

class Pipe {
public:
    Pipe()
    {
        if (::pipe2(fds_, O_CLOEXEC) != 0)
            throw Error(Errc::NotExecutable, fmt::format("pipe: {}", std::strerror(errno)));
    }
    ~Pipe()
    {
        close_read();
        close_write();
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;

    int read_end() const { return fds_[0]; }
    int write_end() const { return fds_[1]; }
    void close_read() { close_fd(fds_[0]); }
    void close_write() { close_fd(fds_[1]); }

private:
    static void close_fd(int& fd)
    {
        if (fd >= 0) {
            ::close(fd);
            fd = -1;
        }
    }
    int fds_[2] = {-1, -1};
};

void ignore_sigpipe_once()
{
    static std::once_flag flag;
    std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });
}

} // namespace

ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input,
                          std::chrono::milliseconds timeout)
{
    if (argv.empty())
        throw Error(Errc::NotExecutable, "empty command line");
    ignore_sigpipe_once();

    Pipe in, out, err;
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in.read_end(), STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out.write_end(), STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err.write_end(), STDERR_FILENO);

    std::vector<char*> cargv;
    for (const auto& a : argv)
        cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);

    pid_t pid = 0;
    int rc = ::posix_spawnp(&pid, cargv[0], &actions, nullptr, cargv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0)
        throw Error(Errc::NotExecutable, fmt::format("cannot start `{}`: {}", argv[0], std::strerror(rc)));

    in.close_read();
    out.close_write();
    err.close_write();
    ::fcntl(in.write_end(), F_SETFL, O_NONBLOCK);

    ProcessResult result;
    size_t written = 0;
    if (input.empty())
        in.close_write();

    const auto deadline = std::chrono::steady_clock::now() + timeout;
    bool out_open = true, err_open = true;
    char buffer[4096];
    while (out_open || err_open) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            result.timed_out = true;
            break;
        }
        pollfd fds[3];
        nfds_t n = 0;
        int out_slot = -1, err_slot = -1, in_slot = -1;
        if (out_open) {
            out_slot = static_cast<int>(n);
            fds[n++] = {out.read_end(), POLLIN, 0};
        }
        if (err_open) {
            err_slot = static_cast<int>(n);
            fds[n++] = {err.read_end(), POLLIN, 0};
        }
        if (in.write_end() >= 0) {
            in_slot = static_cast<int>(n);
            fds[n++] = {in.write_end(), POLLOUT, 0};
        }
        int ready = ::poll(fds, n, static_cast<int>(remaining.count()));
        if (ready < 0) {
            if (errno == EINTR)
                continue;
            break;
        }
        if (in_slot >= 0 && fds[in_slot].revents) {
            auto w = ::write(in.write_end(), input.data() + written, input.size() - written);
            if (w > 0)
                written += static_cast<size_t>(w);
            if (w < 0 && errno != EAGAIN)
                written = input.size();
            if (written >= input.size())
                in.close_write();
        }
        auto drain = [&](int slot, int fd, std::string& sink, bool& open) {
            if (slot < 0 || !fds[slot].revents)
                return;
            auto r = ::read(fd, buffer, sizeof buffer);
            if (r > 0)
                sink.append(buffer, static_cast<size_t>(r));
            else if (r == 0 || (errno != EAGAIN && errno != EINTR))
                open = false;
        };
        drain(out_slot, out.read_end(), result.out, out_open);
        drain(err_slot, err.read_end(), result.err, err_open);
    }

    int status = 0;
    if (result.timed_out) {
        ::kill(pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        return result;
    }
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = 128 + WTERMSIG(status);
    return result;
}

} // namespace tulip::detail
