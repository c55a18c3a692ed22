#pragma once

// Minimal POSIX subprocess runner with a wall-clock timeout. The child runs
// under /bin/sh in its own process group so a timeout can kill the whole
// tree; stdout and stderr are captured combined, as planners interleave
// diagnostics across both.

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <string>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "pddlkit/errors.hpp"

namespace pddlkit::planning {

struct CommandResult {
    std::string output;  // stdout + stderr, interleaved
    int exit_code = -1;  // -1 when killed or timed out
    bool timed_out = false;
};

inline CommandResult run_command(const std::string& command, double timeout_seconds) {
    int pipe_fds[2];
    if (pipe(pipe_fds) != 0) throw IoError("pipe failed: " + std::string(std::strerror(errno)));

    pid_t pid = fork();
    if (pid < 0) {
        close(pipe_fds[0]);
        close(pipe_fds[1]);
        throw IoError("fork failed: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        setpgid(0, 0);
        dup2(pipe_fds[1], STDOUT_FILENO);
        dup2(pipe_fds[1], STDERR_FILENO);
        close(pipe_fds[0]);
        close(pipe_fds[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    close(pipe_fds[1]);
    CommandResult result;
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration<double>(timeout_seconds);
    char buffer[4096];
    bool open = true;
    while (open) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            result.timed_out = true;
            kill(-pid, SIGKILL);  // group, if setpgid won the race
            kill(pid, SIGKILL);   // the child itself, if not
            break;
        }
        struct pollfd pfd {pipe_fds[0], POLLIN, 0};
        int ready = poll(&pfd, 1, static_cast<int>(remaining.count()) + 1);
        if (ready < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (ready == 0) continue;  // re-check deadline
        ssize_t n = read(pipe_fds[0], buffer, sizeof(buffer));
        if (n > 0)
            result.output.append(buffer, static_cast<std::size_t>(n));
        else
            open = false;
    }
    // drain whatever arrived before a kill
    if (result.timed_out) {
        ssize_t n;
        while ((n = read(pipe_fds[0], buffer, sizeof(buffer))) > 0)
            result.output.append(buffer, static_cast<std::size_t>(n));
    }
    close(pipe_fds[0]);

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (!result.timed_out && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    return result;
}

} // namespace pddlkit::planning
