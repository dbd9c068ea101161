#include "testgen/subprocess.hpp"

#include "testgen/errors.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace testgen {

namespace {

void close_quiet(int fd) {
  if (fd >= 0) ::close(fd);
}

}  // namespace

ProcessResult run_shell(const std::string& command, const std::string& cwd,
                        std::chrono::seconds timeout) {
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0) {
    throw EnvironmentError(std::string("pipe failed: ") + std::strerror(errno));
  }

  pid_t pid = ::fork();
  if (pid < 0) {
    throw EnvironmentError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);  // own process group so the whole tree can be killed
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    close_quiet(out_pipe[0]);
    close_quiet(out_pipe[1]);
    close_quiet(err_pipe[0]);
    close_quiet(err_pipe[1]);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
      ::_exit(126);
    }
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }

  close_quiet(out_pipe[1]);
  close_quiet(err_pipe[1]);
  ::fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
  ::fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

  ProcessResult result;
  auto deadline = std::chrono::steady_clock::now() + timeout;
  bool out_open = true;
  bool err_open = true;
  char buf[4096];

  while (out_open || err_open) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      break;
    }

    struct pollfd fds[2];
    nfds_t nfds = 0;
    if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
    if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};
    int rc = ::poll(fds, nfds, static_cast<int>(std::min<long long>(remaining.count(), 1000)));
    if (rc < 0 && errno != EINTR) break;

    auto drain = [&](int fd, bool& open_flag, std::string& sink) {
      for (;;) {
        ssize_t n = ::read(fd, buf, sizeof buf);
        if (n > 0) {
          sink.append(buf, static_cast<std::size_t>(n));
          continue;
        }
        if (n == 0) {
          open_flag = false;
        }
        return;  // EAGAIN or EOF
      }
    };
    if (out_open) drain(out_pipe[0], out_open, result.stdout_text);
    if (err_open) drain(err_pipe[0], err_open, result.stderr_text);
  }

  // Final drain after exit/kill.
  for (;;) {
    ssize_t n = ::read(out_pipe[0], buf, sizeof buf);
    if (n <= 0) break;
    result.stdout_text.append(buf, static_cast<std::size_t>(n));
  }
  for (;;) {
    ssize_t n = ::read(err_pipe[0], buf, sizeof buf);
    if (n <= 0) break;
    result.stderr_text.append(buf, static_cast<std::size_t>(n));
  }
  close_quiet(out_pipe[0]);
  close_quiet(err_pipe[0]);

  int status = 0;
  ::waitpid(pid, &status, 0);
  if (result.timed_out) {
    result.exit_code = -SIGKILL;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = -WTERMSIG(status);
  }
  return result;
}

}  // namespace testgen
