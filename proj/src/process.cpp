#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/prctl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <string>
#include <vector>

#include "dceval/toolchain.hpp"

extern char** environ;

namespace dceval::toolchain {

namespace {

// Orphaned grandchildren are re-parented to this process so they can be
// reaped once their group is killed.
void become_subreaper() {
  static std::once_flag once;
  std::call_once(once, [] {
    prctl(PR_SET_CHILD_SUBREAPER, 1, 0, 0, 0);
    signal(SIGPIPE, SIG_IGN);
  });
}

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (pipe2(fd, O_CLOEXEC) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fd[0] >= 0) close(fd[0]);
    fd[0] = -1;
  }
  void close_write() {
    if (fd[1] >= 0) close(fd[1]);
    fd[1] = -1;
  }
};

void kill_group(int pgid) {
  if (pgid > 0) kill(-pgid, SIGKILL);
}

// Reaps every already-dead member of the group, including re-parented ones.
void reap_group(int pgid) {
  for (;;) {
    int status = 0;
    pid_t r = waitpid(-pgid, &status, WNOHANG);
    if (r <= 0) break;
  }
}

bool group_alive(int pgid) {
  if (kill(-pgid, 0) == 0) return true;
  return errno != ESRCH;
}

void append_capped(std::string& dst, const char* data, std::size_t n, std::size_t limit, bool& truncated) {
  if (dst.size() >= limit) {
    truncated = truncated || n > 0;
    return;
  }
  std::size_t room = limit - dst.size();
  if (n > room) {
    dst.append(data, room);
    truncated = true;
  } else {
    dst.append(data, n);
  }
}

}  // namespace

ProcessResult run_process(const ProcessRequest& request) {
  ProcessResult result;
  if (request.argv.empty()) {
    result.status = ToolStatus::SpawnFailure;
    result.spawn_error = "empty command";
    return result;
  }
  become_subreaper();

  std::vector<std::string> env_strings;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    auto eq = entry.find('=');
    if (eq != std::string::npos && request.environment.count(entry.substr(0, eq))) continue;
    env_strings.push_back(std::move(entry));
  }
  for (const auto& [k, v] : request.environment) env_strings.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::vector<std::string> args = request.argv;
  std::vector<char*> argv;
  for (auto& s : args) argv.push_back(s.data());
  argv.push_back(nullptr);
  std::string workdir = request.workdir.empty() ? std::string() : request.workdir.string();

  Pipe out, err, status;
  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    result.status = ToolStatus::SpawnFailure;
    result.spawn_error = std::string("fork: ") + std::strerror(errno);
    return result;
  }
  if (pid == 0) {
    setpgid(0, 0);
    signal(SIGPIPE, SIG_DFL);
    int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0) dup2(devnull, 0);
    dup2(out.fd[1], 1);
    dup2(err.fd[1], 2);
    int code = 0;
    if (!workdir.empty() && chdir(workdir.c_str()) != 0) {
      code = errno;
    } else {
      environ = envp.data();
      execvp(argv[0], argv.data());
      code = errno;
    }
    ssize_t ignored = write(status.fd[1], &code, sizeof code);
    (void)ignored;
    _exit(127);
  }
  setpgid(pid, pid);
  result.process_group = pid;
  out.close_write();
  err.close_write();
  status.close_write();

  int spawn_errno = 0;
  ssize_t got = read(status.fd[0], &spawn_errno, sizeof spawn_errno);
  if (got == static_cast<ssize_t>(sizeof spawn_errno)) {
    int st = 0;
    waitpid(pid, &st, 0);
    kill_group(pid);
    reap_group(pid);
    result.status = ToolStatus::SpawnFailure;
    result.spawn_error = std::string(argv[0]) + ": " + std::strerror(spawn_errno);
    result.wall_time = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start);
    return result;
  }

  const bool has_deadline = request.timeout.count() > 0;
  auto deadline = start + request.timeout;
  bool exited = false, timed_out = false;
  int wait_status = 0;
  char buf[65536];
  std::vector<pollfd> fds{{out.fd[0], POLLIN, 0}, {err.fd[0], POLLIN, 0}};
  auto drain = [&](int timeout_ms) {
    int open_fds = 0;
    for (auto& p : fds) open_fds += p.fd >= 0;
    if (open_fds == 0) return false;
    int r = poll(fds.data(), fds.size(), timeout_ms);
    if (r <= 0) return r == 0;
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      ssize_t n = read(fds[i].fd, buf, sizeof buf);
      if (n <= 0) {
        fds[i].fd = -1;
        continue;
      }
      if (i == 0) append_capped(result.stdout_text, buf, static_cast<std::size_t>(n), request.capture_limit,
                                result.stdout_truncated);
      else append_capped(result.stderr_text, buf, static_cast<std::size_t>(n), request.capture_limit,
                         result.stderr_truncated);
    }
    return true;
  };

  while (!exited) {
    int wait_ms = 50;
    if (has_deadline) {
      auto left = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now()).count();
      if (left <= 0) {
        timed_out = true;
        break;
      }
      wait_ms = static_cast<int>(std::min<long long>(left, 50));
    }
    bool any_open = drain(wait_ms);
    pid_t r = waitpid(pid, &wait_status, WNOHANG);
    if (r == pid) exited = true;
    if (!any_open && !exited) usleep(static_cast<useconds_t>(wait_ms) * 1000);
  }

  kill_group(pid);
  if (!exited) waitpid(pid, &wait_status, 0);
  // Grandchildren may hold the pipes open for a moment after the kill.
  auto drain_until = std::chrono::steady_clock::now() + std::chrono::seconds(2);
  while (std::chrono::steady_clock::now() < drain_until && drain(20)) {
  }
  for (int tries = 0; tries < 200 && group_alive(pid); ++tries) {
    reap_group(pid);
    if (!group_alive(pid)) break;
    usleep(5000);
  }
  reap_group(pid);

  result.wall_time = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start);
  if (timed_out) {
    result.status = ToolStatus::Timeout;
    result.exit_code = -SIGKILL;
  } else if (WIFEXITED(wait_status)) {
    result.exit_code = WEXITSTATUS(wait_status);
    result.status = result.exit_code == 0 ? ToolStatus::Ok : ToolStatus::NonZeroExit;
  } else {
    result.exit_code = WIFSIGNALED(wait_status) ? -WTERMSIG(wait_status) : -1;
    result.status = ToolStatus::NonZeroExit;
  }
  return result;
}

}  // namespace dceval::toolchain
