// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <fcntl.h>
#include <linux/landlock.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/prctl.h>
#include <sys/resource.h>
#include <sys/syscall.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/fs.hpp"

namespace datascout::synthgen {

struct SandboxResult {
  int exit_status = -1;  // exit code, or 128 + signal
  std::string stdout_text;
  std::string stderr_text;
  std::optional<std::filesystem::path> produced_file;
  double wall_time_seconds = 0.0;
  bool timed_out = false;
  bool network_isolated = false;
  bool writes_confined = false;

  bool succeeded() const { return exit_status == 0 && !timed_out && produced_file.has_value(); }
};

/// Runs a script inside `scratch_dir` and reports on `expected_output`, a
/// file name relative to that directory.
class Sandbox {
 public:
  virtual ~Sandbox() = default;
  virtual SandboxResult run(const std::string& script, const std::filesystem::path& scratch_dir,
                            const std::string& expected_output) = 0;
};

struct ProcessSandboxConfig {
  std::string runtime = "python3";
  std::string script_name = "script.py";
  std::chrono::seconds timeout{60};
  rlim_t max_file_bytes = 256ull << 20;
  std::string path_env = "/usr/local/bin:/usr/bin:/bin";
};

namespace detail {

inline constexpr unsigned char kNetIsolated = 1;
inline constexpr unsigned char kWritesConfined = 2;

// Kernel ABI values; older uapi headers lack them.
inline constexpr __u64 kAccessRefer = 1ULL << 13;
inline constexpr __u64 kAccessTruncate = 1ULL << 14;

/// Restricts filesystem writes to `dir` (and /dev/null). Async-signal-safe.
inline bool confine_writes(const char* dir) {
#ifdef SYS_landlock_create_ruleset
  const long abi = syscall(SYS_landlock_create_ruleset, nullptr, 0, LANDLOCK_CREATE_RULESET_VERSION);
  if (abi < 1) return false;
  __u64 write_access = LANDLOCK_ACCESS_FS_WRITE_FILE | LANDLOCK_ACCESS_FS_REMOVE_DIR | LANDLOCK_ACCESS_FS_REMOVE_FILE |
                       LANDLOCK_ACCESS_FS_MAKE_CHAR | LANDLOCK_ACCESS_FS_MAKE_DIR | LANDLOCK_ACCESS_FS_MAKE_REG |
                       LANDLOCK_ACCESS_FS_MAKE_SOCK | LANDLOCK_ACCESS_FS_MAKE_FIFO | LANDLOCK_ACCESS_FS_MAKE_BLOCK |
                       LANDLOCK_ACCESS_FS_MAKE_SYM;
  if (abi >= 2) write_access |= kAccessRefer;
  if (abi >= 3) write_access |= kAccessTruncate;
  landlock_ruleset_attr attr{};
  attr.handled_access_fs = write_access;
  const int ruleset = static_cast<int>(syscall(SYS_landlock_create_ruleset, &attr, sizeof(attr), 0));
  if (ruleset < 0) return false;
  bool ok = true;
  const int dir_fd = open(dir, O_PATH | O_CLOEXEC);
  if (dir_fd < 0) ok = false;
  if (ok) {
    landlock_path_beneath_attr rule{};
    rule.allowed_access = write_access;
    rule.parent_fd = dir_fd;
    ok = syscall(SYS_landlock_add_rule, ruleset, LANDLOCK_RULE_PATH_BENEATH, &rule, 0) == 0;
    close(dir_fd);
  }
  const int null_fd = open("/dev/null", O_PATH | O_CLOEXEC);
  if (ok && null_fd >= 0) {
    landlock_path_beneath_attr rule{};
    rule.allowed_access = LANDLOCK_ACCESS_FS_WRITE_FILE | (abi >= 3 ? kAccessTruncate : 0);
    rule.parent_fd = null_fd;
    syscall(SYS_landlock_add_rule, ruleset, LANDLOCK_RULE_PATH_BENEATH, &rule, 0);
  }
  if (null_fd >= 0) close(null_fd);
  ok = ok && prctl(PR_SET_NO_NEW_PRIVS, 1, 0, 0, 0) == 0 &&
       syscall(SYS_landlock_restrict_self, ruleset, 0) == 0;
  close(ruleset);
  return ok;
#else
  (void)dir;
  return false;
#endif
}

inline void write_all(int fd, const char* msg) {
  std::size_t len = 0;
  while (msg[len]) ++len;
  while (len > 0) {
    const auto n = write(fd, msg, len);
    if (n <= 0) return;
    msg += n;
    len -= static_cast<std::size_t>(n);
  }
}

}  // namespace detail

/// Child process with a stripped environment (PATH and SCRATCH only), the
/// scratch directory as working directory, CPU and file-size limits, a fresh
/// network namespace and writes confined to the scratch directory where the
/// kernel supports it, and a wall-clock timeout.
class ProcessSandbox final : public Sandbox {
 public:
  explicit ProcessSandbox(ProcessSandboxConfig config = {}) : config_(std::move(config)) {}

  SandboxResult run(const std::string& script, const std::filesystem::path& scratch_dir,
                    const std::string& expected_output) override {
    std::filesystem::create_directories(scratch_dir);
    const auto scratch = std::filesystem::canonical(scratch_dir);
    const auto script_path = scratch / config_.script_name;
    fs::write_file_atomic(script_path, script);
    std::error_code ec;
    std::filesystem::remove(scratch / expected_output, ec);

    // everything the child needs is prepared before fork
    const std::string scratch_str = scratch.string();
    const std::string script_str = script_path.string();
    const std::string env_path = "PATH=" + config_.path_env;
    const std::string env_scratch = "SCRATCH=" + scratch_str;
    std::vector<char*> argv = {const_cast<char*>(config_.runtime.c_str()), const_cast<char*>(script_str.c_str()), nullptr};
    std::vector<char*> envp = {const_cast<char*>(env_path.c_str()), const_cast<char*>(env_scratch.c_str()), nullptr};
    const rlim_t cpu = static_cast<rlim_t>(config_.timeout.count()) + 1;

    int out_pipe[2], err_pipe[2], status_pipe[2];
    require(pipe2(out_pipe, O_CLOEXEC) == 0 && pipe2(err_pipe, O_CLOEXEC) == 0 && pipe2(status_pipe, O_CLOEXEC) == 0,
            ErrorCode::kSandboxFailure, "cannot create pipes");

    const auto start = std::chrono::steady_clock::now();
    const pid_t pid = fork();
    require(pid >= 0, ErrorCode::kSandboxFailure, "fork failed");
    if (pid == 0) {
      setpgid(0, 0);
      const int devnull = open("/dev/null", O_RDONLY);
      if (devnull >= 0) dup2(devnull, STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      dup2(err_pipe[1], STDERR_FILENO);
      if (chdir(scratch_str.c_str()) != 0) {
        detail::write_all(STDERR_FILENO, "sandbox: cannot enter scratch directory\n");
        _exit(126);
      }
      rlimit lim_cpu{cpu, cpu};
      rlimit lim_file{config_.max_file_bytes, config_.max_file_bytes};
      rlimit lim_core{0, 0};
      setrlimit(RLIMIT_CPU, &lim_cpu);
      setrlimit(RLIMIT_FSIZE, &lim_file);
      setrlimit(RLIMIT_CORE, &lim_core);
      unsigned char flags = 0;
      if (unshare(CLONE_NEWNET) == 0 || unshare(CLONE_NEWUSER | CLONE_NEWNET) == 0) flags |= detail::kNetIsolated;
      if (detail::confine_writes(scratch_str.c_str())) flags |= detail::kWritesConfined;
      if (write(status_pipe[1], &flags, 1) != 1) _exit(126);
      execvpe(argv[0], argv.data(), envp.data());
      detail::write_all(STDERR_FILENO, "sandbox: cannot execute runtime\n");
      _exit(127);
    }
    close(out_pipe[1]);
    close(err_pipe[1]);
    close(status_pipe[1]);

    SandboxResult result;
    unsigned char flags = 0;
    if (read(status_pipe[0], &flags, 1) == 1) {
      result.network_isolated = flags & detail::kNetIsolated;
      result.writes_confined = flags & detail::kWritesConfined;
    }
    close(status_pipe[0]);

    const auto deadline = start + config_.timeout;
    pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
    std::string* sinks[2] = {&result.stdout_text, &result.stderr_text};
    int open_fds = 2;
    char buf[4096];
    while (open_fds > 0) {
      const auto remaining =
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
      if (remaining <= 0) {
        result.timed_out = true;
        kill(-pid, SIGKILL);
        kill(pid, SIGKILL);
        break;
      }
      const int ready = poll(fds, 2, static_cast<int>(std::min<long long>(remaining, 1000)));
      if (ready < 0 && errno != EINTR) break;
      for (int i = 0; i < 2; ++i) {
        if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
        const auto n = read(fds[i].fd, buf, sizeof(buf));
        if (n > 0) {
          sinks[i]->append(buf, static_cast<std::size_t>(n));
        } else {
          close(fds[i].fd);
          fds[i].fd = -1;
          --open_fds;
        }
      }
    }
    for (auto& f : fds) {
      if (f.fd >= 0) close(f.fd);
    }
    int status = 0;
    waitpid(pid, &status, 0);
    result.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (WIFEXITED(status)) {
      result.exit_status = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      result.exit_status = 128 + WTERMSIG(status);
    }
    const auto produced = scratch / expected_output;
    if (result.exit_status == 0 && !result.timed_out && std::filesystem::is_regular_file(produced)) {
      result.produced_file = produced;
    }
    return result;
  }

  const ProcessSandboxConfig& config() const { return config_; }

 private:
  ProcessSandboxConfig config_;
};

}  // namespace datascout::synthgen
