// SPDX-License-Identifier: Apache-2.0
#include "meterstick/common/process.hpp"

#include <fcntl.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <climits>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "meterstick/common/error.hpp"

namespace meterstick::process {

Child::Child(Child&& o) noexcept : pid_(std::exchange(o.pid_, -1)), status_(o.status_) {}

Child& Child::operator=(Child&& o) noexcept {
  if (this != &o) {
    if (pid_ > 0 && !status_) terminate();
    pid_ = std::exchange(o.pid_, -1);
    status_ = o.status_;
  }
  return *this;
}

Child::~Child() {
  if (pid_ > 0 && !status_) terminate();
}

bool Child::reap(bool block) {
  if (pid_ <= 0 || status_) return true;
  int st = 0;
  const pid_t r = ::waitpid(pid_, &st, block ? 0 : WNOHANG);
  if (r == pid_) {
    status_ = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
    return true;
  }
  if (r < 0 && errno == ECHILD) {
    status_ = -1;
    return true;
  }
  return false;
}

bool Child::running() { return pid_ > 0 && !reap(false); }

std::optional<int> Child::wait(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!reap(false)) {
    if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return status_;
}

int Child::terminate(std::chrono::milliseconds grace) {
  if (pid_ <= 0) return -1;
  if (status_) return *status_;
  ::kill(pid_, SIGTERM);
  if (auto st = wait(grace)) return *st;
  ::kill(pid_, SIGKILL);
  reap(true);
  return status_.value_or(-1);
}

pid_t Child::release() noexcept {
  status_ = -1;
  return std::exchange(pid_, -1);
}

Child spawn(const std::vector<std::string>& argv, const SpawnOptions& options) {
  if (argv.empty()) throw Error("spawn: empty command line");
  std::vector<char*> args;
  args.reserve(argv.size() + 1);
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    if (!options.log_file.empty()) {
      const int fd = ::open(options.log_file.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
      if (fd >= 0) {
        ::dup2(fd, STDOUT_FILENO);
        ::dup2(fd, STDERR_FILENO);
        ::close(fd);
      }
    }
    if (options.memory_limit_mb > 0) {
      rlimit lim{};
      lim.rlim_cur = lim.rlim_max = static_cast<rlim_t>(options.memory_limit_mb) * 1024 * 1024;
      ::setrlimit(RLIMIT_AS, &lim);
    }
    if (options.cpu_affinity != 0) {
      cpu_set_t set;
      CPU_ZERO(&set);
      for (int cpu = 0; cpu < 64; ++cpu) {
        if (options.cpu_affinity & (1ULL << cpu)) CPU_SET(cpu, &set);
      }
      ::sched_setaffinity(0, sizeof(set), &set);
    }
    ::execvp(args[0], args.data());
    std::_Exit(127);
  }
  return Child(pid);
}

int run_shell(const std::string& command) {
  const int st = std::system(command.c_str());
  if (st < 0) return -1;
  return WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
}

std::string self_executable() {
  char buf[PATH_MAX];
  const ssize_t n = ::readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  if (n <= 0) throw Error("cannot resolve /proc/self/exe");
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace meterstick::process
