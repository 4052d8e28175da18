#pragma once

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

#include "astars/bench.hpp"
#include "astars/core.hpp"
#include "astars/csv.hpp"

extern char** environ;

namespace astars {

class SpawnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Objective backed by a shell command: the coordinates go to the command's
/// standard input as one whitespace-separated line and one real is read back
/// from its standard output. Anything unparseable evaluates to NaN.
class ExternalCommand {
 public:
  explicit ExternalCommand(std::string command) : command_(std::move(command)) {
    if (command_.empty()) {
      throw std::invalid_argument("external oracle: empty command");
    }
    // a command that ignores its input must not kill us on write
    ::signal(SIGPIPE, SIG_IGN);
  }

  const std::string& command() const { return command_; }

  double operator()(const Point& x) const {
    std::string line;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (i > 0) {
        line += ' ';
      }
      line += format_double(x[i]);
    }
    line += '\n';
    const std::string output = run(line);
    const auto v = parse_double(first_token(output));
    return v.value_or(std::numeric_limits<double>::quiet_NaN());
  }

 private:
  static std::string_view first_token(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
      return {};
    }
    const auto e = s.find_first_of(" \t\r\n", b);
    if (s.find_first_not_of(" \t\r\n", e == std::string_view::npos ? s.size() : e) !=
        std::string_view::npos) {
      return {};  // more than one token
    }
    return s.substr(b, e == std::string_view::npos ? e : e - b);
  }

  std::string run(const std::string& input) const {
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe(in_pipe) != 0) {
      throw SpawnError(std::string("external oracle: pipe failed: ") + std::strerror(errno));
    }
    if (::pipe(out_pipe) != 0) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      throw SpawnError(std::string("external oracle: pipe failed: ") + std::strerror(errno));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) {
      posix_spawn_file_actions_addclose(&actions, fd);
    }
    const char* argv[] = {"/bin/sh", "-c", command_.c_str(), nullptr};
    pid_t pid = 0;
    const int rc =
        ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char* const*>(argv), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (rc != 0) {
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      throw SpawnError("external oracle: cannot spawn '" + command_ + "': " + std::strerror(rc));
    }
    std::size_t written = 0;
    while (written < input.size()) {
      const ssize_t n = ::write(in_pipe[1], input.data() + written, input.size() - written);
      if (n < 0) {
        if (errno == EINTR) {
          continue;
        }
        break;  // reader gone; output still decides the value
      }
      written += static_cast<std::size_t>(n);
    }
    ::close(in_pipe[1]);
    std::string output;
    char buf[4096];
    for (;;) {
      const ssize_t n = ::read(out_pipe[0], buf, sizeof buf);
      if (n < 0 && errno == EINTR) {
        continue;
      }
      if (n <= 0) {
        break;
      }
      output.append(buf, static_cast<std::size_t>(n));
    }
    ::close(out_pipe[0]);
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status) && WEXITSTATUS(status) == 127) {
      throw SpawnError("external oracle: command not found: '" + command_ + "'");
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      return {};  // failed evaluation reads as NaN
    }
    return output;
  }

  std::string command_;
};

/// Oracle over a user command in `dim` variables. The command supplies its own
/// noise, so no noise is added and no noiseless value is available.
inline NoisyOracle external_oracle(const std::string& command, std::size_t dim) {
  if (dim < 1) {
    throw std::invalid_argument("external oracle: dimension must be >= 1");
  }
  return NoisyOracle(dim, ExternalCommand(command), NoiseModel{NoiseKind::Additive, 0.0}, false);
}

/// Benchmark-harness wrapper around an external command. `sigma2` and `l1`
/// feed exact or scaled hyperparameters; estimated runs learn both.
inline BenchmarkProblem external_problem(const std::string& command, std::size_t dim,
                                         std::optional<double> sigma2 = std::nullopt,
                                         std::optional<double> l1 = std::nullopt) {
  if (dim < 1) {
    throw std::invalid_argument("external oracle: dimension must be >= 1");
  }
  BenchmarkProblem pb;
  pb.id = "external";
  pb.dim = dim;
  pb.noise = NoiseModel{NoiseKind::Additive, 0.0};
  pb.objective = ExternalCommand(command);
  pb.assumed_sigma2 = sigma2;
  pb.l1 = l1.value_or(0.0);
  pb.noiseless_access = false;
  return pb;
}

}  // namespace astars
