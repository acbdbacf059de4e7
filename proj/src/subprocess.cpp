#include "satgym/subprocess.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "satgym/error.hpp"

namespace satgym {
namespace {

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv, bool capture_output) {
  if (argv.empty()) throw Error("empty command line");
  ignore_sigpipe();
  int in_pipe[2];
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error("pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error("pipe failed");
  }
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw Error("pipe failed");
  }

  std::vector<char*> args;
  for (const auto& arg : argv) args.push_back(const_cast<char*>(arg.c_str()));
  args.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0],
                   err_pipe[1]}) {
      ::close(fd);
    }
    throw Error(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(capture_output ? out_pipe[1] : STDERR_FILENO, STDOUT_FILENO);
    ::signal(SIGPIPE, SIG_DFL);
    ::execvp(args[0], args.data());
    const int code = errno;
    [[maybe_unused]] auto ignored = ::write(err_pipe[1], &code, sizeof code);
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  stdin_fd_ = in_pipe[1];
  stdout_fd_ = out_pipe[0];

  int code = 0;
  ssize_t n;
  do {
    n = ::read(err_pipe[0], &code, sizeof code);
  } while (n < 0 && errno == EINTR);
  ::close(err_pipe[0]);
  if (n == static_cast<ssize_t>(sizeof code)) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
    status_ = status;
    close_fd(stdin_fd_);
    close_fd(stdout_fd_);
    throw Error("cannot execute '" + argv[0] + "': " + std::strerror(code));
  }
  if (capture_output) {
    reader_ = std::make_unique<LineReader>(stdout_fd_);
  } else {
    close_fd(stdout_fd_);
  }
}

Subprocess::~Subprocess() { terminate(std::chrono::milliseconds(0)); }

bool Subprocess::write_line(const std::string& line) {
  if (stdin_fd_ < 0) return false;
  return write_all(stdin_fd_, line + "\n");
}

std::optional<std::string> Subprocess::read_line(
    std::optional<std::chrono::milliseconds> timeout) {
  if (!reader_) return std::nullopt;
  return reader_->read_line(timeout);
}

int Subprocess::terminate(std::chrono::milliseconds grace) {
  if (status_) return *status_;
  if (pid_ <= 0) return -1;
  close_fd(stdin_fd_);
  int status = 0;
  const auto deadline = std::chrono::steady_clock::now() + grace;
  while (true) {
    const pid_t done = ::waitpid(pid_, &status, WNOHANG);
    if (done == pid_) break;
    if (done < 0 && errno != EINTR) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid_, SIGKILL);
      while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
      }
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  reader_.reset();
  close_fd(stdout_fd_);
  status_ = status;
  return status;
}

std::vector<std::string> expand_command(const std::vector<std::string>& command,
                                        const std::map<std::string, std::string>& values) {
  std::vector<std::string> out;
  for (std::string arg : command) {
    for (const auto& [key, value] : values) {
      for (auto at = arg.find(key); at != std::string::npos; at = arg.find(key, at)) {
        arg.replace(at, key.size(), value);
        at += value.size();
      }
    }
    out.push_back(std::move(arg));
  }
  return out;
}

}  // namespace satgym
