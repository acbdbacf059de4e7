#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace satgym {

// Buffered newline-delimited reading from a file descriptor it does not own.
class LineReader {
 public:
  explicit LineReader(int fd) : fd_(fd) {}

  // Next line without its terminator. nullopt at end of stream (a trailing
  // unterminated fragment is returned first). Throws TimeoutError when no
  // complete line arrives within `timeout`; unset waits forever.
  std::optional<std::string> read_line(
      std::optional<std::chrono::milliseconds> timeout = std::nullopt);

 private:
  int fd_;
  std::string buffer_;
  bool eof_ = false;
};

// Writes all of `data`, retrying on EINTR and short writes. Returns false
// when the peer is gone (EPIPE, ECONNRESET).
bool write_all(int fd, std::string_view data);

// Ignore SIGPIPE process-wide so that writes to dead peers fail with EPIPE.
void ignore_sigpipe();

}  // namespace satgym
