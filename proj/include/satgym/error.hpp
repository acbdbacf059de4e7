#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace satgym {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at offset " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Raised instead of a plain ParseError when '(' and ')' do not pair up.
class UnbalancedParenthesesError : public ParseError {
 public:
  using ParseError::ParseError;
};

class TaskError : public Error {
 public:
  using Error::Error;
};

class InvalidActionError : public Error {
 public:
  using Error::Error;
};

class EpisodeFinishedError : public Error {
 public:
  using Error::Error;
};

class NotResetError : public Error {
 public:
  using Error::Error;
};

// Startup or runtime failure of a prover backend. `backend()` names it.
class BackendError : public Error {
 public:
  BackendError(std::string backend, const std::string& message)
      : Error(backend + ": " + message), backend_(std::move(backend)) {}

  const std::string& backend() const { return backend_; }

 private:
  std::string backend_;
};

// The prover side went away in the middle of an episode.
class BackendDisconnectedError : public BackendError {
 public:
  using BackendError::BackendError;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public Error {
 public:
  using Error::Error;
};

}  // namespace satgym
