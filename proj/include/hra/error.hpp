#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hra {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Comparison or operation over mismatched value tags.
struct TypeError : Error {
  using Error::Error;
};

struct CsvError : Error {
  CsvError(std::string msg, std::size_t row) : Error(std::move(msg)), row(row) {}
  std::size_t row = 0;
};

/// Malformed catalog / description / config document.
struct LoadError : Error {
  LoadError(std::string msg, std::size_t line = 0) : Error(std::move(msg)), line(line) {}
  std::size_t line = 0;
};

/// Non-retryable backend failure (bad credentials, bad endpoint config).
struct AuthError : Error {
  using Error::Error;
};

/// Transient backend failure; retried by complete_with_retry.
struct RetryableBackendError : Error {
  using Error::Error;
};

/// Retry budget exhausted; carries every rejected response.
struct BackendError : Error {
  BackendError(std::string msg, std::vector<std::string> rejected)
      : Error(std::move(msg)), rejected(std::move(rejected)) {}
  std::vector<std::string> rejected;
};

struct ExecError : Error {
  ExecError(std::string msg, int node_id) : Error(std::move(msg)), node_id(node_id) {}
  int node_id = -1;
};

struct TimeoutError : Error {
  using Error::Error;
};

}  // namespace hra
