#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace schoolsense {

// Error codes shared across modules. The C API mirrors these one-to-one.
enum class Errc {
  ok = 0,
  invalid_argument,
  malformed_topic,
  malformed_payload,
  unknown_resource,
  duplicate_resource,
  too_old,
  backpressure,
  source_unavailable,
  empty_children,
  no_samples,
  empty_series,
  no_data,
  no_evaluable_hours,
  no_weekend_data,
  range_too_large,
  storage_full,
  io_failure,
  sink_failure,
  unauthorized,
  invalid_config,
  engine_unavailable,
  internal,
};

const char* errc_name(Errc c);

struct Error {
  Errc code = Errc::internal;
  std::string message;
};

// Minimal expected-like wrapper (std::expected is not available on this
// toolchain). Value access on an error is a programming bug and throws.
template <typename T>
class Result {
 public:
  Result(T value) : value_(std::move(value)) {}
  Result(Error err) : error_(std::move(err)) {}
  Result(Errc code, std::string message) : error_(Error{code, std::move(message)}) {}

  bool ok() const { return value_.has_value(); }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    require_ok();
    return *value_;
  }
  T& value() & {
    require_ok();
    return *value_;
  }
  T&& take() {
    require_ok();
    return std::move(*value_);
  }

  const Error& error() const {
    if (ok()) throw std::logic_error("Result::error() called on ok result");
    return error_;
  }
  Errc code() const { return ok() ? Errc::ok : error_.code; }

 private:
  void require_ok() const {
    if (!ok())
      throw std::logic_error(std::string("Result::value() on error: ") + errc_name(error_.code) +
                             ": " + error_.message);
  }
  std::optional<T> value_;
  Error error_;
};

// Result<void> analogue.
class Status {
 public:
  Status() = default;
  Status(Error err) : error_(std::move(err)) {}
  Status(Errc code, std::string message) : error_(Error{code, std::move(message)}) {}
  static Status success() { return Status(); }

  bool ok() const { return !error_.has_value(); }
  explicit operator bool() const { return ok(); }
  const Error& error() const {
    if (ok()) throw std::logic_error("Status::error() called on ok status");
    return *error_;
  }
  Errc code() const { return ok() ? Errc::ok : error_->code; }

 private:
  std::optional<Error> error_;
};

}  // namespace schoolsense
