/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#ifndef CIA_ERROR_HPP
#define CIA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cia {

enum class ErrorKind { kConfig, kData, kInfeasible };

/// Base of all toolkit errors. Carries a stable name and the module it
/// originates from so the CLI can emit machine-parsable one-liners and map
/// kinds onto exit codes.
class Error : public std::runtime_error {
 public:
  ErrorKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::string& module_name() const { return module_; }

 protected:
  Error(ErrorKind kind, std::string name, std::string module,
        const std::string& message)
      : std::runtime_error(message),
        kind_(kind),
        name_(std::move(name)),
        module_(std::move(module)) {}

 private:
  ErrorKind kind_;
  std::string name_;
  std::string module_;
};

#define CIA_DEFINE_ERROR(NAME, KIND, MODULE)                        \
  struct NAME : Error {                                             \
    explicit NAME(const std::string& message,                       \
                  const std::string& module = MODULE)               \
        : Error(ErrorKind::KIND, #NAME, module, message) {}         \
  }

CIA_DEFINE_ERROR(EmptyLog, kData, "core_model");
CIA_DEFINE_ERROR(InvalidRecord, kData, "core_model");
CIA_DEFINE_ERROR(ParseError, kData, "core_model");
CIA_DEFINE_ERROR(IoError, kData, "cli");
CIA_DEFINE_ERROR(InvalidConfig, kConfig, "log_synth");
CIA_DEFINE_ERROR(UnknownAd, kData, "replay_engine");
CIA_DEFINE_ERROR(SingleDayLog, kData, "log_synth");
CIA_DEFINE_ERROR(NonMonotone, kData, "replay_engine");
CIA_DEFINE_ERROR(DegenerateAd, kData, "inference");
CIA_DEFINE_ERROR(EmptyGrid, kData, "optimizers");
CIA_DEFINE_ERROR(InfeasibleWindow, kInfeasible, "optimizers");

#undef CIA_DEFINE_ERROR

}  // namespace cia

#endif  // CIA_ERROR_HPP
