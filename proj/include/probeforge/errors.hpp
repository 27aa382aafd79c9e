#pragma once

#include <stdexcept>
#include <string>

namespace probeforge {

// Every failure raised by the core library derives from Error. The kind
// determines the status code reported through the C API and the CLI exit code.
enum class ErrorKind {
  Dimension,
  Label,
  Optimizer,
  Graph,
  State,
  Data,
  Config,
  Numeric,
  Evaluation,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define PF_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(Kind, what) {}    \
  };

PF_DEFINE_ERROR(DimensionError, ErrorKind::Dimension)
PF_DEFINE_ERROR(LabelError, ErrorKind::Label)
PF_DEFINE_ERROR(OptimizerError, ErrorKind::Optimizer)
PF_DEFINE_ERROR(GraphError, ErrorKind::Graph)
PF_DEFINE_ERROR(StateError, ErrorKind::State)
PF_DEFINE_ERROR(DataError, ErrorKind::Data)
PF_DEFINE_ERROR(ConfigError, ErrorKind::Config)
PF_DEFINE_ERROR(NumericError, ErrorKind::Numeric)
PF_DEFINE_ERROR(EvaluationError, ErrorKind::Evaluation)

#undef PF_DEFINE_ERROR

}  // namespace probeforge
