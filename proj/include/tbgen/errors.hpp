#pragma once

#include <stdexcept>
#include <string>

namespace tbgen {

// Base of every error the pipeline raises on purpose. kind() is the stable
// machine-readable tag written to error.json.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define TBGEN_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// signal-model
TBGEN_DEFINE_ERROR(WidthError);
TBGEN_DEFINE_ERROR(FormatError);
TBGEN_DEFINE_ERROR(ParseError);
TBGEN_DEFINE_ERROR(StructureError);
TBGEN_DEFINE_ERROR(ValidationError);

// llm-gateway
TBGEN_DEFINE_ERROR(ProviderError);
TBGEN_DEFINE_ERROR(FixtureMissError);
TBGEN_DEFINE_ERROR(ConfigError);

// agents
TBGEN_DEFINE_ERROR(BadProblem);
TBGEN_DEFINE_ERROR(StimulusGenError);
TBGEN_DEFINE_ERROR(EmulatorGenError);
TBGEN_DEFINE_ERROR(BackendError);
TBGEN_DEFINE_ERROR(AllCandidatesFailedError);
TBGEN_DEFINE_ERROR(JudgeParseError);

// codegen / simulation
TBGEN_DEFINE_ERROR(CodegenError);
TBGEN_DEFINE_ERROR(AmbiguousClockError);
TBGEN_DEFINE_ERROR(EnvironmentError);
TBGEN_DEFINE_ERROR(SimTimeoutError);
TBGEN_DEFINE_ERROR(ProtocolError);

// eval
TBGEN_DEFINE_ERROR(EvalInputError);

#undef TBGEN_DEFINE_ERROR

// Carries the full completion text so the caller can log it.
class ExtractionError : public Error {
 public:
  ExtractionError(const std::string& message, std::string text)
      : Error("ExtractionError", message), text_(std::move(text)) {}
  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
};

}  // namespace tbgen
