#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pumphi {

// Fine-grained failure codes. Each maps onto one of three coarse classes that
// the CLI turns into exit codes.
enum class Errc {
  config,
  data,
  model,
  no_valid_reading,
  infeasible_segment,
  empty_curve,
  degenerate_input,
  zero_variance,
  no_clean_runs,
  zero_baseline,
  no_viable_segment,
  empty_channel,
  bad_plan_length,
  vocabulary_empty,
  too_few_rows,
  empty_training,
  k_too_large,
  diverged_loss,
  empty_train,
  length_mismatch,
  empty,
};

enum class ErrorClass { config, data, model };

constexpr std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::config: return "ConfigError";
    case Errc::data: return "DataError";
    case Errc::model: return "ModelError";
    case Errc::no_valid_reading: return "NoValidReading";
    case Errc::infeasible_segment: return "InfeasibleSegment";
    case Errc::empty_curve: return "EmptyCurve";
    case Errc::degenerate_input: return "DegenerateInput";
    case Errc::zero_variance: return "ZeroVariance";
    case Errc::no_clean_runs: return "NoCleanRuns";
    case Errc::zero_baseline: return "ZeroBaseline";
    case Errc::no_viable_segment: return "NoViableSegment";
    case Errc::empty_channel: return "EmptyChannel";
    case Errc::bad_plan_length: return "BadPlanLength";
    case Errc::vocabulary_empty: return "VocabularyEmpty";
    case Errc::too_few_rows: return "TooFewRows";
    case Errc::empty_training: return "EmptyTraining";
    case Errc::k_too_large: return "KTooLarge";
    case Errc::diverged_loss: return "DivergedLoss";
    case Errc::empty_train: return "EmptyTrain";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty: return "Empty";
  }
  return "Unknown";
}

constexpr ErrorClass error_class(Errc code) noexcept {
  switch (code) {
    case Errc::config:
      return ErrorClass::config;
    case Errc::model:
    case Errc::empty_training:
    case Errc::k_too_large:
    case Errc::diverged_loss:
    case Errc::empty_train:
      return ErrorClass::model;
    default:
      return ErrorClass::data;
  }
}

constexpr std::string_view error_class_name(ErrorClass c) noexcept {
  switch (c) {
    case ErrorClass::config: return "ConfigError";
    case ErrorClass::data: return "DataError";
    case ErrorClass::model: return "ModelError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), message_(what) {}

  Errc code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }  // without the code prefix
  ErrorClass error_class() const noexcept { return pumphi::error_class(code_); }

 private:
  Errc code_;
  std::string message_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace pumphi
