#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairdef {

enum class ErrorKind {
  kSchema,
  kEncoding,
  kEmptyInput,
  kPartition,
  kConfig,
  kSampling,
  kShape,
  kUnderdetermined,
  kDivergence,
  kMetric,
  kCheck,
  kGeneration,
  kDegenerateInput,
  kRanking,
  kNumerical,
  kScenario,
  kEvaluation,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kEncoding: return "encoding error";
    case ErrorKind::kEmptyInput: return "empty-input error";
    case ErrorKind::kPartition: return "partition error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kSampling: return "sampling error";
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kUnderdetermined: return "underdetermined error";
    case ErrorKind::kDivergence: return "divergence error";
    case ErrorKind::kMetric: return "metric error";
    case ErrorKind::kCheck: return "check error";
    case ErrorKind::kGeneration: return "generation error";
    case ErrorKind::kDegenerateInput: return "degenerate-input error";
    case ErrorKind::kRanking: return "ranking error";
    case ErrorKind::kNumerical: return "numerical error";
    case ErrorKind::kScenario: return "scenario error";
    case ErrorKind::kEvaluation: return "evaluation error";
    case ErrorKind::kIo: return "I/O error";
  }
  return "error";
}

}  // namespace fairdef
