#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace synaptik {

// Every error raised by the library carries a short machine-readable kind
// so the CLI can emit it as JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& m) : Error("parameter_error", m) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error("shape_error", m) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& m) : Error("format_error", m) {}
};

struct MalformedAnnotation : Error {
  MalformedAnnotation(std::uint32_t synapse, const std::string& m)
      : Error("malformed_annotation", m), synapse_id(synapse) {}
  std::uint32_t synapse_id;
};

struct IngestionError : Error {
  explicit IngestionError(const std::string& m) : Error("ingestion_error", m) {}
};

struct TrainingError : Error {
  explicit TrainingError(const std::string& m) : Error("training_error", m) {}
};

struct GenerationError : Error {
  explicit GenerationError(const std::string& m) : Error("generation_error", m) {}
};

struct EvaluationError : Error {
  explicit EvaluationError(const std::string& m) : Error("evaluation_error", m) {}
};

}  // namespace synaptik
