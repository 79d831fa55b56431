#pragma once

#include <stdexcept>
#include <string>

namespace steering {

// Base error. The category string maps one-to-one onto the CLI's
// machine-readable "error: <category>: <message>" stderr lines; the CLI
// exits 2 for invalid-argument (validation) and 1 for everything else
// (computation failures).
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& m) : Error("invalid-argument", m) {}
};

struct DegenerateGeometry : Error {
  explicit DegenerateGeometry(const std::string& m) : Error("degenerate-geometry", m) {}
};

struct IllPosedFit : Error {
  explicit IllPosedFit(const std::string& m) : Error("ill-posed-fit", m) {}
};

// Carries the condition estimate (largest term / |denominator|) that
// triggered the failure.
class IllConditioned : public Error {
 public:
  IllConditioned(const std::string& m, double condition)
      : Error("ill-conditioned", m), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

struct InsufficientData : Error {
  explicit InsufficientData(const std::string& m) : Error("insufficient-data", m) {}
};

}  // namespace steering
