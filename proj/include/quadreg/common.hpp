#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace quadreg {

enum class ErrorCode {
  NotAQuadric,
  NoCenter,
  FitDegenerate,
  NoGround,
  EmptyScene,
  LabelMismatch,
  NoSharedSemantics,
  GraphTooLarge,
  CorrespondenceDegenerate,
  DegenerateConfiguration,
  RegistrationFailed,
  InputError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Single RNG type used everywhere so seeded runs are reproducible.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Semantic label constants shared by extraction, matching and the CLI.
// External label files may carry arbitrary integers; anything not listed
// here is treated as a generic object class.
namespace labels {
constexpr int kGround = 1;
constexpr int kPlane = 2;
constexpr int kLine = 3;
constexpr int kObject = 10;
constexpr int kVehicle = 11;
constexpr int kTrunk = 12;
constexpr int kVegetation = 13;
}  // namespace labels

}  // namespace quadreg
