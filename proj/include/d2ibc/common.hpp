#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace d2ibc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCode {
  Parse,
  Schema,
  EmptyDataset,
  Bound,
  BasisTooLarge,
  Shape,
  SingularFit,
  NumericRange,
  Budget,
  InsufficientData,
  PlantDivergence,
  DegenerateDomain,
  AssumptionViolation,
  EmptySamples,
  Config,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Schema: return "schema error";
    case ErrorCode::EmptyDataset: return "empty dataset";
    case ErrorCode::Bound: return "bound error";
    case ErrorCode::BasisTooLarge: return "basis too large";
    case ErrorCode::Shape: return "shape error";
    case ErrorCode::SingularFit: return "singular fit";
    case ErrorCode::NumericRange: return "numeric range error";
    case ErrorCode::Budget: return "budget error";
    case ErrorCode::InsufficientData: return "insufficient data";
    case ErrorCode::PlantDivergence: return "plant divergence";
    case ErrorCode::DegenerateDomain: return "degenerate domain";
    case ErrorCode::AssumptionViolation: return "assumption violation";
    case ErrorCode::EmptySamples: return "empty sample set";
    case ErrorCode::Config: return "config error";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

inline double inf_norm(const Eigen::Ref<const Matrix>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Seeded generator with a platform-independent mapping to doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

 private:
  std::uint64_t state_;
};

// Sub-seed for a named pipeline stage.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  Rng mix(seed ^ h);
  return mix.next();
}

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("D2IBC_LOG");
    if (env == nullptr) return LogLevel::Warn;
    std::string_view v(env);
    if (v == "error") return LogLevel::Error;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

inline void log(LogLevel level, const std::string& msg) {
  static constexpr const char* names[] = {"error", "warn", "info", "debug"};
  if (static_cast<int>(level) <= static_cast<int>(log_level()))
    std::fprintf(stderr, "[d2ibc %s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

}  // namespace d2ibc
