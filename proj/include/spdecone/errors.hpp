#pragma once

#include <stdexcept>
#include <string>

namespace spdecone {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MismatchedSpace : Error {
  explicit MismatchedSpace(const std::string& msg) : Error("mismatched space: " + msg) {}
};

struct UnsupportedSpace : Error {
  explicit UnsupportedSpace(const std::string& msg) : Error("unsupported space: " + msg) {}
};

struct UnsupportedCone : Error {
  explicit UnsupportedCone(const std::string& msg) : Error("unsupported cone: " + msg) {}
};

struct NonFiniteValue : Error {
  explicit NonFiniteValue(const std::string& msg) : Error("non-finite value: " + msg) {}
};

struct NoConvergence : Error {
  NoConvergence(const std::string& msg, long iters)
      : Error("no convergence after " + std::to_string(iters) + " iterations: " + msg),
        iterations(iters) {}
  long iterations;
};

struct SingularTransform : Error {
  explicit SingularTransform(const std::string& msg) : Error("singular transform: " + msg) {}
};

struct NegativeTime : Error {
  explicit NegativeTime(double t) : Error("negative time t=" + std::to_string(t)) {}
};

struct LambdaTooSmall : Error {
  LambdaTooSmall(double lambda, double beta)
      : Error("lambda=" + std::to_string(lambda) + " must exceed growth bound beta=" +
              std::to_string(beta)) {}
};

struct NotBoundaryPair : Error {
  explicit NotBoundaryPair(double pairing)
      : Error("pairing <h*,h>=" + std::to_string(pairing) + " exceeds boundary tolerance") {}
};

struct Exhausted : Error {
  explicit Exhausted(const std::string& msg) : Error("sampling exhausted: " + msg) {}
};

struct AlphaNotZero : Error {
  explicit AlphaNotZero(double norm_alpha)
      : Error("alpha is not zero on samples (norm " + std::to_string(norm_alpha) + ")") {}
};

struct BlowUp : Error {
  BlowUp(double norm, double cap)
      : Error("state norm " + std::to_string(norm) + " exceeded blow-up cap " +
              std::to_string(cap)) {}
};

struct InvalidParameter : Error {
  explicit InvalidParameter(const std::string& field, const std::string& msg)
      : Error("invalid parameter '" + field + "': " + msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

}  // namespace spdecone
