#pragma once

#include <map>
#include <string>
#include <vector>

#include "spdecone/simulate.hpp"

namespace spdecone {

/// Named gallery model plus parameter / flag overrides. Numeric overrides
/// land in `params`, textual ones (e.g. sigma=additive) in `flags`.
struct ApplicationSpec {
  std::string name;
  std::map<std::string, double> params;
  std::map<std::string, std::string> flags;

  double param(const std::string& key, double fallback) const;
  std::string flag(const std::string& key, const std::string& fallback) const;
};

struct Application {
  std::string name;
  SpacePtr space;
  ConePtr cone;
  SemigroupPtr sg;
  CoefficientSet coeffs;
  QWienerSpec qw;
  Eigen::VectorXd h0;

  Model model() const { return {space, sg, coeffs, qw, h0}; }
};

const std::vector<std::string>& application_names();
Application build_application(const ApplicationSpec& spec);

}  // namespace spdecone
