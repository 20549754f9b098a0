#pragma once

#include <vector>

#include "plgrim/geometry.hpp"

namespace plgrim {

// Time-indexed primitive action sequence; the unit of receding-horizon
// hand-off and reconciliation.
struct Policy {
  enum class Source { Lcp, GcpGuided, Reconciled };

  double t0 = 0.0;
  std::vector<PrimitiveMove> actions;  // at most `horizon` entries
  int horizon = 0;
  Source source = Source::Lcp;

  bool empty() const { return actions.empty(); }
  std::size_t size() const { return actions.size(); }
};

inline const char* source_name(Policy::Source s) {
  switch (s) {
    case Policy::Source::Lcp: return "LCP";
    case Policy::Source::GcpGuided: return "GCP-guided";
    case Policy::Source::Reconciled: return "reconciled";
  }
  return "?";
}

}  // namespace plgrim
