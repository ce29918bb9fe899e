#ifndef SSBO_SAMPLES_HPP
#define SSBO_SAMPLES_HPP

#include "ssbo/design_space.hpp"

#include <cstddef>
#include <vector>

namespace ssbo {

/// One true-model response: objective and constraint vector (feasible iff g <= 0).
struct Evaluation {
  double objective = 0.0;
  Vector constraints;
};

struct Sample {
  UnitPoint x;
  RawPoint x_raw;
  double J = 0.0;
  Vector g;

  bool feasible(double tau) const { return g.size() == 0 || g.maxCoeff() <= tau; }
  double violation() const { return g.size() == 0 ? 0.0 : g.cwiseMax(0.0).sum(); }
};

/// Insertion-ordered evaluated samples with pairwise-distinct unit inputs.
class SampleSet {
 public:
  SampleSet() = default;

  void add(Sample s) {
    if (!samples_.empty()) {
      if (s.x.size() != dim() || s.g.size() != constraint_count())
        throw Error("sample dimensions do not match the set");
      for (const auto& other : samples_) {
        if (other.x == s.x) throw Error("duplicate sample input");
      }
    }
    if (!std::isfinite(s.J) || !s.g.allFinite()) throw Error("sample responses must be finite");
    samples_.push_back(std::move(s));
  }

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  Eigen::Index dim() const { return samples_.empty() ? 0 : samples_.front().x.size(); }
  Eigen::Index constraint_count() const {
    return samples_.empty() ? 0 : samples_.front().g.size();
  }

  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }
  std::span<const Sample> samples() const { return samples_; }

  std::vector<UnitPoint> inputs() const {
    std::vector<UnitPoint> xs;
    xs.reserve(samples_.size());
    for (const auto& s : samples_) xs.push_back(s.x);
    return xs;
  }

 private:
  std::vector<Sample> samples_;
};

/// Current best sample, referenced by its position in the SampleSet.
struct Incumbent {
  std::size_t index = 0;
  bool feasible = false;
};

}  // namespace ssbo

#endif  // SSBO_SAMPLES_HPP
