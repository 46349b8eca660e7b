#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "estd3/env.hpp"
#include "estd3/rng.hpp"

namespace estd3 {

/// Batch shares drawn from (good, bad, noisy). Must sum to 1 within 1e-12.
struct SampleRatio {
  double good = 0.5;
  double bad = 0.2;
  double noisy = 0.3;

  /// Throws std::invalid_argument on negative entries or a bad sum.
  void validate() const;
};

/// Bounded FIFO transition store. Indexing is logical: 0 is the oldest
/// element still present.
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest element
  std::size_t size_ = 0;
  std::vector<Transition> storage_;
};

/// Running maximum of observed episodic fitness plus the good/bad routing
/// rule. `Literal` keeps the published comparison F > fraction * T, which is
/// stricter than F > T for negative thresholds; `Offset` switches to
/// F > T - (1 - fraction) * |T|, which degrades gracefully there.
struct ThresholdTracker {
  enum class Mode { Literal, Offset };

  double threshold = -std::numeric_limits<double>::infinity();
  double good_fraction = 0.9;
  Mode mode = Mode::Literal;

  bool admits_good(double fitness) const;
  /// threshold <- max(threshold, fitness); never decreases.
  void update(double fitness);
};

enum class Compartment { Good, Bad, Noisy };

struct BatchCounts {
  std::size_t good = 0;
  std::size_t bad = 0;
  std::size_t noisy = 0;
};

/// Three disjoint compartments plus ratio-composed batch sampling. A batch of
/// size B always contains exactly round-half-up(good * B) good rows,
/// round-half-up(bad * B) bad rows and the remainder from noisy.
class MultiBuffer {
 public:
  MultiBuffer(std::size_t capacity_each, SampleRatio ratio,
              std::size_t min_total_for_ready);

  void push_noisy(Transition t) { noisy_.push(std::move(t)); }

  /// Whole-trajectory routing: every transition goes to good when the
  /// fitness clears the tracker's rule, otherwise to bad; then the tracker
  /// absorbs the fitness. Trajectories are never split.
  Compartment route_trajectory(const Trajectory& traj, ThresholdTracker& tracker);

  BatchCounts batch_counts(std::size_t batch_size) const;

  /// True iff every compartment holds its share of one batch and the total
  /// stored count reached min_total (the TD3 warmup K).
  bool ready(std::size_t batch_size) const;

  /// Uniform draws with replacement per compartment, concatenated
  /// good-bad-noisy, then shuffled. Throws std::logic_error when not ready.
  std::vector<Transition> sample_batch(std::size_t batch_size, Rng& rng) const;

  std::size_t good_size() const { return good_.size(); }
  std::size_t bad_size() const { return bad_.size(); }
  std::size_t noisy_size() const { return noisy_.size(); }
  std::size_t total_size() const { return good_.size() + bad_.size() + noisy_.size(); }
  const SampleRatio& ratio() const { return ratio_; }

 private:
  RingBuffer good_;
  RingBuffer bad_;
  RingBuffer noisy_;
  SampleRatio ratio_;
  std::size_t min_total_;
};

}  // namespace estd3
