#include "estd3/replay.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace estd3 {

namespace {

std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

}  // namespace

void SampleRatio::validate() const {
  if (good < 0.0 || bad < 0.0 || noisy < 0.0) {
    throw std::invalid_argument("ratio: entries must be non-negative");
  }
  if (std::abs(good + bad + noisy - 1.0) > 1e-12) {
    throw std::invalid_argument("ratio: entries must sum to 1");
  }
}

RingBuffer::RingBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw std::invalid_argument("ring buffer: capacity must be positive");
  }
}

void RingBuffer::push(Transition t) {
  if (size_ < capacity_) {
    storage_.push_back(std::move(t));
    ++size_;
  } else {
    storage_[head_] = std::move(t);  // evict the oldest
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& RingBuffer::operator[](std::size_t i) const {
  if (i >= size_) throw std::out_of_range("ring buffer index");
  return storage_[(head_ + i) % capacity_];
}

bool ThresholdTracker::admits_good(double fitness) const {
  if (mode == Mode::Literal) {
    return fitness > good_fraction * threshold;
  }
  return fitness > threshold - (1.0 - good_fraction) * std::abs(threshold);
}

void ThresholdTracker::update(double fitness) {
  if (fitness > threshold) threshold = fitness;
}

MultiBuffer::MultiBuffer(std::size_t capacity_each, SampleRatio ratio,
                         std::size_t min_total_for_ready)
    : good_(capacity_each),
      bad_(capacity_each),
      noisy_(capacity_each),
      ratio_(ratio),
      min_total_(min_total_for_ready) {
  ratio_.validate();
}

Compartment MultiBuffer::route_trajectory(const Trajectory& traj,
                                          ThresholdTracker& tracker) {
  const bool good = tracker.admits_good(traj.fitness);
  RingBuffer& dest = good ? good_ : bad_;
  for (const Transition& t : traj.transitions) dest.push(t);
  tracker.update(traj.fitness);
  return good ? Compartment::Good : Compartment::Bad;
}

BatchCounts MultiBuffer::batch_counts(std::size_t batch_size) const {
  BatchCounts c;
  c.good = round_half_up(ratio_.good * static_cast<double>(batch_size));
  c.bad = round_half_up(ratio_.bad * static_cast<double>(batch_size));
  if (c.good + c.bad > batch_size) {
    // Degenerate rounding overflow; noisy gets nothing.
    c.bad = batch_size - c.good;
  }
  c.noisy = batch_size - c.good - c.bad;
  return c;
}

bool MultiBuffer::ready(std::size_t batch_size) const {
  const BatchCounts c = batch_counts(batch_size);
  return good_.size() >= c.good && bad_.size() >= c.bad &&
         noisy_.size() >= c.noisy && total_size() >= min_total_;
}

std::vector<Transition> MultiBuffer::sample_batch(std::size_t batch_size,
                                                  Rng& rng) const {
  if (!ready(batch_size)) {
    throw std::logic_error("multibuffer: sample_batch before ready");
  }
  const BatchCounts c = batch_counts(batch_size);
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t k = 0; k < c.good; ++k) batch.push_back(good_[rng.uniform_index(good_.size())]);
  for (std::size_t k = 0; k < c.bad; ++k) batch.push_back(bad_[rng.uniform_index(bad_.size())]);
  for (std::size_t k = 0; k < c.noisy; ++k) batch.push_back(noisy_[rng.uniform_index(noisy_.size())]);
  // Fisher-Yates so row order carries no compartment signal.
  for (std::size_t i = batch.size(); i > 1; --i) {
    std::swap(batch[i - 1], batch[rng.uniform_index(i)]);
  }
  return batch;
}

}  // namespace estd3
