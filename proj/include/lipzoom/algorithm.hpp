#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lipzoom/environment.hpp"

namespace lipzoom {

struct AuditEvent {
  std::uint64_t round = 0;
  std::string kind;
  json data;
};

// Structured algorithm log: every event is counted, the first `cap` are kept.
class AuditLog {
 public:
  explicit AuditLog(std::size_t cap = 2048) : cap_(cap) {}

  void add(std::uint64_t round, const std::string& kind, json data = json::object());
  void clear();
  const std::vector<AuditEvent>& events() const { return events_; }
  std::uint64_t count(const std::string& kind) const;
  const std::map<std::string, std::uint64_t>& counts() const { return counts_; }
  json summary() const;

 private:
  std::size_t cap_;
  std::vector<AuditEvent> events_;
  std::map<std::string, std::uint64_t> counts_;
};

// An online algorithm as a state machine. Each round the simulator calls
// act(), samples the played arm and queries() together, then observe().
class Algorithm {
 public:
  virtual ~Algorithm() = default;

  virtual std::string name() const = 0;
  virtual Feedback feedback() const = 0;
  // Resets all state for a fresh run.
  virtual void start(std::uint64_t seed) = 0;
  // Arm played in round t (1-based).
  virtual const Point& act(std::uint64_t t) = 0;
  // Points observed besides the played arm: the peek under double feedback,
  // the query set under full feedback, nothing under bandit feedback.
  virtual std::span<const Point> queries() const { return {}; }
  virtual void observe(std::uint64_t t, double arm_reward, std::span<const double> values) = 0;
  // Called once after the last round.
  virtual void finish() {}
  // Current phase index, 0 for unphased algorithms.
  virtual int phase() const { return 0; }
  virtual json describe() const = 0;

  AuditLog& audit() { return audit_; }
  const AuditLog& audit() const { return audit_; }

 protected:
  AuditLog audit_;
};

}  // namespace lipzoom
