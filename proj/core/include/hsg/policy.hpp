#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hsg/answer.hpp"

namespace hsg {

/// The four prompt-driven actors. Sneaky and diagnosis share parameters when
/// backed by the same trainable policy; the corrector is fixed by design and
/// the judge only appears in evaluation.
enum class Actor { sneaky, diagnosis, correction, judge };

const char* to_string(Actor actor);
Actor actor_from_string(const std::string& s);

/// Everything a backend needs to realize one call: the actor, the prompt
/// template to use, and the named inputs that template consumes.
struct RoleContext {
  Actor role = Actor::sneaky;
  std::string prompt_template_id;
  std::map<std::string, std::string> inputs;

  const std::string& input(const std::string& name) const;
  bool has(const std::string& name) const { return inputs.count(name) > 0; }

  // sneaky needs q; diagnosis needs a_truth and a_s; correction needs a_s and
  // a_d and must not see q (the corrector works from the diagnosis alone).
  void validate() const;
};

struct Generation {
  std::string text;
  std::optional<double> logprob;  // under the sampling policy, when available
  bool truncated = false;
};

class Policy {
 public:
  virtual ~Policy() = default;

  /// n independent draws, reproducible from `seed`.
  virtual std::vector<Generation> sample(const RoleContext& ctx, int n, std::uint64_t seed) = 0;

  /// Log-probability of `text` under this policy for `ctx`. Backends that
  /// cannot score arbitrary text throw `unsupported_scoring`.
  virtual double logprob(const RoleContext& ctx, const std::string& text) = 0;

  virtual std::string backend_id() const = 0;
};

/// Scripted backend for tests and golden transcripts: returns queued texts in
/// order, then the fixed text; logprob is a configured constant.
class MockPolicy : public Policy {
 public:
  explicit MockPolicy(std::string fixed_text = "", double logprob = -1.0)
      : fixed_text_(std::move(fixed_text)), logprob_(logprob) {}

  void enqueue(std::string text) { queue_.push_back(std::move(text)); }
  void set_fixed(std::string text) { fixed_text_ = std::move(text); }
  void set_logprob(double lp) { logprob_ = lp; }
  /// The next `times` sample() calls throw a backend error with `code`.
  void fail_next(int times, std::string code = "endpoint_unreachable") {
    failures_remaining_ = times;
    failure_code_ = std::move(code);
  }

  std::vector<Generation> sample(const RoleContext& ctx, int n, std::uint64_t seed) override;
  double logprob(const RoleContext& ctx, const std::string& text) override;
  std::string backend_id() const override { return "mock"; }

 private:
  std::deque<std::string> queue_;
  std::string fixed_text_;
  double logprob_;
  int failures_remaining_ = 0;
  std::string failure_code_;
};

/// a_C = corrector(a_S, a_D). Builds the restricted correction context (no q),
/// draws one generation, and wraps it as a correction-role answer.
Answer correct_answer(Policy& corrector, const Answer& a_s, const DiagnosticReport& a_d,
                      const Tokenizer& tokenizer, std::uint64_t seed = 0);

}  // namespace hsg
