#include "hsg/policy.hpp"

#include "hsg/errors.hpp"

namespace hsg {

const char* to_string(Actor actor) {
  switch (actor) {
    case Actor::sneaky: return "sneaky";
    case Actor::diagnosis: return "diagnosis";
    case Actor::correction: return "correction";
    case Actor::judge: return "judge";
  }
  return "?";
}

Actor actor_from_string(const std::string& s) {
  if (s == "sneaky") return Actor::sneaky;
  if (s == "diagnosis") return Actor::diagnosis;
  if (s == "correction") return Actor::correction;
  if (s == "judge") return Actor::judge;
  throw config_error("bad_actor", "unknown actor: " + s);
}

const std::string& RoleContext::input(const std::string& name) const {
  auto it = inputs.find(name);
  if (it == inputs.end()) {
    throw assertion_error("missing_input",
                          std::string("role context lacks required input: ") + name);
  }
  return it->second;
}

void RoleContext::validate() const {
  auto require = [&](const char* name) {
    if (!has(name)) {
      throw assertion_error("invalid_context", std::string(to_string(role)) +
                                                   " context requires input \"" + name + "\"");
    }
  };
  switch (role) {
    case Actor::sneaky:
      require("q");
      break;
    case Actor::diagnosis:
      require("a_truth");
      require("a_s");
      break;
    case Actor::correction:
      require("a_s");
      require("a_d");
      if (has("q")) {
        throw assertion_error("invalid_context",
                              "correction context must not carry the question");
      }
      break;
    case Actor::judge:
      require("diag_first");
      require("diag_second");
      break;
  }
}

std::vector<Generation> MockPolicy::sample(const RoleContext& ctx, int n, std::uint64_t seed) {
  (void)ctx;
  (void)seed;
  if (failures_remaining_ > 0) {
    --failures_remaining_;
    throw backend_error(failure_code_, "scripted backend failure");
  }
  std::vector<Generation> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Generation g;
    if (!queue_.empty()) {
      g.text = queue_.front();
      queue_.pop_front();
    } else {
      g.text = fixed_text_;
    }
    g.logprob = logprob_;
    out.push_back(std::move(g));
  }
  return out;
}

double MockPolicy::logprob(const RoleContext& ctx, const std::string& text) {
  (void)ctx;
  (void)text;
  return logprob_;
}

Answer correct_answer(Policy& corrector, const Answer& a_s, const DiagnosticReport& a_d,
                      const Tokenizer& tokenizer, std::uint64_t seed) {
  RoleContext ctx;
  ctx.role = Actor::correction;
  ctx.inputs["a_s"] = a_s.text;
  ctx.inputs["a_d"] = a_d.text;
  ctx.validate();
  auto generations = corrector.sample(ctx, 1, seed);
  if (generations.empty()) {
    throw backend_error("empty_correction", "corrector returned no generation");
  }
  return make_answer(std::move(generations.front().text), Role::correction, tokenizer);
}

}  // namespace hsg
